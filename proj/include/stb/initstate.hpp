// Copyright 2026 The stbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STB_INITSTATE_HPP_
#define STB_INITSTATE_HPP_

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "stb/bounds.hpp"
#include "stb/nn.hpp"
#include "stb/reference.hpp"

namespace stb {

// Uniform t in [0, T) lifted onto the reference.
Event rsi_sample(const ReferenceTrack& track, Rng& rng);

// Event on the reference with t uniform inside segment k of n.
Event segment_sample(const ReferenceTrack& track, int segment, int segments,
                     Rng& rng);

int segment_of(const ReferenceTrack& track, double t, int segments);

struct SegmentStats {
  std::vector<double> w;  // average estimated return per segment
  double u = 0.2;         // uniform mixing probability
};

// p(k) = (1-u) softmax(-w/v) + u/n with v = (max w - min w)/3; uniform when
// every w is equal.
std::vector<double> segment_probabilities(const SegmentStats& stats);

// Categorical draw; throws std::invalid_argument unless p sums to 1 within
// 1e-9 with no negative entries.
int sample_segment(std::span<const double> p, Rng& rng);

enum class EliteSign {
  kAsPrinted,  // exp(-w/v): lower estimated return is more likely
  kFavorHigh,  // exp(+w/v)
};

std::string_view to_string(EliteSign sign);
EliteSign elite_sign_from_string(std::string_view s);

// p(l) = exp(-w_l/v) / sum exp(-w_i/v) with v = max w - min w; uniform when
// every w is equal.
std::vector<double> boltzmann_elite_probs(
    std::span<const double> w, EliteSign sign = EliteSign::kAsPrinted);

struct EliteEntry {
  Event event;
  double w = 0.0;
};

// Per-segment sets of m candidate initial events.
struct EliteBuffer {
  int capacity = 32;
  std::vector<std::vector<EliteEntry>> segments;
};

using SegmentSampler = std::function<Event(int segment, Rng&)>;

EliteBuffer init_buffer(const ReferenceTrack& track, int segments,
                        int capacity, Rng& rng);

// For every segment, pool = buffer entries plus candidates and draw
// `capacity` entries without replacement under boltzmann_elite_probs,
// renormalizing after each draw. A pool smaller than capacity is kept whole
// and padded with fresh events from `pad`.
EliteBuffer evolve_buffer(
    const EliteBuffer& buffer,
    const std::vector<std::vector<EliteEntry>>& candidates, Rng& rng,
    const SegmentSampler& pad, EliteSign sign = EliteSign::kAsPrinted);

}  // namespace stb

#endif  // STB_INITSTATE_HPP_
