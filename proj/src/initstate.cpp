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

#include "stb/initstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stb {
namespace {

// Softmax of sign * w / scale, computed relative to the extreme value.
std::vector<double> boltzmann(std::span<const double> w, double scale,
                              double sign) {
  std::vector<double> p(w.size(), 1.0 / static_cast<double>(w.size()));
  if (!(scale > 0.0)) return p;
  const double ref = sign < 0.0 ? *std::min_element(w.begin(), w.end())
                                : *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    p[i] = std::exp(sign * (w[i] - ref) / scale);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

}  // namespace

Event rsi_sample(const ReferenceTrack& track, Rng& rng) {
  const double period = track.motion().cycle_duration();
  std::uniform_real_distribution<double> dist(0.0, period);
  double t = dist(rng);
  if (t >= period) t = 0.0;
  return make_event(track.state_at(t));
}

Event segment_sample(const ReferenceTrack& track, int segment, int segments,
                     Rng& rng) {
  const double width = track.motion().cycle_duration() / segments;
  std::uniform_real_distribution<double> dist(segment * width,
                                              (segment + 1) * width);
  double t = dist(rng);
  t = std::min(t, std::nextafter((segment + 1) * width, 0.0));
  return make_event(track.state_at(std::max(t, 0.0)));
}

int segment_of(const ReferenceTrack& track, double t, int segments) {
  const double local = track.local_time(t);
  const int k = static_cast<int>(
      std::floor(local / track.motion().cycle_duration() * segments));
  return std::clamp(k, 0, segments - 1);
}

std::vector<double> segment_probabilities(const SegmentStats& stats) {
  const std::size_t n = stats.w.size();
  if (n == 0) throw std::invalid_argument("need at least one segment");
  if (stats.u < 0.0 || stats.u > 1.0) {
    throw std::invalid_argument("u must lie in [0, 1]");
  }
  const auto [lo, hi] = std::minmax_element(stats.w.begin(), stats.w.end());
  const double scale = (*hi - *lo) / 3.0;
  std::vector<double> p = boltzmann(stats.w, scale, -1.0);
  for (double& x : p) {
    x = (1.0 - stats.u) * x + stats.u / static_cast<double>(n);
  }
  return p;
}

int sample_segment(std::span<const double> p, Rng& rng) {
  if (p.empty()) throw std::invalid_argument("empty distribution");
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw std::invalid_argument("negative probability");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("probabilities do not sum to 1");
  }
  std::uniform_real_distribution<double> dist(0.0, total);
  const double r = dist(rng);
  double acc = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) last_positive = static_cast<int>(i);
    acc += p[i];
    if (r < acc) return static_cast<int>(i);
  }
  return last_positive;
}

std::string_view to_string(EliteSign sign) {
  return sign == EliteSign::kAsPrinted ? "as_printed" : "favor_high";
}

EliteSign elite_sign_from_string(std::string_view s) {
  if (s == "as_printed") return EliteSign::kAsPrinted;
  if (s == "favor_high") return EliteSign::kFavorHigh;
  throw std::invalid_argument("unknown elite sign '" + std::string(s) + "'");
}

std::vector<double> boltzmann_elite_probs(std::span<const double> w,
                                          EliteSign sign) {
  if (w.empty()) throw std::invalid_argument("need at least one return");
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return boltzmann(w, *hi - *lo, sign == EliteSign::kAsPrinted ? -1.0 : 1.0);
}

EliteBuffer init_buffer(const ReferenceTrack& track, int segments,
                        int capacity, Rng& rng) {
  if (segments < 1 || capacity < 1) {
    throw std::invalid_argument("buffer needs segments and capacity >= 1");
  }
  EliteBuffer buf;
  buf.capacity = capacity;
  buf.segments.resize(segments);
  for (int k = 0; k < segments; ++k) {
    for (int i = 0; i < capacity; ++i) {
      buf.segments[k].push_back({segment_sample(track, k, segments, rng), 0.0});
    }
  }
  return buf;
}

EliteBuffer evolve_buffer(
    const EliteBuffer& buffer,
    const std::vector<std::vector<EliteEntry>>& candidates, Rng& rng,
    const SegmentSampler& pad, EliteSign sign) {
  EliteBuffer out;
  out.capacity = buffer.capacity;
  out.segments.resize(buffer.segments.size());
  const auto m = static_cast<std::size_t>(buffer.capacity);
  for (std::size_t k = 0; k < buffer.segments.size(); ++k) {
    std::vector<EliteEntry> pool = buffer.segments[k];
    if (k < candidates.size()) {
      pool.insert(pool.end(), candidates[k].begin(), candidates[k].end());
    }
    auto& dst = out.segments[k];
    std::vector<double> w;
    w.reserve(pool.size());
    for (const auto& e : pool) w.push_back(e.w);
    std::vector<double> weight;
    if (!pool.empty()) weight = boltzmann_elite_probs(w, sign);
    const std::size_t draws = std::min(m, pool.size());
    for (std::size_t d = 0; d < draws; ++d) {
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      std::uniform_real_distribution<double> dist(0.0, total);
      const double r = dist(rng);
      double acc = 0.0;
      std::size_t pick = 0;
      for (std::size_t i = 0; i < weight.size(); ++i) {
        if (weight[i] <= 0.0) continue;
        pick = i;
        acc += weight[i];
        if (r < acc) break;
      }
      dst.push_back(pool[pick]);
      weight[pick] = 0.0;
    }
    while (dst.size() < m) {
      dst.push_back({pad(static_cast<int>(k), rng), 0.0});
    }
  }
  return out;
}

}  // namespace stb
