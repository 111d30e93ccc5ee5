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

#ifndef STB_REFERENCE_HPP_
#define STB_REFERENCE_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "stb/dynsys.hpp"

namespace stb {

// Normalized time within a reference cycle, always in [0, 1].
class Phase {
 public:
  Phase() = default;
  explicit Phase(double value);
  double value() const { return value_; }

 private:
  double value_ = 0.0;
};

// Time-indexed keyframes of named scalar channels. Immutable once built.
class ReferenceMotion {
 public:
  // Validates: times strictly increasing from 0, rectangular frames,
  // cycle_duration >= last frame time (strictly greater when cyclic and
  // there is more than one frame). cycle_duration <= 0 selects the default:
  // last frame time, or last time plus the mean frame spacing when cyclic.
  ReferenceMotion(std::vector<std::string> channels, std::vector<double> times,
                  std::vector<std::vector<double>> frames, bool cyclic,
                  double cycle_duration = 0.0);

  const std::vector<std::string>& channels() const { return channels_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::vector<double>>& frames() const { return frames_; }
  double cycle_duration() const { return cycle_duration_; }
  bool cyclic() const { return cyclic_; }
  std::size_t frame_count() const { return times_.size(); }

  // -1 when absent.
  int channel_index(std::string_view name) const;

 private:
  std::vector<std::string> channels_;
  std::vector<double> times_;
  std::vector<std::vector<double>> frames_;
  bool cyclic_ = false;
  double cycle_duration_ = 0.0;
};

// Cyclic: (t mod T) / T. Non-cyclic: min(t / T, 1). Throws when T == 0.
Phase phase_of(const ReferenceMotion& motion, double t);

// Piecewise-linear interpolation of every channel. Cyclic motions blend the
// last frame into the first across the wrap at T.
std::vector<double> interpolate(const ReferenceMotion& motion, Phase phase);

// Resolves channel names to indices; throws std::invalid_argument naming the
// first missing channel.
std::vector<int> resolve_channels(const ReferenceMotion& motion,
                                  std::span<const std::string> names);

// Default servo targets (or feedforward accelerations) q-hat at a phase.
std::vector<double> ffc_action(const ReferenceMotion& motion,
                               std::span<const int> action_channels,
                               Phase phase);

// Reads `t,<channel>,...` CSV.
ReferenceMotion load_reference_csv(const std::filesystem::path& path,
                                   bool cyclic, double cycle_duration = 0.0);
void write_reference_csv(const std::filesystem::path& path,
                         const ReferenceMotion& motion);

// Couples a reference with the simulated system: lifts reference channels to
// a SystemState at any time. Velocity channels missing from the reference are
// replaced by central differences of the interpolated coordinates.
class ReferenceTrack {
 public:
  ReferenceTrack(SystemSpec spec, ReferenceMotion motion);

  const SystemSpec& spec() const { return spec_; }
  const ReferenceMotion& motion() const { return motion_; }

  SystemState state_at(double t) const;
  // Time within the current cycle (identity for non-cyclic motions).
  double local_time(double t) const;
  // Episode horizon: T for non-cyclic motions, unbounded when cyclic.
  double horizon() const;

 private:
  SystemSpec spec_;
  ReferenceMotion motion_;
  std::vector<int> coord_channels_;
  std::vector<int> vel_channels_;  // -1 entries use finite differences
};

}  // namespace stb

#endif  // STB_REFERENCE_HPP_
