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

#ifndef STB_BOUNDS_HPP_
#define STB_BOUNDS_HPP_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stb/dynsys.hpp"
#include "stb/reference.hpp"

namespace stb {

struct Event {
  SystemState state;
  double t = 0.0;
};

inline Event make_event(SystemState state) {
  const double t = state.t;
  return Event{std::move(state), t};
}

enum class DeviationKind {
  kPosition,  // |q_i - q_ref,i|, m
  kAngle,     // wrapped |q_i - q_ref,i| in [0, pi], rad
  kEndPoint,  // Euclidean distance between body endpoints, m
  kVelocity,  // |qdot_i - qdot_ref,i|
};

struct ChannelSpec {
  std::string name;
  DeviationKind kind = DeviationKind::kPosition;
  int index = 0;  // coordinate, velocity or body index depending on kind

  bool operator==(const ChannelSpec&) const = default;
};

// Bound channels a system exposes, in declaration order.
std::vector<ChannelSpec> system_channels(SystemKind kind);
ChannelSpec find_channel(SystemKind kind, std::string_view name);

// Sigma as a constant or a piecewise-linear table over (cycle-local) time,
// held constant beyond the table ends. Infinity disables a channel.
class SigmaSchedule {
 public:
  SigmaSchedule() = default;
  explicit SigmaSchedule(double constant);
  explicit SigmaSchedule(std::vector<std::pair<double, double>> table);

  double at(double t) const;
  bool tabulated() const { return !table_.empty(); }
  double constant() const { return constant_; }
  const std::vector<std::pair<double, double>>& table() const {
    return table_;
  }
  SigmaSchedule scaled(double factor) const;

  bool operator==(const SigmaSchedule&) const = default;

 private:
  double constant_ = 1.0;
  std::vector<std::pair<double, double>> table_;
};

enum class CompareOp { kLess, kLessEqual, kGreater, kGreaterEqual };

std::string_view to_string(CompareOp op);
CompareOp compare_op_from_string(std::string_view s);

// A state predicate `coordinate op value` active on [t_begin, t_end]; an
// event inside it violates the bounds (e.g. a tip below the floor).
struct ForbiddenRegion {
  std::string name;
  std::string coordinate;
  CompareOp op = CompareOp::kLess;
  double value = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;

  bool contains(const SystemSpec& spec, const SystemState& state,
                double local_t) const;
  bool operator==(const ForbiddenRegion&) const = default;
};

struct BoundChannel {
  ChannelSpec channel;
  SigmaSchedule sigma;

  bool operator==(const BoundChannel&) const = default;
};

struct SpacetimeBoundSet {
  std::vector<BoundChannel> channels;
  std::vector<ForbiddenRegion> forbidden;

  // Replaces the sigma of an existing channel or appends a new one.
  void set(const ChannelSpec& channel, SigmaSchedule sigma);
  const BoundChannel* find(std::string_view name) const;
  // Every sigma infinite and no forbidden regions.
  SpacetimeBoundSet widened() const;

  bool operator==(const SpacetimeBoundSet&) const = default;
};

struct CheckResult {
  bool within = true;
  std::string channel;  // first failing channel or forbidden region

  static CheckResult Within() { return {}; }
  static CheckResult Violated(std::string name) {
    return {false, std::move(name)};
  }
};

double deviation(const ChannelSpec& channel, const ReferenceTrack& track,
                 const Event& e);

// Inclusive test: deviation <= sigma(t) on every channel, in declaration
// order, then forbidden regions. Throws std::out_of_range when e.t lies
// outside [0, track.horizon()].
CheckResult check_event(const SpacetimeBoundSet& bounds,
                        const ReferenceTrack& track, const Event& e);

// Named presets: "default" maps position channels to 0.2 m, angle channels
// to 0.7 rad and endpoint channels to 0.5 m; "loose" doubles and "tight"
// halves these. Velocity channels are never part of a preset.
SpacetimeBoundSet preset_bounds(std::string_view name, SystemKind kind);

double wrap_angle(double a);

}  // namespace stb

#endif  // STB_BOUNDS_HPP_
