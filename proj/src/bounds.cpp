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

#include "stb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stb {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);
  return r;
}

std::vector<ChannelSpec> system_channels(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDoubleIntegrator1D:
      return {{"com_pos", DeviationKind::kPosition, 0},
              {"vel", DeviationKind::kVelocity, 0}};
    case SystemKind::kPlanarPointMass:
      return {{"com_x", DeviationKind::kPosition, 0},
              {"com_y", DeviationKind::kPosition, 1},
              {"vel_x", DeviationKind::kVelocity, 0},
              {"vel_y", DeviationKind::kVelocity, 1}};
    case SystemKind::kPendulum:
      return {{"theta", DeviationKind::kAngle, 0},
              {"tip", DeviationKind::kEndPoint, 0},
              {"omega", DeviationKind::kVelocity, 0}};
  }
  return {};
}

ChannelSpec find_channel(SystemKind kind, std::string_view name) {
  for (auto& ch : system_channels(kind)) {
    if (ch.name == name) return ch;
  }
  throw std::invalid_argument("no bound channel '" + std::string(name) +
                              "' on " + std::string(to_string(kind)));
}

SigmaSchedule::SigmaSchedule(double constant) : constant_(constant) {
  if (!(constant > 0.0)) throw std::invalid_argument("sigma must be > 0");
}

SigmaSchedule::SigmaSchedule(std::vector<std::pair<double, double>> table)
    : table_(std::move(table)) {
  if (table_.empty()) throw std::invalid_argument("empty sigma table");
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (!(table_[i].second > 0.0)) {
      throw std::invalid_argument("sigma must be > 0");
    }
    if (i > 0 && !(table_[i].first > table_[i - 1].first)) {
      throw std::invalid_argument("sigma table times must increase");
    }
  }
  constant_ = table_.front().second;
}

double SigmaSchedule::at(double t) const {
  if (table_.empty()) return constant_;
  if (t <= table_.front().first) return table_.front().second;
  if (t >= table_.back().first) return table_.back().second;
  const auto upper =
      std::upper_bound(table_.begin(), table_.end(), t,
                       [](double v, const auto& p) { return v < p.first; });
  const auto& [t1, s1] = *upper;
  const auto& [t0, s0] = *(upper - 1);
  return s0 + (t - t0) / (t1 - t0) * (s1 - s0);
}

SigmaSchedule SigmaSchedule::scaled(double factor) const {
  if (table_.empty()) return SigmaSchedule(constant_ * factor);
  auto table = table_;
  for (auto& p : table) p.second *= factor;
  return SigmaSchedule(std::move(table));
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kLess:
      return "<";
    case CompareOp::kLessEqual:
      return "<=";
    case CompareOp::kGreater:
      return ">";
    case CompareOp::kGreaterEqual:
      return ">=";
  }
  return "?";
}

CompareOp compare_op_from_string(std::string_view s) {
  if (s == "<") return CompareOp::kLess;
  if (s == "<=") return CompareOp::kLessEqual;
  if (s == ">") return CompareOp::kGreater;
  if (s == ">=") return CompareOp::kGreaterEqual;
  throw std::invalid_argument("unknown comparison '" + std::string(s) + "'");
}

bool ForbiddenRegion::contains(const SystemSpec& spec,
                               const SystemState& state,
                               double local_t) const {
  if (local_t < t_begin || local_t > t_end) return false;
  const double x = stb::coordinate(spec, state, coordinate);
  switch (op) {
    case CompareOp::kLess:
      return x < value;
    case CompareOp::kLessEqual:
      return x <= value;
    case CompareOp::kGreater:
      return x > value;
    case CompareOp::kGreaterEqual:
      return x >= value;
  }
  return false;
}

void SpacetimeBoundSet::set(const ChannelSpec& channel, SigmaSchedule sigma) {
  for (auto& bc : channels) {
    if (bc.channel.name == channel.name) {
      bc.sigma = std::move(sigma);
      return;
    }
  }
  channels.push_back({channel, std::move(sigma)});
}

const BoundChannel* SpacetimeBoundSet::find(std::string_view name) const {
  for (const auto& bc : channels) {
    if (bc.channel.name == name) return &bc;
  }
  return nullptr;
}

SpacetimeBoundSet SpacetimeBoundSet::widened() const {
  SpacetimeBoundSet out;
  for (const auto& bc : channels) {
    out.channels.push_back(
        {bc.channel, SigmaSchedule(std::numeric_limits<double>::infinity())});
  }
  return out;
}

double deviation(const ChannelSpec& channel, const ReferenceTrack& track,
                 const Event& e) {
  const SystemState ref = track.state_at(e.t);
  const auto i = static_cast<std::size_t>(channel.index);
  switch (channel.kind) {
    case DeviationKind::kPosition:
      return std::abs(e.state.q.at(i) - ref.q.at(i));
    case DeviationKind::kAngle:
      return std::abs(wrap_angle(e.state.q.at(i) - ref.q.at(i)));
    case DeviationKind::kVelocity:
      return std::abs(e.state.qdot.at(i) - ref.qdot.at(i));
    case DeviationKind::kEndPoint: {
      const auto a = bodies(track.spec(), e.state).at(i).pos;
      const auto b = bodies(track.spec(), ref).at(i).pos;
      return std::hypot(a[0] - b[0], a[1] - b[1]);
    }
  }
  return 0.0;
}

CheckResult check_event(const SpacetimeBoundSet& bounds,
                        const ReferenceTrack& track, const Event& e) {
  constexpr double kHorizonSlack = 1e-9;
  if (e.t < 0.0 || e.t > track.horizon() + kHorizonSlack) {
    throw std::out_of_range("event time " + std::to_string(e.t) +
                            " outside the bound horizon");
  }
  const double local = track.local_time(e.t);
  for (const auto& bc : bounds.channels) {
    const double sigma = bc.sigma.at(local);
    if (std::isinf(sigma)) continue;
    if (!(deviation(bc.channel, track, e) <= sigma)) {
      return CheckResult::Violated(bc.channel.name);
    }
  }
  for (const auto& region : bounds.forbidden) {
    if (region.contains(track.spec(), e.state, local)) {
      return CheckResult::Violated(region.name);
    }
  }
  return CheckResult::Within();
}

SpacetimeBoundSet preset_bounds(std::string_view name, SystemKind kind) {
  double scale = 0.0;
  if (name == "default") {
    scale = 1.0;
  } else if (name == "loose") {
    scale = 2.0;
  } else if (name == "tight") {
    scale = 0.5;
  } else {
    throw std::invalid_argument("unknown bound preset '" + std::string(name) +
                                "'");
  }
  SpacetimeBoundSet out;
  for (const auto& ch : system_channels(kind)) {
    switch (ch.kind) {
      case DeviationKind::kPosition:
        out.set(ch, SigmaSchedule(0.2 * scale));
        break;
      case DeviationKind::kAngle:
        out.set(ch, SigmaSchedule(0.7 * scale));
        break;
      case DeviationKind::kEndPoint:
        out.set(ch, SigmaSchedule(0.5 * scale));
        break;
      case DeviationKind::kVelocity:
        break;
    }
  }
  return out;
}

}  // namespace stb
