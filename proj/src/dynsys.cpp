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

#include "stb/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stb/error.hpp"

namespace stb {
namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

void require_finite(const SystemState& state, std::span<const double> u) {
  if (!state.finite()) {
    throw NumericalError("dynsys: non-finite state at t=" +
                         std::to_string(state.t));
  }
  if (!all_finite(u)) {
    throw NumericalError("dynsys: non-finite control input at t=" +
                         std::to_string(state.t));
  }
}

void integrate_substep(const SystemSpec& spec, SystemState& state,
                       std::span<const double> u) {
  const std::vector<double> acc = acceleration(spec, state, u);
  for (std::size_t i = 0; i < state.q.size(); ++i) {
    state.qdot[i] += acc[i] * spec.dt;
    state.q[i] += state.qdot[i] * spec.dt;
  }
  state.t += spec.dt;
}

}  // namespace

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDoubleIntegrator1D:
      return "double_integrator";
    case SystemKind::kPlanarPointMass:
      return "planar_point_mass";
    case SystemKind::kPendulum:
      return "pendulum";
  }
  return "unknown";
}

SystemKind system_kind_from_string(std::string_view name) {
  if (name == "double_integrator") return SystemKind::kDoubleIntegrator1D;
  if (name == "planar_point_mass") return SystemKind::kPlanarPointMass;
  if (name == "pendulum") return SystemKind::kPendulum;
  throw std::invalid_argument("unknown system kind '" + std::string(name) +
                              "'");
}

bool SystemState::finite() const {
  return all_finite(q) && all_finite(qdot) && std::isfinite(t);
}

int SystemSpec::dof() const {
  return kind == SystemKind::kPlanarPointMass ? 2 : 1;
}

void SystemSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (control_substeps < 1) {
    throw std::invalid_argument("control_substeps must be >= 1");
  }
  if (static_cast<int>(action_limits.size()) != dof()) {
    throw std::invalid_argument("action_limits needs one entry per DoF");
  }
  for (double limit : action_limits) {
    if (!(limit > 0.0)) {
      throw std::invalid_argument("action limits must be positive");
    }
  }
  if (!(mass > 0.0) || !(length > 0.0)) {
    throw std::invalid_argument("mass and length must be positive");
  }
  if (kp < 0.0 || kd < 0.0) {
    throw std::invalid_argument("servo gains must be non-negative");
  }
}

SystemSpec default_spec(SystemKind kind) {
  SystemSpec spec;
  spec.kind = kind;
  switch (kind) {
    case SystemKind::kDoubleIntegrator1D:
      spec.action_limits = {2.0};
      break;
    case SystemKind::kPlanarPointMass:
      spec.action_limits = {2.0, 2.0};
      break;
    case SystemKind::kPendulum:
      spec.gravity = 9.81;
      spec.action_limits = {20.0};
      break;
  }
  return spec;
}

std::vector<std::string> coordinate_names(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDoubleIntegrator1D:
      return {"x"};
    case SystemKind::kPlanarPointMass:
      return {"x", "y"};
    case SystemKind::kPendulum:
      return {"theta"};
  }
  return {};
}

std::vector<std::string> velocity_names(SystemKind kind) {
  switch (kind) {
    case SystemKind::kDoubleIntegrator1D:
      return {"v"};
    case SystemKind::kPlanarPointMass:
      return {"vx", "vy"};
    case SystemKind::kPendulum:
      return {"omega"};
  }
  return {};
}

bool has_coordinate(SystemKind kind, std::string_view name) {
  for (const auto& n : coordinate_names(kind)) {
    if (n == name) return true;
  }
  for (const auto& n : velocity_names(kind)) {
    if (n == name) return true;
  }
  return kind == SystemKind::kPendulum && (name == "tip_x" || name == "tip_y");
}

double coordinate(const SystemSpec& spec, const SystemState& state,
                  std::string_view name) {
  const auto coords = coordinate_names(spec.kind);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] == name) return state.q.at(i);
  }
  const auto vels = velocity_names(spec.kind);
  for (std::size_t i = 0; i < vels.size(); ++i) {
    if (vels[i] == name) return state.qdot.at(i);
  }
  if (spec.kind == SystemKind::kPendulum) {
    if (name == "tip_x") return spec.length * std::sin(state.q.at(0));
    if (name == "tip_y") return -spec.length * std::cos(state.q.at(0));
  }
  throw std::invalid_argument("unknown coordinate '" + std::string(name) +
                              "' for " + std::string(to_string(spec.kind)));
}

std::vector<PointMass> bodies(const SystemSpec& spec,
                              const SystemState& state) {
  switch (spec.kind) {
    case SystemKind::kDoubleIntegrator1D:
      return {PointMass{spec.mass, {state.q[0], 0.0}, {state.qdot[0], 0.0}}};
    case SystemKind::kPlanarPointMass:
      return {PointMass{spec.mass,
                        {state.q[0], state.q[1]},
                        {state.qdot[0], state.qdot[1]}}};
    case SystemKind::kPendulum: {
      const double th = state.q[0];
      const double w = state.qdot[0];
      const double l = spec.length;
      return {PointMass{spec.mass,
                        {l * std::sin(th), -l * std::cos(th)},
                        {l * w * std::cos(th), l * w * std::sin(th)}}};
    }
  }
  return {};
}

ControlInput clamp_action(const SystemSpec& spec, const ControlInput& u) {
  ControlInput out = u;
  const std::size_t n = std::min(out.u.size(), spec.action_limits.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double limit = spec.action_limits[i];
    out.u[i] = std::clamp(out.u[i], -limit, limit);
  }
  return out;
}

double pd_torque(double q_target, double q, double qdot, double kp,
                 double kd) {
  return kp * (q_target - q) - kd * qdot;
}

std::vector<double> acceleration(const SystemSpec& spec,
                                 const SystemState& state,
                                 std::span<const double> u) {
  switch (spec.kind) {
    case SystemKind::kDoubleIntegrator1D:
      return {u[0]};
    case SystemKind::kPlanarPointMass:
      return {u[0], u[1] - spec.gravity};
    case SystemKind::kPendulum: {
      const double inertia = spec.mass * spec.length * spec.length;
      const double gravity_torque =
          -spec.mass * spec.gravity * spec.length * std::sin(state.q[0]);
      return {(u[0] + gravity_torque - spec.damping * state.qdot[0]) /
              inertia};
    }
  }
  return {};
}

SystemState step(const SystemSpec& spec, const SystemState& state,
                 const ControlInput& u) {
  if (static_cast<int>(u.u.size()) != spec.dof()) {
    throw std::invalid_argument("control input has wrong dimension");
  }
  require_finite(state, u.u);
  const ControlInput clamped = clamp_action(spec, u);
  SystemState next = state;
  for (int s = 0; s < spec.control_substeps; ++s) {
    integrate_substep(spec, next, clamped.u);
  }
  if (!next.finite()) {
    throw NumericalError("dynsys: state diverged during step");
  }
  return next;
}

SystemState servo_step(const SystemSpec& spec, const SystemState& state,
                       std::span<const double> targets) {
  if (static_cast<int>(targets.size()) != spec.dof()) {
    throw std::invalid_argument("servo targets have wrong dimension");
  }
  require_finite(state, targets);
  SystemState next = state;
  ControlInput u{std::vector<double>(targets.size())};
  for (int s = 0; s < spec.control_substeps; ++s) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      u.u[i] = pd_torque(targets[i], next.q[i], next.qdot[i], spec.kp,
                         spec.kd);
    }
    integrate_substep(spec, next, clamp_action(spec, u).u);
  }
  if (!next.finite()) {
    throw NumericalError("dynsys: state diverged during servo step");
  }
  return next;
}

SystemState control_step(const SystemSpec& spec, const SystemState& state,
                         std::span<const double> action) {
  if (spec.actuation == Actuation::kPdServo) {
    return servo_step(spec, state, action);
  }
  return step(spec, state,
              ControlInput{std::vector<double>(action.begin(), action.end())});
}

}  // namespace stb
