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

#ifndef STB_DYNSYS_HPP_
#define STB_DYNSYS_HPP_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stb {

enum class SystemKind { kDoubleIntegrator1D, kPlanarPointMass, kPendulum };

// How policy actions reach the plant: directly as accelerations/torques, or
// as PD servo targets re-evaluated at every simulation substep.
enum class Actuation { kDirect, kPdServo };

std::string_view to_string(SystemKind kind);
SystemKind system_kind_from_string(std::string_view name);

struct SystemState {
  std::vector<double> q;     // m or rad
  std::vector<double> qdot;  // m/s or rad/s
  double t = 0.0;            // s

  bool finite() const;
  bool operator==(const SystemState&) const = default;
};

struct ControlInput {
  std::vector<double> u;  // m/s^2 (point masses) or N*m (pendulum)
};

struct SystemSpec {
  SystemKind kind = SystemKind::kDoubleIntegrator1D;
  double mass = 1.0;     // kg
  double length = 1.0;   // m, pendulum rod; inertia is mass * length^2
  double gravity = 0.0;  // m/s^2
  double damping = 0.0;  // N*m*s/rad, pendulum only
  std::vector<double> action_limits{2.0};
  double dt = 1.0 / 600.0;
  int control_substeps = 20;
  Actuation actuation = Actuation::kPdServo;
  double kp = 36.0;
  double kd = 12.0;

  int dof() const;
  double control_dt() const { return dt * control_substeps; }
  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const SystemSpec&) const = default;
};

// Defaults per system kind: a_max = 2 m/s^2 for the point masses, gravity
// only for the pendulum, critically damped servo gains.
SystemSpec default_spec(SystemKind kind);

// Generalized coordinate and velocity names, in state order.
std::vector<std::string> coordinate_names(SystemKind kind);
std::vector<std::string> velocity_names(SystemKind kind);

// Named scalar read-out of a state: any coordinate or velocity name, plus
// derived endpoint coordinates (tip_x, tip_y for the pendulum).
double coordinate(const SystemSpec& spec, const SystemState& state,
                  std::string_view name);
bool has_coordinate(SystemKind kind, std::string_view name);

struct PointMass {
  double mass = 0.0;
  std::array<double, 2> pos{};
  std::array<double, 2> vel{};
};

// Moving point masses of the system in world coordinates. The pendulum is
// modelled as a point mass at the rod tip.
std::vector<PointMass> bodies(const SystemSpec& spec, const SystemState& state);

ControlInput clamp_action(const SystemSpec& spec, const ControlInput& u);

double pd_torque(double q_target, double q, double qdot, double kp, double kd);

std::vector<double> acceleration(const SystemSpec& spec,
                                 const SystemState& state,
                                 std::span<const double> u);

// Semi-implicit Euler with u held for control_substeps substeps. The input is
// clamped to the actuator limits. Throws NumericalError on non-finite input.
SystemState step(const SystemSpec& spec, const SystemState& state,
                 const ControlInput& u);

// One control step with servo targets: the PD law is re-evaluated and
// clamped at every substep.
SystemState servo_step(const SystemSpec& spec, const SystemState& state,
                       std::span<const double> targets);

// Dispatches on spec.actuation.
SystemState control_step(const SystemSpec& spec, const SystemState& state,
                         std::span<const double> action);

}  // namespace stb

#endif  // STB_DYNSYS_HPP_
