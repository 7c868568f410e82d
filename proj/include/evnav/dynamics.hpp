// Copyright 2026 The evnav Authors
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

#pragma once

#include <utility>

#include "evnav/types.hpp"

namespace evnav::dyn {

/// Velocity floor inside the arctan slip-angle terms; the model is singular
/// at v_x = 0 but the state bounds allow it.
inline constexpr double kVelocityFloor = 0.1;

/// Curvilinear kinematics selector. `standard` is the small-angle form
///   e_y' = v_y + v_x e_psi,  e_psi' = r - v_x rho(s_x);
/// `transposed` swaps the roles of v_x/v_y and drops the yaw-rate term:
///   e_y' = v_x + e_psi v_y,  e_psi' = v_y - v_x rho(s_x).
/// The transposed variant is kept selectable for fidelity comparisons only.
enum class KinematicsVariant { standard, transposed };

/// Front/rear tire slip angles [rad].
std::pair<double, double> slip_angles(const VehicleState& x, double delta,
                                      const VehicleParams& p);

/// Front/rear lateral tire forces [N] from slip angles.
std::pair<double, double> lateral_forces(double alpha_F, double alpha_R,
                                         const VehicleParams& p);

/// Motor torque [N m] and speed [rad/s] for a given acceleration command.
std::pair<double, double> motor_operating_point(const VehicleState& x, double a,
                                                const VehicleParams& p);

/// Battery power [W]; positive discharges, negative regenerates.
double battery_power(double tau_m, double omega_m, const MotorPowerModel& m);

/// Motor power loss [W].
double power_loss(double tau_m, double omega_m, const MotorPowerModel& m);

/// Grid-scans the loss surface on [0, tau_max] x [0, omega_max] and throws
/// ValidationError if it dips below zero anywhere. Called at scenario load.
void validate_power_loss(const MotorPowerModel& m, double tau_max = 400.0,
                         double omega_max = 700.0);

/// Motor torque envelope tau_max(v_x) [N m].
double torque_limit(double v_x, const MotorPowerModel& m);
/// d tau_max / d v_x.
double torque_limit_slope(double v_x, const MotorPowerModel& m);
/// d^2 tau_max / d v_x^2.
double torque_limit_curvature(double v_x, const MotorPowerModel& m);

/// Road curvature rho(s_x) [1/m] and its derivative.
double curvature(double s_x, const RoadModel& road);
double curvature_slope(double s_x, const RoadModel& road);

/// Continuous-time state derivative. Throws NumericError carrying the
/// offending component index if any entry is non-finite.
StateVec continuous_dynamics(const VehicleState& x, const ControlInput& u,
                             const VehicleParams& p, const MotorPowerModel& m,
                             const RoadModel& road,
                             KinematicsVariant variant = KinematicsVariant::standard);

/// Analytic Jacobians of continuous_dynamics with respect to state and input.
void dynamics_jacobians(const VehicleState& x, const ControlInput& u,
                        const VehicleParams& p, const MotorPowerModel& m,
                        const RoadModel& road, KinematicsVariant variant,
                        Eigen::Matrix<double, 10, 10>& df_dx,
                        Eigen::Matrix<double, 10, 3>& df_du);

/// Forward Euler step x + T_s f(x, u).
VehicleState euler_step(const VehicleState& x, const ControlInput& u, double T_s,
                        const VehicleParams& p, const MotorPowerModel& m,
                        const RoadModel& road,
                        KinematicsVariant variant = KinematicsVariant::standard);

/// Tire-slip dissipation -[F_Fy (v_y + l_F r - v_x delta) + F_Ry (v_y - l_R r)],
/// clipped below at zero [W].
double lateral_dissipation(const VehicleState& x, const ControlInput& u,
                           const VehicleParams& p);

}  // namespace evnav::dyn
