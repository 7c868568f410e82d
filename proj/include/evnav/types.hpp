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

#include <Eigen/Core>
#include <array>

namespace evnav {

using StateVec = Eigen::Matrix<double, 10, 1>;
using InputVec = Eigen::Matrix<double, 3, 1>;
using Vec2 = Eigen::Vector2d;

/// Column order of the state vector.
struct StateIdx {
  enum : int { s_x = 0, e_y, e_psi, v_x, v_y, r, gamma, p_x, p_y, psi };
};

/// Column order of the input vector.
struct InputIdx {
  enum : int { a = 0, delta, d };
};

/// Rigid-body and powertrain parameters of the controlled vehicle.
/// Defaults describe the reference rear-wheel-driven sedan used by the
/// shipped scenarios. E_b is stored in joules; scenario files configure kWh.
struct VehicleParams {
  double m = 1500.0;       ///< mass [kg]
  double I_z = 3000.0;     ///< yaw inertia [kg m^2]
  double l_F = 1.188;      ///< COG to front axle [m]
  double l_R = 1.512;      ///< COG to rear axle [m]
  double C_F = 6.3e4;      ///< front cornering stiffness [N/rad]
  double C_R = 6.3e4;      ///< rear cornering stiffness [N/rad]
  double N_d = 7.94;       ///< differential gear ratio
  double r_w = 0.33;       ///< wheel radius [m]
  double eta_i = 0.95;     ///< drivetrain efficiency
  double eta_b = 1.0;      ///< battery charge/discharge efficiency
  double E_b = 54.28 * 3.6e6;  ///< battery capacity [J]

  /// Motor torque per unit longitudinal acceleration command [N m s^2 / m].
  double torque_per_accel() const { return m * r_w / (eta_i * N_d); }
  /// Motor speed per unit longitudinal velocity [rad / m].
  double motor_speed_per_velocity() const { return N_d / r_w; }

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

/// Vehicle state: curvilinear track coordinates, body-frame velocities,
/// battery state-of-energy and inertial pose.
struct VehicleState {
  double s_x = 0.0;    ///< arc coordinate along road center-line [m]
  double e_y = 0.0;    ///< lateral deviation from center-line [m]
  double e_psi = 0.0;  ///< yaw relative to center-line tangent [rad]
  double v_x = 0.0;    ///< body-frame longitudinal velocity [m/s]
  double v_y = 0.0;    ///< body-frame lateral velocity [m/s]
  double r = 0.0;      ///< yaw rate [rad/s]
  double gamma = 1.0;  ///< state-of-energy, fraction of E_b in [0,1]
  double p_x = 0.0;    ///< inertial x position [m]
  double p_y = 0.0;    ///< inertial y position [m]
  double psi = 0.0;    ///< inertial yaw [rad]

  static constexpr int kDim = 10;

  StateVec vec() const {
    StateVec x;
    x << s_x, e_y, e_psi, v_x, v_y, r, gamma, p_x, p_y, psi;
    return x;
  }

  static VehicleState from_vec(const StateVec& x) {
    return VehicleState{x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8], x[9]};
  }

  Vec2 position() const { return Vec2(p_x, p_y); }
};

/// Control input triple: motor acceleration command (negative values
/// regenerate), steering angle and friction-brake deceleration.
struct ControlInput {
  double a = 0.0;      ///< longitudinal acceleration command [m/s^2]
  double delta = 0.0;  ///< steering angle [rad]
  double d = 0.0;      ///< braking deceleration [m/s^2], <= 0

  static constexpr int kDim = 3;

  InputVec vec() const { return InputVec(a, delta, d); }
  static ControlInput from_vec(const InputVec& u) { return ControlInput{u[0], u[1], u[2]}; }
};

/// Battery-power polynomial, motor loss model and motor torque envelope.
/// Defaults: fitted battery-power coefficients and torque-limit cubic of the
/// reference EV, plus representative PMSM loss coefficients (the loss model
/// is only needed to regenerate the fits).
struct MotorPowerModel {
  /// P_b = c1 + c2 w + c3 t + c4 w^2 + c5 w t + c6 t + c7 w^3, with
  /// t = motor torque [N m], w = motor speed [rad/s].
  std::array<double, 7> c = {2238e-14, -2.63e-14, 8.64e-14, 2.06e-19, 1.0, 0.0, 0.0};

  // P_loss = k_c t^2 + k_i w + k_w w^3 + k_f w^2 + k_0
  double k_c = 0.2;    ///< copper loss [W/(N m)^2]
  double k_i = 2.0;    ///< iron loss [W s/rad]
  double k_w = 1e-5;   ///< windage loss [W s^3/rad^3]
  double k_f = 1e-3;   ///< friction loss [W s^2/rad^2]
  double k_0 = 50.0;   ///< constant loss [W]

  /// tau_max(v_x) = xi1 v^3 + xi2 v^2 + xi3 v + xi4.
  std::array<double, 4> xi = {0.0036, -0.3661, 3.663, 454.2};
};

/// Road curvature as a polynomial of the arc coordinate:
/// rho(s) = k1 s^2 + k2 s + k3.
struct RoadModel {
  double k1 = 0.0;  ///< [1/m^3]
  double k2 = 0.0;  ///< [1/m^2]
  double k3 = 0.0;  ///< [1/m]
};

/// Box bounds on inputs and on the bounded state components.
struct Bounds {
  double a_min = -4.0, a_max = 7.4;          ///< [m/s^2]
  double d_min = -5.75, d_max = 0.0;         ///< [m/s^2]
  double delta_min = -0.5, delta_max = 0.5;  ///< [rad]
  double v_x_min = 0.0, v_x_max = 30.0;      ///< [m/s]
  double e_y_min = -4.0, e_y_max = 4.0;      ///< [m]
  double gamma_min = 0.1, gamma_max = 0.9;   ///< [-]

  /// Throws ValidationError if any min exceeds its max.
  void validate() const;
};

}  // namespace evnav
