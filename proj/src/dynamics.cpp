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

#include "evnav/dynamics.hpp"

#include <cmath>
#include <string>

#include "evnav/util.hpp"

namespace evnav {

void VehicleParams::validate() const {
  const struct {
    const char* name;
    double value;
  } positive[] = {{"m", m},     {"I_z", I_z},     {"l_F", l_F},     {"l_R", l_R},
                  {"C_F", C_F}, {"C_R", C_R},     {"N_d", N_d},     {"r_w", r_w},
                  {"eta_i", eta_i}, {"eta_b", eta_b}, {"E_b", E_b}};
  for (const auto& f : positive) {
    if (!(f.value > 0.0)) {
      throw ValidationError(std::string("vehicle parameter ") + f.name +
                            " must be strictly positive");
    }
  }
  if (eta_i > 1.0) throw ValidationError("eta_i must be <= 1");
  if (eta_b > 1.0) throw ValidationError("eta_b must be <= 1");
}

void Bounds::validate() const {
  const struct {
    const char* name;
    double lo, hi;
  } pairs[] = {{"a", a_min, a_max},           {"d", d_min, d_max},
               {"delta", delta_min, delta_max}, {"v_x", v_x_min, v_x_max},
               {"e_y", e_y_min, e_y_max},     {"gamma", gamma_min, gamma_max}};
  for (const auto& f : pairs) {
    if (!(f.lo <= f.hi)) {
      throw ValidationError(std::string("bounds for ") + f.name + " have min > max");
    }
  }
}

}  // namespace evnav

namespace evnav::dyn {

std::pair<double, double> slip_angles(const VehicleState& x, double delta,
                                      const VehicleParams& p) {
  const double v = std::max(x.v_x, kVelocityFloor);
  const double alpha_F = std::atan((x.v_y + p.l_F * x.r) / v) - delta;
  const double alpha_R = std::atan((x.v_y - p.l_R * x.r) / v);
  return {alpha_F, alpha_R};
}

std::pair<double, double> lateral_forces(double alpha_F, double alpha_R,
                                         const VehicleParams& p) {
  return {-2.0 * p.C_F * alpha_F, -2.0 * p.C_R * alpha_R};
}

std::pair<double, double> motor_operating_point(const VehicleState& x, double a,
                                                const VehicleParams& p) {
  return {p.torque_per_accel() * a, p.motor_speed_per_velocity() * x.v_x};
}

double battery_power(double tau_m, double omega_m, const MotorPowerModel& m) {
  const auto& c = m.c;
  return c[0] + c[1] * omega_m + c[2] * tau_m + c[3] * omega_m * omega_m +
         c[4] * omega_m * tau_m + c[5] * tau_m + c[6] * omega_m * omega_m * omega_m;
}

double power_loss(double tau_m, double omega_m, const MotorPowerModel& m) {
  return m.k_c * tau_m * tau_m + m.k_i * omega_m + m.k_w * omega_m * omega_m * omega_m +
         m.k_f * omega_m * omega_m + m.k_0;
}

void validate_power_loss(const MotorPowerModel& m, double tau_max, double omega_max) {
  constexpr int kGrid = 81;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const double tau = tau_max * i / (kGrid - 1);
      const double omega = omega_max * j / (kGrid - 1);
      const double loss = power_loss(tau, omega, m);
      if (!(loss >= 0.0)) {
        throw ValidationError("motor loss model is negative at tau_m=" +
                              std::to_string(tau) + ", omega_m=" + std::to_string(omega));
      }
    }
  }
}

double torque_limit(double v_x, const MotorPowerModel& m) {
  return ((m.xi[0] * v_x + m.xi[1]) * v_x + m.xi[2]) * v_x + m.xi[3];
}

double torque_limit_slope(double v_x, const MotorPowerModel& m) {
  return (3.0 * m.xi[0] * v_x + 2.0 * m.xi[1]) * v_x + m.xi[2];
}

double torque_limit_curvature(double v_x, const MotorPowerModel& m) {
  return 6.0 * m.xi[0] * v_x + 2.0 * m.xi[1];
}

double curvature(double s_x, const RoadModel& road) {
  return (road.k1 * s_x + road.k2) * s_x + road.k3;
}

double curvature_slope(double s_x, const RoadModel& road) {
  return 2.0 * road.k1 * s_x + road.k2;
}

StateVec continuous_dynamics(const VehicleState& x, const ControlInput& u,
                             const VehicleParams& p, const MotorPowerModel& m,
                             const RoadModel& road, KinematicsVariant variant) {
  const auto [alpha_F, alpha_R] = slip_angles(x, u.delta, p);
  const auto [F_Fy, F_Ry] = lateral_forces(alpha_F, alpha_R, p);
  const auto [tau_m, omega_m] = motor_operating_point(x, u.a, p);
  const double P_b = battery_power(tau_m, omega_m, m);
  const double rho = curvature(x.s_x, road);
  const double sin_d = std::sin(u.delta);
  const double cos_d = std::cos(u.delta);
  const double sin_psi = std::sin(x.psi);
  const double cos_psi = std::cos(x.psi);

  StateVec f;
  f[StateIdx::s_x] = x.v_x;
  if (variant == KinematicsVariant::standard) {
    f[StateIdx::e_y] = x.v_y + x.v_x * x.e_psi;
    f[StateIdx::e_psi] = x.r - x.v_x * rho;
  } else {
    f[StateIdx::e_y] = x.v_x + x.e_psi * x.v_y;
    f[StateIdx::e_psi] = x.v_y - x.v_x * rho;
  }
  f[StateIdx::v_x] = u.a + u.d - (F_Fy * sin_d - p.m * x.v_y * x.r) / p.m;
  f[StateIdx::v_y] = (F_Fy * cos_d + F_Ry - p.m * x.v_x * x.r) / p.m;
  f[StateIdx::r] = (F_Fy * p.l_F * cos_d - F_Ry * p.l_R) / p.I_z;
  f[StateIdx::gamma] = -p.eta_b * P_b / p.E_b;
  f[StateIdx::p_x] = x.v_x * cos_psi - x.v_y * sin_psi;
  f[StateIdx::p_y] = x.v_x * sin_psi + x.v_y * cos_psi;
  f[StateIdx::psi] = x.r;

  for (int i = 0; i < VehicleState::kDim; ++i) {
    if (!std::isfinite(f[i])) {
      throw NumericError("non-finite state derivative in component " + std::to_string(i), i);
    }
  }
  return f;
}

void dynamics_jacobians(const VehicleState& x, const ControlInput& u,
                        const VehicleParams& p, const MotorPowerModel& m,
                        const RoadModel& road, KinematicsVariant variant,
                        Eigen::Matrix<double, 10, 10>& df_dx,
                        Eigen::Matrix<double, 10, 3>& df_du) {
  df_dx.setZero();
  df_du.setZero();

  const double v = std::max(x.v_x, kVelocityFloor);
  const double dv_dvx = x.v_x > kVelocityFloor ? 1.0 : 0.0;

  // Slip-angle partials (alpha = atan(w) with w = (v_y +/- l r) / v).
  const double w_F = (x.v_y + p.l_F * x.r) / v;
  const double w_R = (x.v_y - p.l_R * x.r) / v;
  const double g_F = 1.0 / (1.0 + w_F * w_F);
  const double g_R = 1.0 / (1.0 + w_R * w_R);
  const double daF_dvy = g_F / v;
  const double daF_dr = g_F * p.l_F / v;
  const double daF_dvx = -g_F * (x.v_y + p.l_F * x.r) / (v * v) * dv_dvx;
  const double daR_dvy = g_R / v;
  const double daR_dr = -g_R * p.l_R / v;
  const double daR_dvx = -g_R * (x.v_y - p.l_R * x.r) / (v * v) * dv_dvx;

  const auto [alpha_F, alpha_R] = slip_angles(x, u.delta, p);
  const double F_Fy = -2.0 * p.C_F * alpha_F;
  const double dFF_dvx = -2.0 * p.C_F * daF_dvx;
  const double dFF_dvy = -2.0 * p.C_F * daF_dvy;
  const double dFF_dr = -2.0 * p.C_F * daF_dr;
  const double dFF_ddelta = 2.0 * p.C_F;  // d alpha_F / d delta = -1
  const double dFR_dvx = -2.0 * p.C_R * daR_dvx;
  const double dFR_dvy = -2.0 * p.C_R * daR_dvy;
  const double dFR_dr = -2.0 * p.C_R * daR_dr;

  const double sin_d = std::sin(u.delta);
  const double cos_d = std::cos(u.delta);
  const double sin_psi = std::sin(x.psi);
  const double cos_psi = std::cos(x.psi);
  const double rho = curvature(x.s_x, road);
  const double drho = curvature_slope(x.s_x, road);

  df_dx(StateIdx::s_x, StateIdx::v_x) = 1.0;

  if (variant == KinematicsVariant::standard) {
    df_dx(StateIdx::e_y, StateIdx::v_y) = 1.0;
    df_dx(StateIdx::e_y, StateIdx::v_x) = x.e_psi;
    df_dx(StateIdx::e_y, StateIdx::e_psi) = x.v_x;
    df_dx(StateIdx::e_psi, StateIdx::r) = 1.0;
    df_dx(StateIdx::e_psi, StateIdx::v_x) = -rho;
    df_dx(StateIdx::e_psi, StateIdx::s_x) = -x.v_x * drho;
  } else {
    df_dx(StateIdx::e_y, StateIdx::v_x) = 1.0;
    df_dx(StateIdx::e_y, StateIdx::e_psi) = x.v_y;
    df_dx(StateIdx::e_y, StateIdx::v_y) = x.e_psi;
    df_dx(StateIdx::e_psi, StateIdx::v_y) = 1.0;
    df_dx(StateIdx::e_psi, StateIdx::v_x) = -rho;
    df_dx(StateIdx::e_psi, StateIdx::s_x) = -x.v_x * drho;
  }

  // v_x' = a + d - (F_Fy sin(delta) - m v_y r) / m
  df_dx(StateIdx::v_x, StateIdx::v_x) = -sin_d / p.m * dFF_dvx;
  df_dx(StateIdx::v_x, StateIdx::v_y) = -sin_d / p.m * dFF_dvy + x.r;
  df_dx(StateIdx::v_x, StateIdx::r) = -sin_d / p.m * dFF_dr + x.v_y;
  df_du(StateIdx::v_x, InputIdx::a) = 1.0;
  df_du(StateIdx::v_x, InputIdx::d) = 1.0;
  df_du(StateIdx::v_x, InputIdx::delta) = -(dFF_ddelta * sin_d + F_Fy * cos_d) / p.m;

  // v_y' = (F_Fy cos(delta) + F_Ry - m v_x r) / m
  df_dx(StateIdx::v_y, StateIdx::v_x) = (cos_d * dFF_dvx + dFR_dvx) / p.m - x.r;
  df_dx(StateIdx::v_y, StateIdx::v_y) = (cos_d * dFF_dvy + dFR_dvy) / p.m;
  df_dx(StateIdx::v_y, StateIdx::r) = (cos_d * dFF_dr + dFR_dr) / p.m - x.v_x;
  df_du(StateIdx::v_y, InputIdx::delta) = (dFF_ddelta * cos_d - F_Fy * sin_d) / p.m;

  // r' = (F_Fy l_F cos(delta) - F_Ry l_R) / I_z
  df_dx(StateIdx::r, StateIdx::v_x) = (p.l_F * cos_d * dFF_dvx - p.l_R * dFR_dvx) / p.I_z;
  df_dx(StateIdx::r, StateIdx::v_y) = (p.l_F * cos_d * dFF_dvy - p.l_R * dFR_dvy) / p.I_z;
  df_dx(StateIdx::r, StateIdx::r) = (p.l_F * cos_d * dFF_dr - p.l_R * dFR_dr) / p.I_z;
  df_du(StateIdx::r, InputIdx::delta) =
      (p.l_F * (dFF_ddelta * cos_d - F_Fy * sin_d)) / p.I_z;

  // gamma' = -eta_b P_b(tau_m(a), omega_m(v_x)) / E_b
  const auto [tau_m, omega_m] = motor_operating_point(x, u.a, p);
  const double dPb_dtau = m.c[2] + m.c[4] * omega_m + m.c[5];
  const double dPb_domega =
      m.c[1] + 2.0 * m.c[3] * omega_m + m.c[4] * tau_m + 3.0 * m.c[6] * omega_m * omega_m;
  df_dx(StateIdx::gamma, StateIdx::v_x) =
      -p.eta_b / p.E_b * dPb_domega * p.motor_speed_per_velocity();
  df_du(StateIdx::gamma, InputIdx::a) = -p.eta_b / p.E_b * dPb_dtau * p.torque_per_accel();

  // Inertial kinematics.
  df_dx(StateIdx::p_x, StateIdx::v_x) = cos_psi;
  df_dx(StateIdx::p_x, StateIdx::v_y) = -sin_psi;
  df_dx(StateIdx::p_x, StateIdx::psi) = -x.v_x * sin_psi - x.v_y * cos_psi;
  df_dx(StateIdx::p_y, StateIdx::v_x) = sin_psi;
  df_dx(StateIdx::p_y, StateIdx::v_y) = cos_psi;
  df_dx(StateIdx::p_y, StateIdx::psi) = x.v_x * cos_psi - x.v_y * sin_psi;
  df_dx(StateIdx::psi, StateIdx::r) = 1.0;
}

VehicleState euler_step(const VehicleState& x, const ControlInput& u, double T_s,
                        const VehicleParams& p, const MotorPowerModel& m,
                        const RoadModel& road, KinematicsVariant variant) {
  if (!(T_s > 0.0)) throw ValidationError("euler_step requires T_s > 0");
  const StateVec f = continuous_dynamics(x, u, p, m, road, variant);
  return VehicleState::from_vec(x.vec() + T_s * f);
}

double lateral_dissipation(const VehicleState& x, const ControlInput& u,
                           const VehicleParams& p) {
  const auto [alpha_F, alpha_R] = slip_angles(x, u.delta, p);
  const auto [F_Fy, F_Ry] = lateral_forces(alpha_F, alpha_R, p);
  const double slip_F = x.v_y + p.l_F * x.r - x.v_x * u.delta;
  const double slip_R = x.v_y - p.l_R * x.r;
  return std::max(0.0, -(F_Fy * slip_F + F_Ry * slip_R));
}

}  // namespace evnav::dyn
