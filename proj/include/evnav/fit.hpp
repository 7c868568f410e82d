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

#include <span>

#include "evnav/types.hpp"

namespace evnav::fit {

struct LeastSquaresResult {
  Eigen::VectorXd coeffs;
  double r_squared = 0.0;
  double ssr = 0.0;  ///< sum of squared residuals
};

/// Ordinary least squares y ~ X c with a column-rank check. Throws FitError
/// listing the deficient column indices, or if rows < cols.
LeastSquaresResult least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct BatteryPowerSample {
  double tau_m, omega_m, P_b;
};

struct BatteryPowerFit {
  MotorPowerModel model;  ///< input model with c replaced by the fit (c6 = 0)
  double r_squared = 0.0;
};

/// Fits the battery-power polynomial over the basis
/// {1, w, t, w^2, w t, w^3}; the duplicated linear torque term is fixed to
/// zero since it is indistinguishable from c3. Requires >= 7 samples.
BatteryPowerFit fit_battery_power_model(std::span<const BatteryPowerSample> samples,
                                        const MotorPowerModel& base = {});

/// Fits the cubic torque envelope tau_max(v_x); rows are (v_x, tau_max).
LeastSquaresResult fit_torque_limit(std::span<const std::array<double, 2>> samples);

/// Fits the quadratic curvature polynomial rho(s_x); rows are (s_x, rho).
LeastSquaresResult fit_curvature(std::span<const std::array<double, 2>> samples);

}  // namespace evnav::fit
