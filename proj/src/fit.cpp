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

#include "evnav/fit.hpp"

#include <Eigen/QR>
#include <string>

#include "evnav/util.hpp"

namespace evnav::fit {

LeastSquaresResult least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw FitError("design matrix and response size mismatch");
  if (X.rows() < X.cols()) {
    throw FitError("least squares needs at least " + std::to_string(X.cols()) +
                   " samples, got " + std::to_string(X.rows()));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < X.cols()) {
    // Columns past the rank in pivot order are the linearly dependent ones.
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < X.cols(); ++i) {
      if (!cols.empty()) cols += ", ";
      cols += std::to_string(perm[i]);
    }
    throw FitError("rank-deficient regressor matrix; dependent columns: " + cols);
  }
  LeastSquaresResult out;
  out.coeffs = qr.solve(y);
  const Eigen::VectorXd residual = y - X * out.coeffs;
  out.ssr = residual.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  out.r_squared = ss_tot > 0.0 ? 1.0 - out.ssr / ss_tot : 1.0;
  return out;
}

BatteryPowerFit fit_battery_power_model(std::span<const BatteryPowerSample> samples,
                                        const MotorPowerModel& base) {
  constexpr int kBasis = 6;  // {1, w, t, w^2, w t, w^3}
  if (samples.size() < 7) {
    throw FitError("battery power fit needs at least 7 samples, got " +
                   std::to_string(samples.size()));
  }
  Eigen::MatrixXd X(static_cast<Eigen::Index>(samples.size()), kBasis);
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double t = samples[i].tau_m;
    const double w = samples[i].omega_m;
    X.row(static_cast<Eigen::Index>(i)) << 1.0, w, t, w * w, w * t, w * w * w;
    y[static_cast<Eigen::Index>(i)] = samples[i].P_b;
  }
  const LeastSquaresResult ls = least_squares(X, y);
  BatteryPowerFit out;
  out.model = base;
  out.model.c = {ls.coeffs[0], ls.coeffs[1], ls.coeffs[2],
                 ls.coeffs[3], ls.coeffs[4], 0.0, ls.coeffs[5]};
  out.r_squared = ls.r_squared;
  return out;
}

namespace {

LeastSquaresResult fit_polynomial(std::span<const std::array<double, 2>> samples,
                                  int degree, bool highest_first) {
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd X(rows, degree + 1);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double v = samples[static_cast<std::size_t>(i)][0];
    double power = 1.0;
    for (int j = 0; j <= degree; ++j) {
      const int col = highest_first ? degree - j : j;
      X(i, col) = power;
      power *= v;
    }
    y[i] = samples[static_cast<std::size_t>(i)][1];
  }
  return least_squares(X, y);
}

}  // namespace

LeastSquaresResult fit_torque_limit(std::span<const std::array<double, 2>> samples) {
  // Coefficient order (xi1..xi4): v^3, v^2, v, 1.
  return fit_polynomial(samples, 3, /*highest_first=*/true);
}

LeastSquaresResult fit_curvature(std::span<const std::array<double, 2>> samples) {
  // Coefficient order (k1..k3): s^2, s, 1.
  return fit_polynomial(samples, 2, /*highest_first=*/true);
}

}  // namespace evnav::fit
