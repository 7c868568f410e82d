// Shared fixtures for the unit and acceptance suites: synthetic data
// generators, random-state helpers and a reference certificate finder.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "evnav/avoidance.hpp"
#include "evnav/dynamics.hpp"
#include "evnav/fit.hpp"
#include "evnav/solver.hpp"
#include "evnav/types.hpp"
#include "evnav/util.hpp"

namespace evnav::testing {

/// Battery-power samples composed from the physical motor model
/// (shaft power plus losses) over the admissible envelope.
inline std::vector<fit::BatteryPowerSample> battery_samples(const MotorPowerModel& m,
                                                            int grid = 21) {
  std::vector<fit::BatteryPowerSample> out;
  out.reserve(static_cast<std::size_t>(grid) * grid);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double tau = 400.0 * i / (grid - 1);
      const double omega = 700.0 * j / (grid - 1);
      out.push_back({tau, omega, tau * omega + dyn::power_loss(tau, omega, m)});
    }
  }
  return out;
}

/// Constant-torque-then-constant-power envelope sampled over the speed range;
/// the cubic fit of this curve is the reference torque limit.
inline std::vector<std::array<double, 2>> torque_envelope_samples() {
  std::vector<std::array<double, 2>> out;
  constexpr double kStall = 450.0;
  constexpr double kBase = 12.0;
  for (double v = 0.5; v <= 30.0 + 1e-12; v += 0.25) {
    const double tau = v <= kBase ? kStall : kStall * kBase / v;
    out.push_back({v, tau});
  }
  return out;
}

inline VehicleState random_interior_state(Rng& rng) {
  VehicleState x;
  x.s_x = rng.uniform(-200.0, 200.0);
  x.e_y = rng.uniform(-3.5, 3.5);
  x.e_psi = rng.uniform(-0.4, 0.4);
  x.v_x = rng.uniform(1.0, 30.0);
  x.v_y = rng.uniform(-2.0, 2.0);
  x.r = rng.uniform(-0.5, 0.5);
  x.gamma = rng.uniform(0.2, 0.9);
  x.p_x = rng.uniform(-100.0, 100.0);
  x.p_y = rng.uniform(-100.0, 100.0);
  x.psi = rng.uniform(-3.0, 3.0);
  return x;
}

inline ControlInput random_input(Rng& rng) {
  ControlInput u;
  u.a = rng.uniform(-4.0, 7.4);
  u.delta = rng.uniform(-0.5, 0.5);
  u.d = rng.uniform(-5.75, 0.0);
  return u;
}

/// Optimal robust clearance certificate for one obstacle/uncertainty pair:
///   max (A p - b)' lambda - h' mu
///   s.t. A' lambda = G' mu, ||A' lambda|| <= 1, lambda >= 0, mu >= 0,
/// solved with the bundled interior-point method. The optimal value equals
/// the distance from p to the Minkowski-summed occupancy when positive.
struct CertificateSearch {
  double value = 0.0;
  Eigen::VectorXd lambda, mu;
  bool converged = false;
};

inline CertificateSearch best_certificate(const Vec2& p, const geom::HalfspaceMatrix& A,
                                          const Eigen::VectorXd& b,
                                          const geom::HalfspaceMatrix& G,
                                          const Eigen::VectorXd& h) {
  const Eigen::Index n = A.rows();
  const Eigen::Index q = G.rows();
  solver::Nlp nlp;
  nlp.num_vars = n + q;
  nlp.num_eq = 2;
  nlp.num_ineq = 1;
  nlp.lower = Eigen::VectorXd::Zero(n + q);
  nlp.upper = Eigen::VectorXd::Constant(n + q, std::numeric_limits<double>::infinity());
  const Eigen::VectorXd c = A * p - b;
  nlp.objective = [=](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad != nullptr) {
      grad->head(n) = -c;
      grad->tail(q) = h;
    }
    return -c.dot(z.head(n)) + h.dot(z.tail(q));
  };
  nlp.equality = [=](const Eigen::VectorXd& z, Eigen::VectorXd* ce, solver::TripletVec* J) {
    if (ce != nullptr) {
      *ce = A.transpose() * z.head(n) - G.transpose() * z.tail(q);
    }
    if (J != nullptr) {
      for (Eigen::Index i = 0; i < n; ++i)
        for (int d = 0; d < 2; ++d) J->emplace_back(d, i, A(i, d));
      for (Eigen::Index i = 0; i < q; ++i)
        for (int d = 0; d < 2; ++d) J->emplace_back(d, n + i, -G(i, d));
    }
  };
  const Eigen::Matrix2d M2 = Eigen::Matrix2d::Identity();
  nlp.inequality = [=](const Eigen::VectorXd& z, Eigen::VectorXd* ci, solver::TripletVec* J) {
    const Vec2 g = A.transpose() * z.head(n);
    if (ci != nullptr) (*ci)[0] = 1.0 - g.squaredNorm();
    if (J != nullptr) {
      const Eigen::VectorXd row = -2.0 * (A * M2 * g);
      for (Eigen::Index i = 0; i < n; ++i) J->emplace_back(0, i, row[i]);
    }
  };
  nlp.lagrangian_hessian = [=](const Eigen::VectorXd&, const Eigen::VectorXd&,
                               const Eigen::VectorXd& alpha, solver::TripletVec* H) {
    // Only the cone constraint is nonlinear: hessian = -alpha * (-2 A A').
    const Eigen::MatrixXd AAt = 2.0 * alpha[0] * (A * A.transpose());
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (AAt(i, j) != 0.0) H->emplace_back(i, j, AAt(i, j));
  };
  solver::SolverConfig cfg;
  cfg.kkt_tol = 1e-9;
  cfg.max_iter = 200;
  const Eigen::VectorXd z0 = Eigen::VectorXd::Constant(n + q, 0.1);
  const auto res = solver::solve_nlp(nlp, cfg, z0);
  CertificateSearch out;
  out.value = -res.objective;
  out.lambda = res.z.head(n);
  out.mu = res.z.tail(q);
  out.converged = res.status == solver::SolveStatus::converged;
  return out;
}

}  // namespace evnav::testing
