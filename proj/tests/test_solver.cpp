#include <cmath>
#include <limits>

#include "doctest.h"
#include "evnav/solver.hpp"
#include "evnav/util.hpp"

using namespace evnav;
using solver::Nlp;
using solver::SolveStatus;
using solver::SolverConfig;
using solver::TripletVec;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Nlp unconstrained_quadratic(const Eigen::VectorXd& target) {
  Nlp nlp;
  nlp.num_vars = target.size();
  nlp.lower = Eigen::VectorXd::Constant(target.size(), -kInf);
  nlp.upper = Eigen::VectorXd::Constant(target.size(), kInf);
  nlp.objective = [target](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad != nullptr) *grad = z - target;
    return 0.5 * (z - target).squaredNorm();
  };
  nlp.lagrangian_hessian = [target](const Eigen::VectorXd&, const Eigen::VectorXd&,
                                    const Eigen::VectorXd&, TripletVec* H) {
    for (Eigen::Index i = 0; i < target.size(); ++i) H->emplace_back(i, i, 1.0);
  };
  return nlp;
}

}  // namespace

TEST_CASE("unconstrained quadratic converges to the analytic minimizer") {
  Eigen::VectorXd target(3);
  target << 1.0, -2.0, 0.5;
  const Nlp nlp = unconstrained_quadratic(target);
  SolverConfig cfg;
  cfg.kkt_tol = 1e-10;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Zero(3));
  CHECK(res.status == SolveStatus::converged);
  CHECK((res.z - target).lpNorm<Eigen::Infinity>() < 1e-8);

  // check_kkt reports zero residuals at the analytic minimizer.
  const auto kkt = solver::check_kkt(nlp, target, Eigen::VectorXd(), Eigen::VectorXd(),
                                     Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3));
  CHECK(kkt.stationarity == 0.0);
  CHECK(kkt.feasibility == 0.0);
  CHECK(kkt.complementarity == 0.0);
}

TEST_CASE("bound-constrained quadratic lands on the active box face") {
  Eigen::VectorXd target(2);
  target << 2.0, -3.0;
  Nlp nlp = unconstrained_quadratic(target);
  nlp.lower = Eigen::VectorXd::Zero(2);
  nlp.upper = Eigen::VectorXd::Ones(2);
  SolverConfig cfg;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Constant(2, 0.5));
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.z[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.z[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(res.z_upper[0] == doctest::Approx(1.0).epsilon(1e-4));  // gradient magnitude
}

TEST_CASE("equality-constrained quadratic") {
  Nlp nlp;
  nlp.num_vars = 2;
  nlp.num_eq = 1;
  nlp.lower = Eigen::VectorXd::Constant(2, -kInf);
  nlp.upper = Eigen::VectorXd::Constant(2, kInf);
  nlp.objective = [](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad != nullptr) *grad = z;
    return 0.5 * z.squaredNorm();
  };
  nlp.equality = [](const Eigen::VectorXd& z, Eigen::VectorXd* c, TripletVec* J) {
    if (c != nullptr) (*c)[0] = z[0] + z[1] - 1.0;
    if (J != nullptr) {
      J->emplace_back(0, 0, 1.0);
      J->emplace_back(0, 1, 1.0);
    }
  };
  nlp.lagrangian_hessian = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                              const Eigen::VectorXd&, TripletVec* H) {
    H->emplace_back(0, 0, 1.0);
    H->emplace_back(1, 1, 1.0);
  };
  SolverConfig cfg;
  cfg.kkt_tol = 1e-10;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Zero(2));
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.z[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(res.z[1] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(res.y_eq[0] == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("general inequality activates with the right multiplier") {
  Nlp nlp;
  nlp.num_vars = 2;
  nlp.num_ineq = 1;
  nlp.lower = Eigen::VectorXd::Constant(2, -kInf);
  nlp.upper = Eigen::VectorXd::Constant(2, kInf);
  nlp.objective = [](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad != nullptr) {
      (*grad)[0] = 2.0 * (z[0] + 1.0);
      (*grad)[1] = 2.0 * z[1];
    }
    return (z[0] + 1.0) * (z[0] + 1.0) + z[1] * z[1];
  };
  nlp.inequality = [](const Eigen::VectorXd& z, Eigen::VectorXd* c, TripletVec* J) {
    if (c != nullptr) (*c)[0] = z[0];
    if (J != nullptr) J->emplace_back(0, 0, 1.0);
  };
  nlp.lagrangian_hessian = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                              const Eigen::VectorXd&, TripletVec* H) {
    H->emplace_back(0, 0, 2.0);
    H->emplace_back(1, 1, 2.0);
  };
  SolverConfig cfg;
  cfg.kkt_tol = 1e-9;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Ones(2));
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.z[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(res.z[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(res.alpha_ineq[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("rosenbrock with finite-difference hessian fallback") {
  Nlp nlp;
  nlp.num_vars = 2;
  nlp.lower = Eigen::VectorXd::Constant(2, -kInf);
  nlp.upper = Eigen::VectorXd::Constant(2, kInf);
  nlp.objective = [](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    const double a = 1.0 - z[0];
    const double b = z[1] - z[0] * z[0];
    if (grad != nullptr) {
      (*grad)[0] = -2.0 * a - 400.0 * z[0] * b;
      (*grad)[1] = 200.0 * b;
    }
    return a * a + 100.0 * b * b;
  };
  SolverConfig cfg;
  cfg.kkt_tol = 1e-8;
  cfg.max_iter = 300;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Constant(2, -1.0));
  CHECK(res.status == SolveStatus::converged);
  CHECK(res.z[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(res.z[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("nonlinear inequality: linear objective over the unit disc") {
  Nlp nlp;
  nlp.num_vars = 2;
  nlp.num_ineq = 1;
  nlp.lower = Eigen::VectorXd::Constant(2, -kInf);
  nlp.upper = Eigen::VectorXd::Constant(2, kInf);
  nlp.objective = [](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    if (grad != nullptr) {
      (*grad)[0] = -1.0;
      (*grad)[1] = -1.0;
    }
    return -z[0] - z[1];
  };
  nlp.inequality = [](const Eigen::VectorXd& z, Eigen::VectorXd* c, TripletVec* J) {
    if (c != nullptr) (*c)[0] = 1.0 - z.squaredNorm();
    if (J != nullptr) {
      J->emplace_back(0, 0, -2.0 * z[0]);
      J->emplace_back(0, 1, -2.0 * z[1]);
    }
  };
  nlp.lagrangian_hessian = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                              const Eigen::VectorXd& alpha, TripletVec* H) {
    H->emplace_back(0, 0, 2.0 * alpha[0]);
    H->emplace_back(1, 1, 2.0 * alpha[0]);
  };
  SolverConfig cfg;
  cfg.kkt_tol = 1e-9;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Zero(2));
  CHECK(res.status == SolveStatus::converged);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(res.z[0] == doctest::Approx(inv_sqrt2).epsilon(1e-6));
  CHECK(res.z[1] == doctest::Approx(inv_sqrt2).epsilon(1e-6));
}

TEST_CASE("check_kkt double-entry against a manual recomputation") {
  Eigen::VectorXd target(2);
  target << 3.0, -1.0;
  Nlp nlp = unconstrained_quadratic(target);
  nlp.num_ineq = 1;
  nlp.inequality = [](const Eigen::VectorXd& z, Eigen::VectorXd* c, TripletVec* J) {
    if (c != nullptr) (*c)[0] = z[0] - z[1] - 1.0;
    if (J != nullptr) {
      J->emplace_back(0, 0, 1.0);
      J->emplace_back(0, 1, -1.0);
    }
  };
  Eigen::VectorXd z(2), alpha(1);
  z << 0.2, 0.7;
  alpha << 0.3;
  const auto kkt = solver::check_kkt(nlp, z, Eigen::VectorXd(), alpha,
                                     Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  // Stationarity: (z - target) - J' alpha.
  Eigen::Vector2d stat = z - target;
  stat[0] -= alpha[0];
  stat[1] += alpha[0];
  CHECK(kkt.stationarity == doctest::Approx(stat.lpNorm<Eigen::Infinity>()).epsilon(1e-15));
  const double ci = z[0] - z[1] - 1.0;
  CHECK(kkt.feasibility == doctest::Approx(-ci).epsilon(1e-15));
  CHECK(kkt.complementarity == doctest::Approx(std::abs(alpha[0] * ci)).epsilon(1e-15));
}

TEST_CASE("iteration budget is respected") {
  Eigen::VectorXd target = Eigen::VectorXd::Constant(4, 2.0);
  const Nlp nlp = unconstrained_quadratic(target);
  SolverConfig cfg;
  cfg.max_iter = 1;
  const auto res = solver::solve_nlp(nlp, cfg, Eigen::VectorXd::Zero(4));
  CHECK(res.iterations <= 1);
}
