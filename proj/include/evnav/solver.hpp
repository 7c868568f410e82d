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
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

namespace evnav::solver {

using TripletVec = std::vector<Eigen::Triplet<double>>;

/// Smooth NLP in the form
///   min f(z)  s.t.  c_E(z) = 0,  c_I(z) >= 0,  lb <= z <= ub,
/// described by callbacks with analytic first derivatives. Jacobians and the
/// Lagrangian Hessian are appended as triplets. The Hessian callback receives
/// the reduced multipliers and must return
///   H = grad^2 f + sum_j y_j grad^2 c_E_j - sum_i alpha_i grad^2 c_I_i
/// (any mix of triangles; the solver symmetrizes). Leave it empty to fall
/// back to a finite-difference Hessian (small problems only).
struct Nlp {
  Eigen::Index num_vars = 0;
  Eigen::Index num_eq = 0;
  Eigen::Index num_ineq = 0;
  Eigen::VectorXd lower;  ///< size num_vars; -inf allowed
  Eigen::VectorXd upper;  ///< size num_vars; +inf allowed

  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)> objective;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd*, TripletVec*)> equality;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd*, TripletVec*)> inequality;
  std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&,
                     TripletVec*)>
      lagrangian_hessian;
};

struct SolverConfig {
  double kkt_tol = 1e-6;
  int max_iter = 500;
  bool warm_start = true;
  double reg_floor = 1e-8;      ///< smallest nonzero primal regularization
  double mu_init = 0.1;         ///< initial barrier parameter (cold start)
  double mu_init_warm = 1e-3;   ///< initial barrier parameter (warm start)
  double bound_push = 1e-2;     ///< interior push for cold starts
  double bound_push_warm = 1e-6;
  int verbosity = 0;
  /// Optional per-iteration trace (iter, objective, residuals, mu, step).
  std::function<void(int iter, double objective, double stationarity, double feasibility,
                     double complementarity, double mu, double step)>
      trace;
};

enum class SolveStatus { converged, max_iter, numeric_error };

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;

  double max() const;
};

struct WarmStart {
  Eigen::VectorXd z;
  Eigen::VectorXd y_eq;
  Eigen::VectorXd alpha_ineq;
};

struct SolveResult {
  Eigen::VectorXd z;
  Eigen::VectorXd y_eq;        ///< equality multipliers
  Eigen::VectorXd alpha_ineq;  ///< inequality multipliers, >= 0
  Eigen::VectorXd z_lower;     ///< bound multipliers, >= 0
  Eigen::VectorXd z_upper;
  double objective = 0.0;
  SolveStatus status = SolveStatus::numeric_error;
  KktResiduals kkt;
  int iterations = 0;
  double wall_time_s = 0.0;
};

/// Interior-point solve from the given primal guess (optionally with warm
/// multipliers). Returns the best iterate found when the iteration budget is
/// exhausted.
SolveResult solve_nlp(const Nlp& nlp, const SolverConfig& cfg, const Eigen::VectorXd& z0,
                      const WarmStart* warm = nullptr);

/// Recomputes the first-order residuals of a candidate point from the
/// problem callbacks: stationarity of the reduced Lagrangian, worst primal
/// violation (equalities, inequalities and bounds) and worst complementarity
/// product.
KktResiduals check_kkt(const Nlp& nlp, const Eigen::VectorXd& z, const Eigen::VectorXd& y_eq,
                       const Eigen::VectorXd& alpha_ineq, const Eigen::VectorXd& z_lower,
                       const Eigen::VectorXd& z_upper);

}  // namespace evnav::solver
