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
//
// Primal-dual interior-point method with slacked inequalities, inertia
// correction via LDL^T pivot signs, fraction-to-boundary steps and an
// l1-penalty backtracking line search. First derivatives are analytic; the
// Lagrangian Hessian comes from the problem callback (or finite differences
// of the gradient for small problems).

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "evnav/solver.hpp"
#include "evnav/util.hpp"

namespace evnav::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSigmaCap = 1e10;   // bound-multiplier safeguard window
constexpr double kDualInit = 1.0;    // cap scale for initial bound duals

struct Evaluation {
  double f = 0.0;
  Eigen::VectorXd grad;
  Eigen::VectorXd c_eq, c_in;
  Eigen::SparseMatrix<double> J_eq, J_in;
  bool finite = true;
};

struct Iterate {
  Eigen::VectorXd z, w;        // primal variables and inequality slacks
  Eigen::VectorXd y, yc;       // multipliers: c_E = 0 and c_I - w = 0
  Eigen::VectorXd zl, zu, zw;  // bound duals (>= 0)
};

class IpmSolver {
 public:
  IpmSolver(const Nlp& nlp, const SolverConfig& cfg) : nlp_(nlp), cfg_(cfg) {
    n_ = nlp.num_vars;
    me_ = nlp.num_eq;
    mi_ = nlp.num_ineq;
    lb_ = nlp.lower.size() == n_ ? nlp.lower : Eigen::VectorXd::Constant(n_, -kInf);
    ub_ = nlp.upper.size() == n_ ? nlp.upper : Eigen::VectorXd::Constant(n_, kInf);
    // Relax the bounds infinitesimally so points pinned to a bound by an
    // equality constraint keep a strictly feasible neighborhood.
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (std::isfinite(lb_[i])) lb_[i] -= 1e-8 * std::max(1.0, std::abs(lb_[i]));
      if (std::isfinite(ub_[i])) ub_[i] += 1e-8 * std::max(1.0, std::abs(ub_[i]));
    }
  }

  SolveResult run(const Eigen::VectorXd& z0, const WarmStart* warm);

 private:
  bool evaluate(const Eigen::VectorXd& z, Evaluation& ev, bool need_derivatives) const;
  void init_iterate(const Eigen::VectorXd& z0, const WarmStart* warm, double push);
  void hessian_triplets(const Eigen::VectorXd& z, TripletVec& out) const;
  double barrier_objective(const Evaluation& ev, const Iterate& it) const;
  double constraint_violation_l1(const Evaluation& ev, const Iterate& it) const;
  KktResiduals residuals(const Evaluation& ev, const Iterate& it, double mu,
                         bool scaled) const;

  const Nlp& nlp_;
  const SolverConfig& cfg_;
  Eigen::Index n_ = 0, me_ = 0, mi_ = 0;
  Eigen::VectorXd lb_, ub_;
  Iterate it_;
  double mu_ = 0.1;
  double delta_last_ = 0.0;
  double delta_pending_ = 0.0;  // forced regularization after a failed search
  double theta_cap_ = -1.0;     // upper filter envelope on infeasibility
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

bool IpmSolver::evaluate(const Eigen::VectorXd& z, Evaluation& ev,
                         bool need_derivatives) const {
  try {
    Eigen::VectorXd* grad = need_derivatives ? &ev.grad : nullptr;
    if (grad != nullptr) grad->setZero(n_);
    ev.f = nlp_.objective(z, grad);
    TripletVec jt;
    if (me_ > 0) {
      ev.c_eq.setZero(me_);
      jt.clear();
      nlp_.equality(z, &ev.c_eq, need_derivatives ? &jt : nullptr);
      if (need_derivatives) {
        ev.J_eq.resize(me_, n_);
        ev.J_eq.setFromTriplets(jt.begin(), jt.end());
      }
    } else {
      ev.c_eq.resize(0);
      ev.J_eq.resize(0, n_);
    }
    if (mi_ > 0) {
      ev.c_in.setZero(mi_);
      jt.clear();
      nlp_.inequality(z, &ev.c_in, need_derivatives ? &jt : nullptr);
      if (need_derivatives) {
        ev.J_in.resize(mi_, n_);
        ev.J_in.setFromTriplets(jt.begin(), jt.end());
      }
    } else {
      ev.c_in.resize(0);
      ev.J_in.resize(0, n_);
    }
  } catch (const std::exception&) {
    ev.finite = false;
    return false;
  }
  ev.finite = std::isfinite(ev.f) && ev.c_eq.allFinite() && ev.c_in.allFinite() &&
              (ev.grad.size() == 0 || ev.grad.allFinite());
  return ev.finite;
}

void IpmSolver::init_iterate(const Eigen::VectorXd& z0, const WarmStart* warm,
                             double push) {
  it_.z = z0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    const bool has_lb = std::isfinite(lb_[i]);
    const bool has_ub = std::isfinite(ub_[i]);
    if (has_lb && has_ub) {
      const double width = ub_[i] - lb_[i];
      const double pl = std::min(push * std::max(1.0, std::abs(lb_[i])), 0.5 * width);
      const double pu = std::min(push * std::max(1.0, std::abs(ub_[i])), 0.5 * width);
      it_.z[i] = std::clamp(it_.z[i], lb_[i] + pl, ub_[i] - pu);
    } else if (has_lb) {
      it_.z[i] = std::max(it_.z[i], lb_[i] + push * std::max(1.0, std::abs(lb_[i])));
    } else if (has_ub) {
      it_.z[i] = std::min(it_.z[i], ub_[i] - push * std::max(1.0, std::abs(ub_[i])));
    }
  }

  Evaluation ev;
  evaluate(it_.z, ev, false);
  it_.w.resize(mi_);
  for (Eigen::Index i = 0; i < mi_; ++i) {
    it_.w[i] = std::max(ev.c_in.size() > 0 ? ev.c_in[i] : 1.0, push);
  }

  it_.y = (warm != nullptr && warm->y_eq.size() == me_) ? warm->y_eq
                                                        : Eigen::VectorXd::Zero(me_);
  it_.zw.resize(mi_);
  if (warm != nullptr && warm->alpha_ineq.size() == mi_) {
    for (Eigen::Index i = 0; i < mi_; ++i) it_.zw[i] = std::max(warm->alpha_ineq[i], 1e-8);
  } else {
    for (Eigen::Index i = 0; i < mi_; ++i) it_.zw[i] = std::min(kDualInit, mu_ / it_.w[i]);
  }
  it_.yc = -it_.zw;

  it_.zl.setZero(n_);
  it_.zu.setZero(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (std::isfinite(lb_[i])) {
      it_.zl[i] = std::clamp(mu_ / (it_.z[i] - lb_[i]), 1e-8, 1e8);
    }
    if (std::isfinite(ub_[i])) {
      it_.zu[i] = std::clamp(mu_ / (ub_[i] - it_.z[i]), 1e-8, 1e8);
    }
  }
}

void IpmSolver::hessian_triplets(const Eigen::VectorXd& z, TripletVec& out) const {
  out.clear();
  if (nlp_.lagrangian_hessian) {
    Eigen::VectorXd alpha = -it_.yc;
    nlp_.lagrangian_hessian(z, it_.y, alpha, &out);
    return;
  }
  if (n_ > 400) {  // no curvature information: fall back to identity scaling
    for (Eigen::Index i = 0; i < n_; ++i) out.emplace_back(i, i, 1.0);
    return;
  }
  // Forward differences of the Lagrangian gradient.
  auto lag_grad = [&](const Eigen::VectorXd& zz, Eigen::VectorXd& g) {
    Evaluation ev;
    if (!evaluate(zz, ev, true)) throw NumericError("non-finite model evaluation", -1);
    g = ev.grad;
    if (me_ > 0) g += ev.J_eq.transpose() * it_.y;
    if (mi_ > 0) g += ev.J_in.transpose() * it_.yc;
  };
  Eigen::VectorXd g0, gj;
  lag_grad(z, g0);
  Eigen::MatrixXd H(n_, n_);
  Eigen::VectorXd zz = z;
  for (Eigen::Index j = 0; j < n_; ++j) {
    const double eps = 1e-7 * std::max(1.0, std::abs(z[j]));
    zz[j] = z[j] + eps;
    lag_grad(zz, gj);
    zz[j] = z[j];
    H.col(j) = (gj - g0) / eps;
  }
  for (Eigen::Index i = 0; i < n_; ++i) {
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double v = 0.5 * (H(i, j) + H(j, i));
      if (v != 0.0) out.emplace_back(i, j, v);
    }
  }
}

double IpmSolver::barrier_objective(const Evaluation& ev, const Iterate& it) const {
  double phi = ev.f;
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (std::isfinite(lb_[i])) phi -= mu_ * std::log(it.z[i] - lb_[i]);
    if (std::isfinite(ub_[i])) phi -= mu_ * std::log(ub_[i] - it.z[i]);
  }
  for (Eigen::Index i = 0; i < mi_; ++i) phi -= mu_ * std::log(it.w[i]);
  return phi;
}

double IpmSolver::constraint_violation_l1(const Evaluation& ev, const Iterate& it) const {
  double v = 0.0;
  if (me_ > 0) v += ev.c_eq.lpNorm<1>();
  if (mi_ > 0) v += (ev.c_in - it.w).lpNorm<1>();
  return v;
}

KktResiduals IpmSolver::residuals(const Evaluation& ev, const Iterate& it, double mu,
                                  bool scaled) const {
  Eigen::VectorXd r1 = ev.grad;
  if (me_ > 0) r1 += ev.J_eq.transpose() * it.y;
  if (mi_ > 0) r1 += ev.J_in.transpose() * it.yc;
  r1 -= it.zl;
  r1 += it.zu;

  double stat = r1.lpNorm<Eigen::Infinity>();
  if (mi_ > 0) stat = std::max(stat, (-it.yc - it.zw).lpNorm<Eigen::Infinity>());

  double feas = 0.0;
  if (me_ > 0) feas = ev.c_eq.lpNorm<Eigen::Infinity>();
  if (mi_ > 0) feas = std::max(feas, (ev.c_in - it.w).lpNorm<Eigen::Infinity>());

  double compl_res = 0.0;
  double mult_sum = 0.0;
  int mult_count = 0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (std::isfinite(lb_[i])) {
      compl_res = std::max(compl_res, std::abs(it.zl[i] * (it.z[i] - lb_[i]) - mu));
      mult_sum += it.zl[i];
      ++mult_count;
    }
    if (std::isfinite(ub_[i])) {
      compl_res = std::max(compl_res, std::abs(it.zu[i] * (ub_[i] - it.z[i]) - mu));
      mult_sum += it.zu[i];
      ++mult_count;
    }
  }
  for (Eigen::Index i = 0; i < mi_; ++i) {
    compl_res = std::max(compl_res, std::abs(it.zw[i] * it.w[i] - mu));
    mult_sum += it.zw[i];
    ++mult_count;
  }

  KktResiduals out{stat, feas, compl_res};
  if (scaled) {
    const double s_max = 100.0;
    const double y_sum = it.y.lpNorm<1>() + it.yc.lpNorm<1>() + mult_sum;
    const int y_count = static_cast<int>(me_ + mi_) + mult_count;
    const double s_d =
        std::max(s_max, y_count > 0 ? y_sum / y_count : 0.0) / s_max;
    const double s_c =
        std::max(s_max, mult_count > 0 ? mult_sum / mult_count : 0.0) / s_max;
    out.stationarity /= s_d;
    out.complementarity /= s_c;
  }
  return out;
}

SolveResult IpmSolver::run(const Eigen::VectorXd& z0, const WarmStart* warm) {
  const auto t_start = std::chrono::steady_clock::now();
  SolveResult result;
  result.status = SolveStatus::max_iter;

  const bool warm_started = warm != nullptr && cfg_.warm_start;
  mu_ = warm_started ? cfg_.mu_init_warm : cfg_.mu_init;
  const double push = warm_started ? cfg_.bound_push_warm : cfg_.bound_push;
  init_iterate(warm_started && warm->z.size() == n_ ? warm->z : z0, warm, push);

  Evaluation ev;
  if (!evaluate(it_.z, ev, true)) {
    result.status = SolveStatus::numeric_error;
    result.z = it_.z;
    return result;
  }

  delta_last_ = 0.0;
  int iter = 0;

  for (; iter < cfg_.max_iter; ++iter) {
    const KktResiduals err0 = residuals(ev, it_, 0.0, true);
    if (err0.max() <= cfg_.kkt_tol) {
      result.status = SolveStatus::converged;
      break;
    }
    // Barrier decrease (monotone Fiacco-McCormick).
    while (mu_ > cfg_.kkt_tol / 11.0 &&
           residuals(ev, it_, mu_, true).max() <= 10.0 * mu_) {
      mu_ = std::max(cfg_.kkt_tol / 11.0, std::min(0.2 * mu_, std::pow(mu_, 1.5)));
    }

    // Barrier scaling terms.
    Eigen::VectorXd sigma_x = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd grad_bar = ev.grad;  // gradient of the barrier objective
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (std::isfinite(lb_[i])) {
        const double sl = it_.z[i] - lb_[i];
        sigma_x[i] += it_.zl[i] / sl;
        grad_bar[i] -= mu_ / sl;
      }
      if (std::isfinite(ub_[i])) {
        const double su = ub_[i] - it_.z[i];
        sigma_x[i] += it_.zu[i] / su;
        grad_bar[i] += mu_ / su;
      }
    }
    Eigen::VectorXd sigma_w(mi_), r2t(mi_), r4(mi_);
    for (Eigen::Index i = 0; i < mi_; ++i) {
      sigma_w[i] = it_.zw[i] / it_.w[i];
      r2t[i] = -it_.yc[i] - mu_ / it_.w[i];
      r4[i] = ev.c_in[i] - it_.w[i];
    }

    // r~1 = grad_bar + J_E' y + J_I' yc.
    Eigen::VectorXd r1t = grad_bar;
    if (me_ > 0) r1t += ev.J_eq.transpose() * it_.y;
    if (mi_ > 0) r1t += ev.J_in.transpose() * it_.yc;

    TripletVec hess;
    hessian_triplets(it_.z, hess);

    const double delta_c = 1e-8;
    Eigen::VectorXd d_scale(mi_), sigma_hat(mi_);
    for (Eigen::Index i = 0; i < mi_; ++i) {
      d_scale[i] = 1.0 / (1.0 + delta_c * sigma_w[i]);
      sigma_hat[i] = sigma_w[i] * d_scale[i];
    }

    Eigen::SparseMatrix<double> W(n_, n_);
    {
      TripletVec sym;
      sym.reserve(hess.size() * 2);
      for (const auto& t : hess) {
        sym.emplace_back(t.row(), t.col(), 0.5 * t.value());
        sym.emplace_back(t.col(), t.row(), 0.5 * t.value());
      }
      W.setFromTriplets(sym.begin(), sym.end());
    }
    Eigen::SparseMatrix<double> K = W;
    if (mi_ > 0) {
      const Eigen::SparseMatrix<double> JtSJ =
          ev.J_in.transpose() * sigma_hat.asDiagonal() * ev.J_in;
      K += JtSJ;
    }

    // Newton direction with inertia correction on the primal regularization.
    const Eigen::Index dim = n_ + me_;
    Eigen::VectorXd rhs(dim);
    Eigen::VectorXd rhs1 = -r1t;
    if (mi_ > 0) {
      rhs1 -= ev.J_in.transpose() *
              (d_scale.array() * (sigma_w.array() * r4.array() + r2t.array())).matrix();
    }
    rhs.head(n_) = rhs1;
    if (me_ > 0) rhs.tail(me_) = -ev.c_eq;

    Eigen::VectorXd dz, dy;
    double delta = std::max(delta_pending_, cfg_.reg_floor);
    delta_pending_ = 0.0;
    bool direction_ok = false;
    for (int attempt = 0; attempt < 30 && !direction_ok; ++attempt) {
      Eigen::SparseMatrix<double> kkt(dim, dim);
      {
        TripletVec trip;
        trip.reserve(static_cast<std::size_t>(K.nonZeros()) +
                     2 * static_cast<std::size_t>(me_ > 0 ? ev.J_eq.nonZeros() : 0) +
                     static_cast<std::size_t>(dim));
        for (int col = 0; col < K.outerSize(); ++col) {
          for (Eigen::SparseMatrix<double>::InnerIterator itK(K, col); itK; ++itK) {
            trip.emplace_back(itK.row(), itK.col(), itK.value());
          }
        }
        for (Eigen::Index i = 0; i < n_; ++i) {
          trip.emplace_back(i, i, sigma_x[i] + delta);
        }
        if (me_ > 0) {
          for (int col = 0; col < ev.J_eq.outerSize(); ++col) {
            for (Eigen::SparseMatrix<double>::InnerIterator itJ(ev.J_eq, col); itJ; ++itJ) {
              trip.emplace_back(n_ + itJ.row(), itJ.col(), itJ.value());
              trip.emplace_back(itJ.col(), n_ + itJ.row(), itJ.value());
            }
          }
          for (Eigen::Index i = 0; i < me_; ++i) {
            trip.emplace_back(n_ + i, n_ + i, -delta_c);
          }
        }
        kkt.setFromTriplets(trip.begin(), trip.end());
      }

      // The Hessian sparsity depends on which multipliers are active, so the
      // pattern must be re-analyzed before every factorization.
      ldlt_.analyzePattern(kkt);
      ldlt_.factorize(kkt);
      bool ok = ldlt_.info() == Eigen::Success;
      if (ok) {
        const auto& D = ldlt_.vectorD();
        Eigen::Index negatives = 0;
        for (Eigen::Index i = 0; i < D.size(); ++i) {
          if (!std::isfinite(D[i]) || D[i] == 0.0) {
            ok = false;
            break;
          }
          if (D[i] < 0.0) ++negatives;
        }
        if (ok && negatives != me_) ok = false;
      }
      if (ok) {
        Eigen::VectorXd sol = ldlt_.solve(rhs);
        // One step of iterative refinement; the always-on regularization
        // keeps pivots tiny on cost-free directions.
        sol += ldlt_.solve(rhs - kkt * sol);
        if (sol.allFinite()) {
          dz = sol.head(n_);
          if (me_ > 0) dy = sol.tail(me_);
          direction_ok = true;
          delta_last_ = delta;
          break;
        }
      }
      delta = delta <= cfg_.reg_floor
                  ? std::max(1e-4, delta_last_ > 0.0 ? delta_last_ / 3.0 : 1e-4)
                  : delta * 8.0;
      if (delta > 1e13) break;
    }
    if (!direction_ok) {
      result.status = SolveStatus::numeric_error;
      break;
    }

    // Recover the remaining direction components.
    Eigen::VectorXd dw(mi_), dyc(mi_), dzw(mi_);
    if (mi_ > 0) {
      const Eigen::VectorXd Jdz = ev.J_in * dz;
      for (Eigen::Index i = 0; i < mi_; ++i) {
        dyc[i] = d_scale[i] * (sigma_w[i] * (Jdz[i] + r4[i]) + r2t[i]);
        dw[i] = Jdz[i] - delta_c * dyc[i] + r4[i];
        dzw[i] = (mu_ - it_.zw[i] * it_.w[i]) / it_.w[i] - sigma_w[i] * dw[i];
      }
    }
    Eigen::VectorXd dzl = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd dzu = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (std::isfinite(lb_[i])) {
        const double sl = it_.z[i] - lb_[i];
        dzl[i] = (mu_ - it_.zl[i] * sl) / sl - it_.zl[i] / sl * dz[i];
      }
      if (std::isfinite(ub_[i])) {
        const double su = ub_[i] - it_.z[i];
        dzu[i] = (mu_ - it_.zu[i] * su) / su + it_.zu[i] / su * dz[i];
      }
    }

    // Fraction-to-boundary limits.
    const double tau = std::max(0.99, 1.0 - mu_);
    double alpha_p = 1.0, alpha_d = 1.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (std::isfinite(lb_[i]) && dz[i] < 0.0) {
        alpha_p = std::min(alpha_p, -tau * (it_.z[i] - lb_[i]) / dz[i]);
      }
      if (std::isfinite(ub_[i]) && dz[i] > 0.0) {
        alpha_p = std::min(alpha_p, tau * (ub_[i] - it_.z[i]) / dz[i]);
      }
      if (std::isfinite(lb_[i]) && dzl[i] < 0.0) {
        alpha_d = std::min(alpha_d, -tau * it_.zl[i] / dzl[i]);
      }
      if (std::isfinite(ub_[i]) && dzu[i] < 0.0) {
        alpha_d = std::min(alpha_d, -tau * it_.zu[i] / dzu[i]);
      }
    }
    for (Eigen::Index i = 0; i < mi_; ++i) {
      if (dw[i] < 0.0) alpha_p = std::min(alpha_p, -tau * it_.w[i] / dw[i]);
      if (dzw[i] < 0.0) alpha_d = std::min(alpha_d, -tau * it_.zw[i] / dzw[i]);
    }

    // Filter-style acceptance: a trial point must improve either the
    // constraint violation or the barrier objective (with an Armijo test on
    // the barrier when the iterate is nearly feasible).
    const double theta0 = constraint_violation_l1(ev, it_);
    const double phi0 = barrier_objective(ev, it_);
    double dphi = grad_bar.dot(dz);
    for (Eigen::Index i = 0; i < mi_; ++i) dphi -= mu_ / it_.w[i] * dw[i];
    if (theta_cap_ < 0.0) theta_cap_ = 1e4 * std::max(1.0, theta0);

    auto filter_ok = [&](double theta, double phi, double alpha) {
      if (!std::isfinite(phi) || theta > theta_cap_) return false;
      const bool f_type =
          dphi < 0.0 && alpha * std::pow(-dphi, 2.3) > std::pow(theta0, 1.1);
      if (f_type) {
        return phi <= phi0 + 1e-8 * std::abs(phi0) + 1e-4 * alpha * dphi;
      }
      return theta <= (1.0 - 1e-5) * theta0 + 1e-15 ||
             phi <= phi0 - 1e-5 * theta0 + 1e-8 * std::abs(phi0);
    };

    double alpha = alpha_p;
    bool accepted = false;
    bool soc_used = false;
    Eigen::VectorXd dy_soc;
    Iterate trial = it_;
    Evaluation trial_ev;
    for (int ls = 0; ls < 45; ++ls) {
      trial.z = it_.z + alpha * dz;
      trial.w = it_.w + alpha * dw;
      soc_used = false;
      if (evaluate(trial.z, trial_ev, false)) {
        const double theta = constraint_violation_l1(trial_ev, trial);
        const double phi = barrier_objective(trial_ev, trial);
        if (cfg_.verbosity >= 3) {
          log::write(log::Level::error,
                     "  ls alpha=" + std::to_string(alpha) + " theta=" + std::to_string(theta) +
                         " (theta0=" + std::to_string(theta0) + ") phi=" + std::to_string(phi) +
                         " (phi0=" + std::to_string(phi0) + ", dphi=" + std::to_string(dphi) + ")");
        }
        if (filter_ok(theta, phi, alpha)) {
          accepted = true;
          break;
        }
        // Second-order correction on the first rejection: re-solve for the
        // constraint residual measured at the trial point, reusing the
        // factorization, and retry the corrected point.
        if (ls == 0 && theta >= theta0) {
          Eigen::VectorXd r4_t(mi_), ce_t = trial_ev.c_eq;
          for (Eigen::Index i = 0; i < mi_; ++i) {
            r4_t[i] = trial_ev.c_in[i] - trial.w[i];
          }
          Eigen::VectorXd rhs_soc = Eigen::VectorXd::Zero(dim);
          if (mi_ > 0) {
            rhs_soc.head(n_) =
                -(ev.J_in.transpose() *
                  (d_scale.array() * sigma_w.array() * r4_t.array()).matrix());
          }
          if (me_ > 0) rhs_soc.tail(me_) = -ce_t;
          Eigen::VectorXd sol = ldlt_.solve(rhs_soc);
          if (sol.allFinite()) {
            const Eigen::VectorXd dz_c = sol.head(n_);
            Eigen::VectorXd dyc_c(mi_), dw_c(mi_);
            if (mi_ > 0) {
              const Eigen::VectorXd Jdz_c = ev.J_in * dz_c;
              for (Eigen::Index i = 0; i < mi_; ++i) {
                dyc_c[i] = d_scale[i] * sigma_w[i] * (Jdz_c[i] + r4_t[i]);
                dw_c[i] = Jdz_c[i] - delta_c * dyc_c[i] + r4_t[i];
              }
            }
            // Keep the corrected point strictly interior.
            double a_c = 1.0;
            for (Eigen::Index i = 0; i < n_; ++i) {
              if (std::isfinite(lb_[i]) && dz_c[i] < 0.0) {
                a_c = std::min(a_c, -tau * (trial.z[i] - lb_[i]) / dz_c[i]);
              }
              if (std::isfinite(ub_[i]) && dz_c[i] > 0.0) {
                a_c = std::min(a_c, tau * (ub_[i] - trial.z[i]) / dz_c[i]);
              }
            }
            for (Eigen::Index i = 0; i < mi_; ++i) {
              if (dw_c[i] < 0.0) a_c = std::min(a_c, -tau * trial.w[i] / dw_c[i]);
            }
            Iterate soc = trial;
            soc.z = trial.z + a_c * dz_c;
            soc.w = trial.w + a_c * dw_c;
            Evaluation soc_ev;
            if (evaluate(soc.z, soc_ev, false)) {
              const double theta_soc = constraint_violation_l1(soc_ev, soc);
              const double phi_soc = barrier_objective(soc_ev, soc);
              if (cfg_.verbosity >= 3) {
                log::write(log::Level::error, "  soc theta=" + std::to_string(theta_soc) +
                                                  " phi=" + std::to_string(phi_soc));
              }
              if (filter_ok(theta_soc, phi_soc, alpha)) {
                trial = soc;
                trial_ev = soc_ev;
                dy_soc = a_c * (me_ > 0 ? Eigen::VectorXd(sol.tail(me_))
                                        : Eigen::VectorXd());
                accepted = true;
                soc_used = true;
                break;
              }
            }
          }
        }
      }
      alpha *= 0.5;
      if (alpha < 1e-12) break;
    }
    if (!accepted) {
      // Force progress with more regularization next round; a stalled
      // direction usually means the curvature model was too optimistic.
      delta_pending_ = std::clamp(std::max(delta_last_, delta) * 10.0, 1e-4, 1e12);
      alpha = 1e-12;
      trial.z = it_.z + alpha * dz;
      trial.w = it_.w + alpha * dw;
    }

    it_.z = trial.z;
    it_.w = trial.w;
    it_.y += alpha * dy;
    if (soc_used && dy_soc.size() == me_) it_.y += dy_soc;
    if (mi_ > 0) it_.yc += alpha * dyc;
    it_.zl += alpha_d * dzl;
    it_.zu += alpha_d * dzu;
    if (mi_ > 0) it_.zw += alpha_d * dzw;
    if (!evaluate(it_.z, ev, true)) {
      result.status = SolveStatus::numeric_error;
      break;
    }

    // Keep bound duals inside the sigma safeguard window.
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (std::isfinite(lb_[i])) {
        const double ref = mu_ / (it_.z[i] - lb_[i]);
        it_.zl[i] = std::clamp(it_.zl[i], ref / kSigmaCap, ref * kSigmaCap);
      }
      if (std::isfinite(ub_[i])) {
        const double ref = mu_ / (ub_[i] - it_.z[i]);
        it_.zu[i] = std::clamp(it_.zu[i], ref / kSigmaCap, ref * kSigmaCap);
      }
    }
    for (Eigen::Index i = 0; i < mi_; ++i) {
      const double ref = mu_ / it_.w[i];
      it_.zw[i] = std::clamp(it_.zw[i], ref / kSigmaCap, ref * kSigmaCap);
    }

    if (cfg_.trace) {
      const KktResiduals r = residuals(ev, it_, 0.0, false);
      cfg_.trace(iter, ev.f, r.stationarity, r.feasibility, r.complementarity, mu_, alpha);
    }
    if (cfg_.verbosity >= 2) {
      Eigen::Index iworst = 0;
      double worst = 1.0;
      for (Eigen::Index i = 0; i < n_; ++i) {
        if (std::isfinite(lb_[i]) && dz[i] < 0.0) {
          const double a = -(it_.z[i] - lb_[i]) / dz[i];
          if (a < worst) { worst = a; iworst = i; }
        }
        if (std::isfinite(ub_[i]) && dz[i] > 0.0) {
          const double a = (ub_[i] - it_.z[i]) / dz[i];
          if (a < worst) { worst = a; iworst = i; }
        }
      }
      log::write(log::Level::error,
                 "iter " + std::to_string(iter) + " alpha_p=" + std::to_string(alpha_p) +
                     " alpha=" + std::to_string(alpha) + " worst_var=" +
                     std::to_string(iworst) + " accepted=" + std::to_string(accepted) +
                     " delta=" + std::to_string(delta));
    }
  }

  result.z = it_.z;
  result.y_eq = it_.y;
  result.alpha_ineq = it_.zw;
  result.z_lower = it_.zl;
  result.z_upper = it_.zu;
  result.objective = ev.f;
  result.kkt = residuals(ev, it_, 0.0, false);
  result.iterations = iter;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace

double KktResiduals::max() const {
  return std::max({stationarity, feasibility, complementarity});
}

SolveResult solve_nlp(const Nlp& nlp, const SolverConfig& cfg, const Eigen::VectorXd& z0,
                      const WarmStart* warm) {
  if (z0.size() != nlp.num_vars) {
    throw ValidationError("solve_nlp: initial guess has size " + std::to_string(z0.size()) +
                          ", expected " + std::to_string(nlp.num_vars));
  }
  IpmSolver solver(nlp, cfg);
  return solver.run(z0, warm);
}

KktResiduals check_kkt(const Nlp& nlp, const Eigen::VectorXd& z, const Eigen::VectorXd& y_eq,
                       const Eigen::VectorXd& alpha_ineq, const Eigen::VectorXd& z_lower,
                       const Eigen::VectorXd& z_upper) {
  const Eigen::Index n = nlp.num_vars;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
  nlp.objective(z, &grad);

  Eigen::VectorXd stat = grad;
  double feas = 0.0;
  double compl_res = 0.0;

  if (nlp.num_eq > 0) {
    Eigen::VectorXd c(nlp.num_eq);
    c.setZero();
    TripletVec jt;
    nlp.equality(z, &c, &jt);
    Eigen::SparseMatrix<double> J(nlp.num_eq, n);
    J.setFromTriplets(jt.begin(), jt.end());
    stat += J.transpose() * y_eq;
    feas = std::max(feas, c.lpNorm<Eigen::Infinity>());
  }
  if (nlp.num_ineq > 0) {
    Eigen::VectorXd c(nlp.num_ineq);
    c.setZero();
    TripletVec jt;
    nlp.inequality(z, &c, &jt);
    Eigen::SparseMatrix<double> J(nlp.num_ineq, n);
    J.setFromTriplets(jt.begin(), jt.end());
    stat -= J.transpose() * alpha_ineq;
    for (Eigen::Index i = 0; i < nlp.num_ineq; ++i) {
      feas = std::max(feas, -std::min(c[i], 0.0));
      compl_res = std::max(compl_res, std::abs(alpha_ineq[i] * c[i]));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lb = nlp.lower.size() == n ? nlp.lower[i] : -std::numeric_limits<double>::infinity();
    const double ub = nlp.upper.size() == n ? nlp.upper[i] : std::numeric_limits<double>::infinity();
    if (std::isfinite(lb)) {
      stat[i] -= z_lower[i];
      feas = std::max(feas, lb - z[i]);
      compl_res = std::max(compl_res, std::abs(z_lower[i] * (z[i] - lb)));
    }
    if (std::isfinite(ub)) {
      stat[i] += z_upper[i];
      feas = std::max(feas, z[i] - ub);
      compl_res = std::max(compl_res, std::abs(z_upper[i] * (ub - z[i])));
    }
  }
  return KktResiduals{stat.lpNorm<Eigen::Infinity>(), feas, compl_res};
}

}  // namespace evnav::solver
