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

#include "evnav/ocp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

#include "evnav/util.hpp"

namespace evnav::ocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlackReportThreshold = 1e-6;

double sq(double v) { return v * v; }

}  // namespace

double stage_cost(const VehicleState& x, const ControlInput& u, const OcpWeights& w,
                  const Destination& dest) {
  if (w.form == CostForm::compact) {
    StateVec qd = w.Q_diag;
    if (!w.energy_aware) qd[StateIdx::gamma] = 0.0;
    const StateVec dx = x.vec() - dest.x_dest;
    return dx.dot(qd.cwiseProduct(dx)) + u.vec().dot(w.R_diag.cwiseProduct(u.vec()));
  }
  double cost = w.Q1 * sq((x.e_y - dest.e_y_dest) / w.e_y_max) +
                w.Q2 * sq(x.e_psi / w.e_psi_max) + w.q3() * sq(x.gamma - dest.gamma_max);
  cost += w.R1 * sq(u.a / w.a_max) + w.R2 * sq(u.delta / w.delta_max) +
          w.R3 * sq(u.d / w.d_min);
  return cost;
}

double terminal_cost(const VehicleState& x_N, const OcpWeights& w, const Destination& dest) {
  if (w.form == CostForm::compact) {
    StateVec pd = w.P_diag;
    if (!w.energy_aware) pd[StateIdx::gamma] = 0.0;
    const StateVec dx = x_N.vec() - dest.x_dest;
    return dx.dot(pd.cwiseProduct(dx));
  }
  if (dest.s_x_dest == 0.0) throw ValidationError("terminal cost needs s_x_dest != 0");
  return w.P1 * sq((x_N.s_x - dest.s_x_dest) / dest.s_x_dest) +
         w.p2() * sq(x_N.gamma - dest.gamma_max);
}

OcpNlp::OcpNlp(const VehicleState& x0, std::vector<ObstacleConstraint> obstacles,
               const OcpWeights& weights, const Destination& dest, const Bounds& bounds,
               const VehicleParams& params, const MotorPowerModel& motor,
               const RoadModel& road, int horizon, double T_s,
               dyn::KinematicsVariant variant)
    : x0_(x0),
      obstacles_(std::move(obstacles)),
      weights_(weights),
      dest_(dest),
      bounds_(bounds),
      params_(params),
      motor_(motor),
      road_(road),
      N_(horizon),
      T_s_(T_s),
      variant_(variant) {
  if (N_ < 1) throw ValidationError("horizon must be >= 1");
  if (!(T_s_ > 0.0)) throw ValidationError("T_s must be > 0");
  params_.validate();
  bounds_.validate();

  const int M = static_cast<int>(obstacles_.size());
  for (int m = 0; m < M; ++m) {
    const auto& fc = obstacles_[m].forecast;
    if (static_cast<int>(fc.step_sets.size()) < N_) {
      throw ValidationError("obstacle " + std::to_string(m) +
                            " forecast missing step k=" +
                            std::to_string(fc.step_sets.size() + 1));
    }
    obstacle_rows_.push_back(static_cast<int>(fc.base.A.rows()));
  }

  int offset = 10 * N_ + 3 * N_;
  for (int m = 0; m < M; ++m) {
    lambda_off_.push_back(offset);
    offset += obstacle_rows_[m] * N_;
    int mu_rows = 0;
    for (int j = 0; j < N_; ++j) {
      mu_rows += static_cast<int>(obstacles_[m].forecast.step_sets[j].G.rows());
    }
    mu_off_.push_back(offset);
    offset += mu_rows;
    slack_off_.push_back(offset);
    offset += N_;
  }
  num_vars_ = offset;

  int eq = 10 * N_;
  for (int m = 0; m < M; ++m) {
    link_off_.push_back(eq);
    eq += 2 * N_;
  }
  num_eq_ = eq;

  int ineq = 2 * N_;
  for (int m = 0; m < M; ++m) {
    ineq_off_.push_back(ineq);
    ineq += 2 * N_;  // margin + cone per step
  }
  num_ineq_ = ineq;

  // Stage-cost contribution of the fixed initial state (the k = 0 input
  // terms vanish at u = 0, so this is the pure state part).
  stage_constant_ = stage_cost(x0_, ControlInput{}, weights_, dest_);
}

int OcpNlp::state_index(int k, int comp) const { return (k - 1) * 10 + comp; }
int OcpNlp::input_index(int k, int comp) const { return 10 * N_ + k * 3 + comp; }
int OcpNlp::lambda_index(int m, int j, int row) const {
  return lambda_off_[m] + j * obstacle_rows_[m] + row;
}
int OcpNlp::mu_index(int m, int j, int row) const {
  // Uncertainty sets share the 4-row box layout; offsets are cumulative to
  // stay correct if a forecast ever carries differently sized sets.
  int off = mu_off_[m];
  for (int jj = 0; jj < j; ++jj) {
    off += static_cast<int>(obstacles_[m].forecast.step_sets[jj].G.rows());
  }
  return off + row;
}
int OcpNlp::slack_index(int m, int j) const { return slack_off_[m] + j; }
int OcpNlp::dynamics_row(int k, int comp) const { return k * 10 + comp; }
int OcpNlp::link_row(int m, int j, int axis) const { return link_off_[m] + 2 * j + axis; }
int OcpNlp::torque_row(int k, bool upper) const { return 2 * k + (upper ? 1 : 0); }
int OcpNlp::margin_row(int m, int j) const { return ineq_off_[m] + 2 * j; }
int OcpNlp::cone_row(int m, int j) const { return ineq_off_[m] + 2 * j + 1; }

namespace {

VehicleState state_from(const Eigen::VectorXd& z, int idx) {
  return VehicleState::from_vec(z.segment<10>(idx));
}

}  // namespace

double OcpNlp::objective_eval(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
  const OcpWeights& w = weights_;
  double cost = stage_constant_;

  StateVec qd = StateVec::Zero();
  StateVec pd = StateVec::Zero();
  InputVec rd = InputVec::Zero();
  StateVec ref = dest_.x_dest;
  if (w.form == CostForm::compact) {
    qd = w.Q_diag;
    pd = w.P_diag;
    rd = w.R_diag;
    if (!w.energy_aware) {
      qd[StateIdx::gamma] = 0.0;
      pd[StateIdx::gamma] = 0.0;
    }
  } else {
    qd[StateIdx::e_y] = w.Q1 / sq(w.e_y_max);
    qd[StateIdx::e_psi] = w.Q2 / sq(w.e_psi_max);
    qd[StateIdx::gamma] = w.q3();
    pd[StateIdx::s_x] = w.P1 / sq(dest_.s_x_dest);
    pd[StateIdx::gamma] = w.p2();
    rd[InputIdx::a] = w.R1 / sq(w.a_max);
    rd[InputIdx::delta] = w.R2 / sq(w.delta_max);
    rd[InputIdx::d] = w.R3 / sq(w.d_min);
    ref.setZero();
    ref[StateIdx::e_y] = dest_.e_y_dest;
    ref[StateIdx::gamma] = dest_.gamma_max;
    ref[StateIdx::s_x] = dest_.s_x_dest;
  }

  // Stage state terms, k = 1 .. N-1.
  for (int k = 1; k < N_; ++k) {
    const int base = state_index(k, 0);
    for (int c = 0; c < 10; ++c) {
      if (qd[c] == 0.0) continue;
      const double dx = z[base + c] - ref[c];
      cost += qd[c] * dx * dx;
      if (grad != nullptr) (*grad)[base + c] += 2.0 * qd[c] * dx;
    }
  }
  // Input terms, k = 0 .. N-1.
  for (int k = 0; k < N_; ++k) {
    const int base = input_index(k, 0);
    for (int c = 0; c < 3; ++c) {
      if (rd[c] == 0.0) continue;
      const double u = z[base + c];
      cost += rd[c] * u * u;
      if (grad != nullptr) (*grad)[base + c] += 2.0 * rd[c] * u;
    }
  }
  // Terminal terms.
  {
    const int base = state_index(N_, 0);
    for (int c = 0; c < 10; ++c) {
      if (pd[c] == 0.0) continue;
      const double dx = z[base + c] - ref[c];
      cost += pd[c] * dx * dx;
      if (grad != nullptr) (*grad)[base + c] += 2.0 * pd[c] * dx;
    }
  }
  // Slack penalty.
  for (int m = 0; m < num_obstacles(); ++m) {
    for (int j = 0; j < N_; ++j) {
      const double s = z[slack_index(m, j)];
      cost += w.W_s * s * s;
      if (grad != nullptr) (*grad)[slack_index(m, j)] += 2.0 * w.W_s * s;
    }
  }
  return cost;
}

void OcpNlp::equality_eval(const Eigen::VectorXd& z, Eigen::VectorXd* c,
                           solver::TripletVec* J) const {
  for (int k = 0; k < N_; ++k) {
    const VehicleState xk = k == 0 ? x0_ : state_from(z, state_index(k, 0));
    const ControlInput uk = ControlInput::from_vec(z.segment<3>(input_index(k, 0)));
    StateVec f;
    try {
      f = dyn::continuous_dynamics(xk, uk, params_, motor_, road_, variant_);
    } catch (const NumericError& e) {
      throw NumericError(std::string(e.what()) + " (horizon step " + std::to_string(k) + ")",
                         k);
    }
    if (c != nullptr) {
      const StateVec xk1 = z.segment<10>(state_index(k + 1, 0));
      c->segment<10>(dynamics_row(k, 0)) = xk1 - xk.vec() - T_s_ * f;
    }
    if (J != nullptr) {
      Eigen::Matrix<double, 10, 10> df_dx;
      Eigen::Matrix<double, 10, 3> df_du;
      dyn::dynamics_jacobians(xk, uk, params_, motor_, road_, variant_, df_dx, df_du);
      for (int i = 0; i < 10; ++i) {
        const int row = dynamics_row(k, i);
        J->emplace_back(row, state_index(k + 1, i), 1.0);
        if (k >= 1) {
          for (int jcol = 0; jcol < 10; ++jcol) {
            const double v = -T_s_ * df_dx(i, jcol) - (i == jcol ? 1.0 : 0.0);
            if (v != 0.0) J->emplace_back(row, state_index(k, jcol), v);
          }
        }
        for (int jcol = 0; jcol < 3; ++jcol) {
          const double v = -T_s_ * df_du(i, jcol);
          if (v != 0.0) J->emplace_back(row, input_index(k, jcol), v);
        }
      }
    }
  }

  for (int m = 0; m < num_obstacles(); ++m) {
    const auto& A = obstacles_[m].forecast.base.A;
    const int n_m = obstacle_rows_[m];
    for (int j = 0; j < N_; ++j) {
      const auto& set = obstacles_[m].forecast.step_sets[j];
      const int q_m = static_cast<int>(set.G.rows());
      if (c != nullptr) {
        Vec2 link = Vec2::Zero();
        for (int r = 0; r < n_m; ++r) {
          link += A.row(r).transpose() * z[lambda_index(m, j, r)];
        }
        for (int r = 0; r < q_m; ++r) {
          link -= set.G.row(r).transpose() * z[mu_index(m, j, r)];
        }
        (*c)[link_row(m, j, 0)] = link.x();
        (*c)[link_row(m, j, 1)] = link.y();
      }
      if (J != nullptr) {
        for (int axis = 0; axis < 2; ++axis) {
          const int row = link_row(m, j, axis);
          for (int r = 0; r < n_m; ++r) {
            J->emplace_back(row, lambda_index(m, j, r), A(r, axis));
          }
          for (int r = 0; r < q_m; ++r) {
            J->emplace_back(row, mu_index(m, j, r), -set.G(r, axis));
          }
        }
      }
    }
  }
}

void OcpNlp::inequality_eval(const Eigen::VectorXd& z, Eigen::VectorXd* c,
                             solver::TripletVec* J) const {
  const double kappa = params_.torque_per_accel();
  for (int k = 0; k < N_; ++k) {
    const double v = k == 0 ? x0_.v_x : z[state_index(k, StateIdx::v_x)];
    const double a = z[input_index(k, InputIdx::a)];
    const double tau_max = dyn::torque_limit(v, motor_);
    if (c != nullptr) {
      (*c)[torque_row(k, false)] = tau_max + kappa * a;
      (*c)[torque_row(k, true)] = tau_max - kappa * a;
    }
    if (J != nullptr) {
      const double slope = dyn::torque_limit_slope(v, motor_);
      for (const bool upper : {false, true}) {
        const int row = torque_row(k, upper);
        if (k >= 1) J->emplace_back(row, state_index(k, StateIdx::v_x), slope);
        J->emplace_back(row, input_index(k, InputIdx::a), upper ? -kappa : kappa);
      }
    }
  }

  for (int m = 0; m < num_obstacles(); ++m) {
    const auto& A = obstacles_[m].forecast.base.A;
    const auto& b = obstacles_[m].forecast.base.b;
    const int n_m = obstacle_rows_[m];
    const double d_safe = obstacles_[m].d_safe;
    for (int j = 0; j < N_; ++j) {
      const auto& set = obstacles_[m].forecast.step_sets[j];
      const int q_m = static_cast<int>(set.G.rows());
      const Vec2 p(z[state_index(j + 1, StateIdx::p_x)],
                   z[state_index(j + 1, StateIdx::p_y)]);
      Eigen::VectorXd lambda(n_m);
      for (int r = 0; r < n_m; ++r) lambda[r] = z[lambda_index(m, j, r)];

      if (c != nullptr) {
        double margin = (A * p - b).dot(lambda) - d_safe + z[slack_index(m, j)];
        for (int r = 0; r < q_m; ++r) margin -= set.h[r] * z[mu_index(m, j, r)];
        (*c)[margin_row(m, j)] = margin;
        const Vec2 g = A.transpose() * lambda;
        (*c)[cone_row(m, j)] = 1.0 - g.squaredNorm();
      }
      if (J != nullptr) {
        const int mrow = margin_row(m, j);
        const Vec2 g = A.transpose() * lambda;
        J->emplace_back(mrow, state_index(j + 1, StateIdx::p_x), g.x());
        J->emplace_back(mrow, state_index(j + 1, StateIdx::p_y), g.y());
        const Eigen::VectorXd Apb = A * p - b;
        for (int r = 0; r < n_m; ++r) {
          J->emplace_back(mrow, lambda_index(m, j, r), Apb[r]);
        }
        for (int r = 0; r < q_m; ++r) {
          J->emplace_back(mrow, mu_index(m, j, r), -set.h[r]);
        }
        J->emplace_back(mrow, slack_index(m, j), 1.0);

        const int crow = cone_row(m, j);
        const Eigen::VectorXd cone_grad = -2.0 * (A * g);
        for (int r = 0; r < n_m; ++r) {
          J->emplace_back(crow, lambda_index(m, j, r), cone_grad[r]);
        }
      }
    }
  }
}

void OcpNlp::hessian_eval(const Eigen::VectorXd& z, const Eigen::VectorXd& y_eq,
                          const Eigen::VectorXd& alpha, solver::TripletVec* H) const {
  const OcpWeights& w = weights_;

  // Objective curvature (diagonal).
  StateVec qd = StateVec::Zero();
  StateVec pd = StateVec::Zero();
  InputVec rd = InputVec::Zero();
  if (w.form == CostForm::compact) {
    qd = w.Q_diag;
    pd = w.P_diag;
    rd = w.R_diag;
    if (!w.energy_aware) {
      qd[StateIdx::gamma] = 0.0;
      pd[StateIdx::gamma] = 0.0;
    }
  } else {
    qd[StateIdx::e_y] = w.Q1 / sq(w.e_y_max);
    qd[StateIdx::e_psi] = w.Q2 / sq(w.e_psi_max);
    qd[StateIdx::gamma] = w.q3();
    pd[StateIdx::s_x] = w.P1 / sq(dest_.s_x_dest);
    pd[StateIdx::gamma] = w.p2();
    rd[InputIdx::a] = w.R1 / sq(w.a_max);
    rd[InputIdx::delta] = w.R2 / sq(w.delta_max);
    rd[InputIdx::d] = w.R3 / sq(w.d_min);
  }
  for (int k = 1; k < N_; ++k) {
    for (int c = 0; c < 10; ++c) {
      if (qd[c] != 0.0) H->emplace_back(state_index(k, c), state_index(k, c), 2.0 * qd[c]);
    }
  }
  for (int c = 0; c < 10; ++c) {
    if (pd[c] != 0.0) H->emplace_back(state_index(N_, c), state_index(N_, c), 2.0 * pd[c]);
  }
  for (int k = 0; k < N_; ++k) {
    for (int c = 0; c < 3; ++c) {
      if (rd[c] != 0.0) H->emplace_back(input_index(k, c), input_index(k, c), 2.0 * rd[c]);
    }
  }
  for (int m = 0; m < num_obstacles(); ++m) {
    for (int j = 0; j < N_; ++j) {
      H->emplace_back(slack_index(m, j), slack_index(m, j), 2.0 * w.W_s);
    }
  }

  // Dynamics curvature: finite differences of the analytic Jacobian,
  // contracted with the dynamics multipliers. Block size is 13 (3 for k=0).
  for (int k = 0; k < N_; ++k) {
    const Eigen::Matrix<double, 10, 1> y10 = y_eq.segment<10>(dynamics_row(k, 0));
    if (y10.lpNorm<Eigen::Infinity>() < 1e-14) continue;
    const bool full = k >= 1;
    const int nloc = full ? 13 : 3;
    Eigen::VectorXd v0(13);
    v0.head<10>() = full ? z.segment<10>(state_index(k, 0)) : x0_.vec();
    v0.tail<3>() = z.segment<3>(input_index(k, 0));

    auto weighted_grad = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
      Eigen::Matrix<double, 10, 10> df_dx;
      Eigen::Matrix<double, 10, 3> df_du;
      dyn::dynamics_jacobians(VehicleState::from_vec(v.head<10>()),
                              ControlInput::from_vec(v.tail<3>()), params_, motor_, road_,
                              variant_, df_dx, df_du);
      g.resize(13);
      g.head<10>() = df_dx.transpose() * y10;
      g.tail<3>() = df_du.transpose() * y10;
    };

    Eigen::MatrixXd Hloc(nloc, nloc);
    Eigen::VectorXd v = v0, gp, gm;
    for (int l = 0; l < nloc; ++l) {
      const int col = full ? l : 10 + l;
      const double h = 1e-6 * std::max(1.0, std::abs(v0[col]));
      v[col] = v0[col] + h;
      weighted_grad(v, gp);
      v[col] = v0[col] - h;
      weighted_grad(v, gm);
      v[col] = v0[col];
      const Eigen::VectorXd colv = (gp - gm) / (2.0 * h);
      for (int i = 0; i < nloc; ++i) Hloc(i, l) = colv[full ? i : 10 + i];
    }
    Hloc = (-T_s_ * 0.5) * (Hloc + Hloc.transpose()).eval();
    // Convexify the block: clamping its eigenvalues at zero keeps the
    // useful curvature while sparing the solver per-iteration inertia
    // corrections on the indefinite directions.
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hloc);
      const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
      Hloc = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
    }

    auto global_index = [&](int l) {
      if (full) return l < 10 ? state_index(k, l) : input_index(k, l - 10);
      return input_index(k, l);
    };
    for (int i = 0; i < nloc; ++i) {
      for (int jcol = 0; jcol < nloc; ++jcol) {
        if (Hloc(i, jcol) != 0.0) {
          H->emplace_back(global_index(i), global_index(jcol), Hloc(i, jcol));
        }
      }
    }
  }

  // Torque envelope curvature.
  for (int k = 1; k < N_; ++k) {
    const double a_sum = alpha[torque_row(k, false)] + alpha[torque_row(k, true)];
    if (a_sum == 0.0) continue;
    const double v = z[state_index(k, StateIdx::v_x)];
    const double curv = -a_sum * dyn::torque_limit_curvature(v, motor_);
    if (curv != 0.0) {
      H->emplace_back(state_index(k, StateIdx::v_x), state_index(k, StateIdx::v_x), curv);
    }
  }

  // Robust-block curvature: bilinear margin coupling and the constant cone
  // quadratic.
  for (int m = 0; m < num_obstacles(); ++m) {
    const auto& A = obstacles_[m].forecast.base.A;
    const int n_m = obstacle_rows_[m];
    const Eigen::MatrixXd AAt = A * A.transpose();
    for (int j = 0; j < N_; ++j) {
      const double am = alpha[margin_row(m, j)];
      if (am != 0.0) {
        for (int r = 0; r < n_m; ++r) {
          for (int axis = 0; axis < 2; ++axis) {
            const double val = -am * A(r, axis);
            if (val == 0.0) continue;
            const int pid = state_index(j + 1, StateIdx::p_x + axis);
            const int lid = lambda_index(m, j, r);
            H->emplace_back(pid, lid, val);
            H->emplace_back(lid, pid, val);
          }
        }
      }
      const double ac = alpha[cone_row(m, j)];
      if (ac != 0.0) {
        for (int r = 0; r < n_m; ++r) {
          for (int rr = 0; rr < n_m; ++rr) {
            const double val = 2.0 * ac * AAt(r, rr);
            if (val != 0.0) {
              H->emplace_back(lambda_index(m, j, r), lambda_index(m, j, rr), val);
            }
          }
        }
      }
    }
  }
}

solver::Nlp OcpNlp::functions() const {
  solver::Nlp nlp;
  nlp.num_vars = num_vars_;
  nlp.num_eq = num_eq_;
  nlp.num_ineq = num_ineq_;
  nlp.lower = Eigen::VectorXd::Constant(num_vars_, -kInf);
  nlp.upper = Eigen::VectorXd::Constant(num_vars_, kInf);
  for (int k = 1; k <= N_; ++k) {
    nlp.lower[state_index(k, StateIdx::v_x)] = bounds_.v_x_min;
    nlp.upper[state_index(k, StateIdx::v_x)] = bounds_.v_x_max;
    nlp.lower[state_index(k, StateIdx::e_y)] = bounds_.e_y_min;
    nlp.upper[state_index(k, StateIdx::e_y)] = bounds_.e_y_max;
    nlp.lower[state_index(k, StateIdx::gamma)] = bounds_.gamma_min;
    nlp.upper[state_index(k, StateIdx::gamma)] = bounds_.gamma_max;
  }
  for (int k = 0; k < N_; ++k) {
    nlp.lower[input_index(k, InputIdx::a)] = bounds_.a_min;
    nlp.upper[input_index(k, InputIdx::a)] = bounds_.a_max;
    nlp.lower[input_index(k, InputIdx::delta)] = bounds_.delta_min;
    nlp.upper[input_index(k, InputIdx::delta)] = bounds_.delta_max;
    nlp.lower[input_index(k, InputIdx::d)] = bounds_.d_min;
    nlp.upper[input_index(k, InputIdx::d)] = bounds_.d_max;
  }
  for (int m = 0; m < num_obstacles(); ++m) {
    for (int j = 0; j < N_; ++j) {
      for (int r = 0; r < obstacle_rows_[m]; ++r) nlp.lower[lambda_index(m, j, r)] = 0.0;
      const int q_m = static_cast<int>(obstacles_[m].forecast.step_sets[j].G.rows());
      for (int r = 0; r < q_m; ++r) nlp.lower[mu_index(m, j, r)] = 0.0;
      nlp.lower[slack_index(m, j)] = 0.0;
    }
  }

  nlp.objective = [this](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
    return objective_eval(z, grad);
  };
  nlp.equality = [this](const Eigen::VectorXd& z, Eigen::VectorXd* c,
                        solver::TripletVec* J) { equality_eval(z, c, J); };
  nlp.inequality = [this](const Eigen::VectorXd& z, Eigen::VectorXd* c,
                          solver::TripletVec* J) { inequality_eval(z, c, J); };
  nlp.lagrangian_hessian = [this](const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& alpha, solver::TripletVec* H) {
    hessian_eval(z, y, alpha, H);
  };
  return nlp;
}

Eigen::VectorXd OcpNlp::cold_start() const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(num_vars_);
  VehicleState x = x0_;
  const ControlInput zero_u;
  for (int k = 1; k <= N_; ++k) {
    x = dyn::euler_step(x, zero_u, T_s_, params_, motor_, road_, variant_);
    z.segment<10>(state_index(k, 0)) = x.vec();
  }
  for (int m = 0; m < num_obstacles(); ++m) {
    for (int j = 0; j < N_; ++j) z[slack_index(m, j)] = obstacles_[m].d_safe;
  }
  return z;
}

solver::WarmStart OcpNlp::shift_warm_start(const HorizonSolution& prev) const {
  solver::WarmStart ws;
  ws.z.resize(num_vars_);
  ws.y_eq.resize(num_eq_);
  ws.alpha_ineq.resize(num_ineq_);

  auto prev_state = [&](int k) { return prev.states[static_cast<std::size_t>(k)].vec(); };
  for (int k = 1; k <= N_; ++k) {
    const int src = std::min(k + 1, N_);
    ws.z.segment<10>(state_index(k, 0)) = prev_state(src);
  }
  for (int k = 0; k < N_; ++k) {
    const int src = std::min(k + 1, N_ - 1);
    ws.z.segment<3>(input_index(k, 0)) = prev.inputs[static_cast<std::size_t>(src)].vec();
  }
  // Certificate variables are not shifted: the forecast sets are rebuilt
  // every step, so the previous (lambda, mu) pair with stale geometry and
  // can be badly infeasible for the new link rows. Restart them from the
  // always-feasible slack-covered point instead.
  for (int m = 0; m < num_obstacles(); ++m) {
    for (int j = 0; j < N_; ++j) {
      for (int r = 0; r < obstacle_rows_[m]; ++r) ws.z[lambda_index(m, j, r)] = 0.0;
      const int q_m = static_cast<int>(obstacles_[m].forecast.step_sets[j].G.rows());
      for (int r = 0; r < q_m; ++r) ws.z[mu_index(m, j, r)] = 0.0;
      ws.z[slack_index(m, j)] = obstacles_[m].d_safe;
    }
  }

  // Shift the dynamics/torque multipliers along the same index maps; the
  // robust-block multipliers restart at zero with their variables.
  for (int k = 0; k < N_; ++k) {
    const int src = std::min(k + 1, N_ - 1);
    ws.y_eq.segment<10>(dynamics_row(k, 0)) =
        prev.raw_y_eq.segment<10>(dynamics_row(src, 0));
    ws.alpha_ineq[torque_row(k, false)] = prev.raw_alpha[torque_row(src, false)];
    ws.alpha_ineq[torque_row(k, true)] = prev.raw_alpha[torque_row(src, true)];
  }
  for (int m = 0; m < num_obstacles(); ++m) {
    for (int j = 0; j < N_; ++j) {
      for (int axis = 0; axis < 2; ++axis) ws.y_eq[link_row(m, j, axis)] = 0.0;
      ws.alpha_ineq[margin_row(m, j)] = 0.0;
      ws.alpha_ineq[cone_row(m, j)] = 0.0;
    }
  }
  return ws;
}

HorizonSolution OcpNlp::solve(const solver::SolverConfig& cfg,
                              const HorizonSolution* warm) const {
  const solver::Nlp nlp = functions();

  solver::SolveResult res;
  const bool can_warm = warm != nullptr && cfg.warm_start &&
                        warm->raw_z.size() == num_vars_ &&
                        warm->raw_y_eq.size() == num_eq_ &&
                        warm->raw_alpha.size() == num_ineq_ &&
                        static_cast<int>(warm->states.size()) == N_ + 1;
  if (can_warm) {
    const solver::WarmStart ws = shift_warm_start(*warm);
    res = solver::solve_nlp(nlp, cfg, ws.z, &ws);
  } else {
    res = solver::solve_nlp(nlp, cfg, cold_start());
  }

  HorizonSolution sol;
  sol.states.resize(static_cast<std::size_t>(N_) + 1);
  sol.states[0] = x0_;
  for (int k = 1; k <= N_; ++k) {
    sol.states[static_cast<std::size_t>(k)] =
        VehicleState::from_vec(res.z.segment<10>(state_index(k, 0)));
  }
  sol.inputs.resize(static_cast<std::size_t>(N_));
  for (int k = 0; k < N_; ++k) {
    sol.inputs[static_cast<std::size_t>(k)] =
        ControlInput::from_vec(res.z.segment<3>(input_index(k, 0)));
  }
  const int M = num_obstacles();
  sol.lambdas.resize(M);
  sol.mus.resize(M);
  sol.slacks.resize(M, N_);
  if (M == 0) sol.slacks.resize(0, N_);
  for (int m = 0; m < M; ++m) {
    sol.lambdas[m].resize(obstacle_rows_[m], N_);
    int max_q = 0;
    for (int j = 0; j < N_; ++j) {
      max_q = std::max(max_q,
                       static_cast<int>(obstacles_[m].forecast.step_sets[j].G.rows()));
    }
    sol.mus[m].setZero(max_q, N_);
    for (int j = 0; j < N_; ++j) {
      for (int r = 0; r < obstacle_rows_[m]; ++r) {
        sol.lambdas[m](r, j) = res.z[lambda_index(m, j, r)];
      }
      const int q_m = static_cast<int>(obstacles_[m].forecast.step_sets[j].G.rows());
      for (int r = 0; r < q_m; ++r) sol.mus[m](r, j) = res.z[mu_index(m, j, r)];
      sol.slacks(m, j) = res.z[slack_index(m, j)];
    }
  }
  sol.max_slack = (M > 0 && sol.slacks.size() > 0) ? sol.slacks.maxCoeff() : 0.0;
  sol.objective = res.objective;
  sol.kkt = res.kkt;
  sol.iterations = res.iterations;
  sol.wall_time_s = res.wall_time_s;
  sol.raw_z = std::move(res.z);
  sol.raw_y_eq = std::move(res.y_eq);
  sol.raw_alpha = std::move(res.alpha_ineq);
  sol.raw_z_lower = std::move(res.z_lower);
  sol.raw_z_upper = std::move(res.z_upper);

  switch (res.status) {
    case solver::SolveStatus::converged:
      sol.status = sol.max_slack > kSlackReportThreshold
                       ? HorizonStatus::infeasible_relaxed
                       : HorizonStatus::converged;
      break;
    case solver::SolveStatus::max_iter:
      sol.status = HorizonStatus::max_iter;
      break;
    case solver::SolveStatus::numeric_error:
      sol.status = HorizonStatus::numeric_error;
      break;
  }
  if (sol.max_slack > kSlackReportThreshold && log::enabled(log::Level::info)) {
    log::info("horizon solve used safety slack up to " + std::to_string(sol.max_slack));
  }
  return sol;
}

solver::KktResiduals OcpNlp::check_kkt(const HorizonSolution& candidate) const {
  const solver::Nlp nlp = functions();
  const Eigen::VectorXd zl = candidate.raw_z_lower.size() == num_vars_
                                 ? candidate.raw_z_lower
                                 : Eigen::VectorXd::Zero(num_vars_);
  const Eigen::VectorXd zu = candidate.raw_z_upper.size() == num_vars_
                                 ? candidate.raw_z_upper
                                 : Eigen::VectorXd::Zero(num_vars_);
  return solver::check_kkt(nlp, candidate.raw_z, candidate.raw_y_eq, candidate.raw_alpha,
                           zl, zu);
}

}  // namespace evnav::ocp
