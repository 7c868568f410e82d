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

#include <memory>
#include <vector>

#include "evnav/dynamics.hpp"
#include "evnav/obstacles.hpp"
#include "evnav/solver.hpp"
#include "evnav/types.hpp"

namespace evnav::ocp {

/// Normalized cost follows the per-term scaling of the stage cost; compact
/// uses plain diagonal quadratics on (x - x_dest) and u.
enum class CostForm { normalized, compact };

struct OcpWeights {
  double Q1 = 0.0048;   ///< lateral deviation
  double Q2 = 5e-4;     ///< relative yaw
  double Q3 = 10.0;     ///< state-of-energy
  double R1 = 0.0025;   ///< acceleration command
  double R2 = 0.0125;   ///< steering
  double R3 = 0.05;     ///< braking
  double P1 = 0.4;      ///< terminal arc-coordinate error
  double P2 = 10.0;     ///< terminal state-of-energy
  double W_s = 1e4;     ///< safety slack penalty

  // Normalizers for the stage terms.
  double e_y_max = 4.0;
  double e_psi_max = 0.5;
  double a_max = 7.4;
  double delta_max = 0.5;
  double d_min = -5.75;

  bool energy_aware = true;  ///< false removes the Q3/P2 terms
  CostForm form = CostForm::normalized;

  // Diagonals for the compact form (state order, input order).
  StateVec Q_diag = (StateVec() << 0, 0.0048, 5e-4, 0, 0, 0, 10.0, 0, 0, 0).finished();
  StateVec P_diag = (StateVec() << 0.4, 0.0048, 5e-4, 0, 0, 0, 10.0, 0, 0, 0).finished();
  InputVec R_diag = InputVec(0.0025, 0.0125, 0.05);

  double q3() const { return energy_aware ? Q3 : 0.0; }
  double p2() const { return energy_aware ? P2 : 0.0; }
};

struct Destination {
  double s_x_dest = 0.0;
  double e_y_dest = 0.0;
  double gamma_max = 0.9;
  StateVec x_dest = StateVec::Zero();
};

/// Stage cost of one (state, input) pair.
double stage_cost(const VehicleState& x, const ControlInput& u, const OcpWeights& w,
                  const Destination& dest);

/// Terminal cost of the horizon-end state.
double terminal_cost(const VehicleState& x_N, const OcpWeights& w, const Destination& dest);

/// Robust constraint source for one obstacle.
struct ObstacleConstraint {
  obstacles::OccupancyForecast forecast;  ///< base polytope + per-step sets
  double d_safe = 2.0;
};

enum class HorizonStatus { converged, max_iter, infeasible_relaxed, numeric_error };

struct HorizonSolution {
  std::vector<VehicleState> states;  ///< x_0 .. x_N
  std::vector<ControlInput> inputs;  ///< u_0 .. u_{N-1}
  /// Certificate variables per obstacle: columns index the horizon step j
  /// (constraining p_{j+1}).
  std::vector<Eigen::MatrixXd> lambdas;  ///< n_m x N
  std::vector<Eigen::MatrixXd> mus;      ///< q_m x N
  Eigen::MatrixXd slacks;                ///< M x N
  double objective = 0.0;
  HorizonStatus status = HorizonStatus::numeric_error;
  solver::KktResiduals kkt;
  double max_slack = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;

  // Raw solver vectors, kept for warm starting the next solve.
  Eigen::VectorXd raw_z, raw_y_eq, raw_alpha, raw_z_lower, raw_z_upper;
};

/// Finite-horizon optimal control problem: dynamics equalities, state/input
/// boxes, the motor torque envelope and one robust collision block per
/// (obstacle, step), with slack-relaxed safety margins.
class OcpNlp {
 public:
  OcpNlp(const VehicleState& x0, std::vector<ObstacleConstraint> obstacles,
         const OcpWeights& weights, const Destination& dest, const Bounds& bounds,
         const VehicleParams& params, const MotorPowerModel& motor, const RoadModel& road,
         int horizon, double T_s,
         dyn::KinematicsVariant variant = dyn::KinematicsVariant::standard);

  // Decision vector layout.
  int num_vars() const { return num_vars_; }
  int num_eq() const { return num_eq_; }
  int num_ineq() const { return num_ineq_; }
  int horizon() const { return N_; }
  int num_obstacles() const { return static_cast<int>(obstacles_.size()); }
  int state_index(int k, int comp) const;   ///< k in [1, N]
  int input_index(int k, int comp) const;   ///< k in [0, N-1]
  int lambda_index(int m, int j, int row) const;
  int mu_index(int m, int j, int row) const;
  int slack_index(int m, int j) const;

  // Constraint row layout.
  int dynamics_row(int k, int comp) const;  ///< equality; k in [0, N-1]
  int link_row(int m, int j, int axis) const;
  int torque_row(int k, bool upper) const;  ///< inequality
  int margin_row(int m, int j) const;
  int cone_row(int m, int j) const;

  /// Callback bundle for the bundled interior-point method. The returned
  /// object captures `this`; keep the OcpNlp alive during the solve.
  solver::Nlp functions() const;

  /// Zero-input rollout with inactive certificates and feasible slacks.
  Eigen::VectorXd cold_start() const;

  /// One-step shift of a previous solution onto this problem's layout.
  solver::WarmStart shift_warm_start(const HorizonSolution& prev) const;

  HorizonSolution solve(const solver::SolverConfig& cfg,
                        const HorizonSolution* warm = nullptr) const;

  solver::KktResiduals check_kkt(const HorizonSolution& candidate) const;

  const VehicleState& initial_state() const { return x0_; }
  double sample_time() const { return T_s_; }

 private:
  friend struct OcpEval;

  VehicleState x0_;
  std::vector<ObstacleConstraint> obstacles_;
  OcpWeights weights_;
  Destination dest_;
  Bounds bounds_;
  VehicleParams params_;
  MotorPowerModel motor_;
  RoadModel road_;
  int N_;
  double T_s_;
  dyn::KinematicsVariant variant_;

  int num_vars_ = 0, num_eq_ = 0, num_ineq_ = 0;
  std::vector<int> lambda_off_, mu_off_, slack_off_, link_off_, ineq_off_;
  std::vector<int> obstacle_rows_;  // halfspace count per obstacle
  double stage_constant_ = 0.0;     // k = 0 state terms (x_0 is data)

  double objective_eval(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const;
  void equality_eval(const Eigen::VectorXd& z, Eigen::VectorXd* c,
                     solver::TripletVec* J) const;
  void inequality_eval(const Eigen::VectorXd& z, Eigen::VectorXd* c,
                       solver::TripletVec* J) const;
  void hessian_eval(const Eigen::VectorXd& z, const Eigen::VectorXd& y_eq,
                    const Eigen::VectorXd& alpha, solver::TripletVec* H) const;
};

}  // namespace evnav::ocp
