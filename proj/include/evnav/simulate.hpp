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

#include <optional>
#include <string>
#include <vector>

#include "evnav/obstacles.hpp"
#include "evnav/ocp.hpp"
#include "evnav/types.hpp"

namespace evnav::sim {

/// One scripted obstacle: rectangle geometry, its motion program, optional
/// position jitter and the safety margin the controller must certify.
struct ObstacleSpec {
  std::string name;
  double length = 4.7;   ///< [m]
  double width = 1.8;    ///< [m]
  double heading = 0.0;  ///< frozen for the whole run [rad]
  double d_safe = 2.0;   ///< [m]
  obstacles::ObstacleScript script;
  Vec2 jitter_halfwidth = Vec2::Zero();  ///< uniform box jitter [m]
};

struct Scenario {
  std::string name;
  VehicleParams params;
  MotorPowerModel motor;
  Bounds bounds;
  RoadModel road;
  dyn::KinematicsVariant variant = dyn::KinematicsVariant::standard;

  VehicleState x0;
  ocp::Destination dest;
  std::vector<ObstacleSpec> obstacles;

  int N = 20;             ///< prediction horizon
  int N_s = 85;           ///< displacement sample window
  double T_s = 0.1;       ///< [s]
  double epsilon = 0.1;   ///< coverage target of the sample bound
  double beta = 0.1;      ///< confidence target of the sample bound
  ocp::OcpWeights weights;
  solver::SolverConfig solver;

  std::uint64_t jitter_seed = 1;
  double max_time_s = 30.0;
  double arrival_tol_s_x = 1.0;   ///< [m]
  double arrival_tol_e_y = 0.5;   ///< [m]
  bool dump_sets = false;

  /// Basic consistency checks; throws ValidationError.
  void validate() const;
};

/// Per-control-step log record. The final record of a run carries the state
/// reached at arrival/timeout with no applied input.
struct StepRecord {
  double t = 0.0;
  VehicleState state;
  ControlInput input;
  bool applied = false;  ///< false only for the terminal record
  std::vector<Vec2> obstacle_positions;
  std::vector<double> d_eo;  ///< true clearance per obstacle [m]
  double P_b = 0.0;          ///< battery power at the applied input [W]
  double P_lat = 0.0;        ///< tire-slip dissipation [W]
  ocp::HorizonStatus solver_status = ocp::HorizonStatus::converged;
  double slack_sum = 0.0;
  double solve_ms = 0.0;
};

/// Occupancy-set dump frame (plotting aid): per obstacle, per horizon step,
/// the vertices of the forecast occupancy polygon.
struct OccupancyFrame {
  double t = 0.0;
  std::vector<std::vector<std::vector<Vec2>>> polygons;  // [obstacle][k][vertex]
};

enum class RunOutcome { arrived, timeout, aborted };

struct SimLog {
  std::vector<StepRecord> steps;
  RunOutcome outcome = RunOutcome::timeout;
  double arrival_time_s = 0.0;  ///< valid when outcome == arrived
  std::string abort_reason;
  int certificate_checks = 0;    ///< robust certificates examined (slack < 1e-6)
  int certificate_failures = 0;  ///< geometric soundness failures among them
  std::vector<OccupancyFrame> set_dump;
};

struct Metrics {
  double energy_Wh = 0.0;         ///< (gamma_0 - gamma_end) E_b
  std::optional<double> travel_time_s;
  bool arrived = false;
  std::optional<double> min_d_eo_m;
  double lateral_dissipation_Wh = 0.0;
  double regen_Wh = 0.0;
  int violations = 0;
  double energy_double_entry_rel_err = 0.0;
  double distance_m = 0.0;  ///< arc length covered
};

/// True clearance between the EV point and an obstacle polygon.
double ground_truth_distance(const Vec2& ev_position, const std::vector<Vec2>& polygon);

/// Closed-loop receding-horizon run: sense obstacles, rebuild forecasts,
/// solve the horizon problem, apply the first input, repeat.
SimLog run_receding_horizon(const Scenario& scenario);

Metrics compute_metrics(const SimLog& log, const Scenario& scenario);

enum class CompareVerdict { pass, fail, error };

struct CompareOutcome {
  Metrics aware, unaware;
  SimLog log_aware, log_unaware;
  CompareVerdict verdict = CompareVerdict::error;
  std::string diagnostics;

  double energy_ratio() const {
    return unaware.energy_Wh != 0.0 ? aware.energy_Wh / unaware.energy_Wh : 1.0;
  }
};

/// Runs the scenario twice (energy-aware and energy-unaware) with identical
/// seeds and scripts. PASS requires both runs safe and arrived with
/// energy(aware) < energy(unaware).
CompareOutcome compare_schemes(const Scenario& scenario);

}  // namespace evnav::sim
