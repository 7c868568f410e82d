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

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "evnav/simulate.hpp"

namespace evnav::io {

/// Parses a scenario document. Unknown keys are rejected; missing required
/// keys raise ValidationError naming the field. Units are part of the key
/// names (…_m, …_mps, Ts_s, Eb_kWh, …).
sim::Scenario scenario_from_json(const nlohmann::json& j);
sim::Scenario load_scenario(const std::string& path);

/// Full serialization; load(save(s)) reproduces the in-memory scenario.
nlohmann::json scenario_to_json(const sim::Scenario& scenario);
void save_scenario(const sim::Scenario& scenario, const std::string& path);

/// Trajectory CSV: one row per control step, fixed column order
///   t, s_x, e_y, e_psi, v_x, v_y, r, gamma, p_x, p_y, psi,
///   a, delta, d, P_b, P_lat, d_EO_1..M, slack_sum, solver_status, solve_ms
std::string csv_header(int num_obstacles);
void write_trajectory_csv(std::ostream& os, const sim::SimLog& log);

nlohmann::json metrics_to_json(const sim::Metrics& metrics, const sim::SimLog& log);
nlohmann::json comparison_to_json(const sim::CompareOutcome& outcome);

/// Forecast occupancy polygons per step (plotting aid; large).
nlohmann::json sets_dump_to_json(const sim::SimLog& log);

const char* status_name(ocp::HorizonStatus status);
const char* verdict_name(sim::CompareVerdict verdict);

}  // namespace evnav::io
