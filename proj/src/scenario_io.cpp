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

#include "evnav/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>

#include "evnav/fit.hpp"
#include "evnav/util.hpp"

namespace evnav::io {

using nlohmann::json;

namespace {

[[noreturn]] void missing(const std::string& path) {
  throw ValidationError("scenario is missing required field '" + path + "'");
}

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ValidationError("scenario section '" + section + "' must be an object");
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (ok.find(item.key()) == ok.end()) {
      throw ValidationError("unknown key '" + item.key() + "' in scenario section '" +
                            section + "'");
    }
  }
}

double require_number(const json& j, const std::string& section, const char* key) {
  if (!j.contains(key)) missing(section + "." + key);
  if (!j[key].is_number()) {
    throw ValidationError("scenario field '" + section + "." + key + "' must be a number");
  }
  return j[key].get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j[key].get<double>() : fallback;
}

Vec2 vec2_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("scenario field '" + path + "' must be [x, y]");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

json vec2_to(const Vec2& v) { return json::array({v.x(), v.y()}); }

VehicleParams parse_vehicle(const json& j) {
  VehicleParams p;
  if (j.is_null()) return p;
  check_keys(j, "vehicle",
             {"m_kg", "Iz_kgm2", "lF_m", "lR_m", "CF_N_per_rad", "CR_N_per_rad", "Nd",
              "rw_m", "eta_i", "eta_b", "Eb_kWh"});
  p.m = number_or(j, "m_kg", p.m);
  p.I_z = number_or(j, "Iz_kgm2", p.I_z);
  p.l_F = number_or(j, "lF_m", p.l_F);
  p.l_R = number_or(j, "lR_m", p.l_R);
  p.C_F = number_or(j, "CF_N_per_rad", p.C_F);
  p.C_R = number_or(j, "CR_N_per_rad", p.C_R);
  p.N_d = number_or(j, "Nd", p.N_d);
  p.r_w = number_or(j, "rw_m", p.r_w);
  p.eta_i = number_or(j, "eta_i", p.eta_i);
  p.eta_b = number_or(j, "eta_b", p.eta_b);
  p.E_b = number_or(j, "Eb_kWh", p.E_b / 3.6e6) * 3.6e6;  // stored in joules
  return p;
}

Bounds parse_bounds(const json& j) {
  Bounds b;
  if (j.is_null()) return b;
  check_keys(j, "bounds",
             {"a_min_mps2", "a_max_mps2", "d_min_mps2", "d_max_mps2", "delta_min_rad",
              "delta_max_rad", "vx_min_mps", "vx_max_mps", "ey_min_m", "ey_max_m",
              "gamma_min", "gamma_max"});
  b.a_min = number_or(j, "a_min_mps2", b.a_min);
  b.a_max = number_or(j, "a_max_mps2", b.a_max);
  b.d_min = number_or(j, "d_min_mps2", b.d_min);
  b.d_max = number_or(j, "d_max_mps2", b.d_max);
  b.delta_min = number_or(j, "delta_min_rad", b.delta_min);
  b.delta_max = number_or(j, "delta_max_rad", b.delta_max);
  b.v_x_min = number_or(j, "vx_min_mps", b.v_x_min);
  b.v_x_max = number_or(j, "vx_max_mps", b.v_x_max);
  b.e_y_min = number_or(j, "ey_min_m", b.e_y_min);
  b.e_y_max = number_or(j, "ey_max_m", b.e_y_max);
  b.gamma_min = number_or(j, "gamma_min", b.gamma_min);
  b.gamma_max = number_or(j, "gamma_max", b.gamma_max);
  return b;
}

MotorPowerModel parse_motor(const json& j) {
  MotorPowerModel m;
  if (j.is_null()) return m;
  check_keys(j, "motor", {"battery_poly_c", "torque_limit_xi", "loss"});
  if (j.contains("battery_poly_c")) {
    const auto& c = j["battery_poly_c"];
    if (!c.is_array() || c.size() != 7) {
      throw ValidationError("motor.battery_poly_c must hold 7 coefficients");
    }
    for (int i = 0; i < 7; ++i) m.c[static_cast<std::size_t>(i)] = c[i].get<double>();
  }
  if (j.contains("torque_limit_xi")) {
    const auto& xi = j["torque_limit_xi"];
    if (!xi.is_array() || xi.size() != 4) {
      throw ValidationError("motor.torque_limit_xi must hold 4 coefficients");
    }
    for (int i = 0; i < 4; ++i) m.xi[static_cast<std::size_t>(i)] = xi[i].get<double>();
  }
  if (j.contains("loss")) {
    const auto& l = j["loss"];
    check_keys(l, "motor.loss", {"kc_W_per_Nm2", "ki_Ws", "kw_Ws3", "kf_Ws2", "k0_W"});
    m.k_c = number_or(l, "kc_W_per_Nm2", m.k_c);
    m.k_i = number_or(l, "ki_Ws", m.k_i);
    m.k_w = number_or(l, "kw_Ws3", m.k_w);
    m.k_f = number_or(l, "kf_Ws2", m.k_f);
    m.k_0 = number_or(l, "k0_W", m.k_0);
  }
  return m;
}

RoadModel parse_road(const json& j) {
  if (j.is_null()) missing("road");
  check_keys(j, "road", {"k1_per_m3", "k2_per_m2", "k3_per_m", "fit_samples_s_rho"});
  RoadModel road;
  if (j.contains("fit_samples_s_rho")) {
    std::vector<std::array<double, 2>> samples;
    for (const auto& row : j["fit_samples_s_rho"]) {
      if (!row.is_array() || row.size() != 2) {
        throw ValidationError("road.fit_samples_s_rho rows must be [s_x, rho]");
      }
      samples.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    const auto fitres = fit::fit_curvature(samples);
    road.k1 = fitres.coeffs[0];
    road.k2 = fitres.coeffs[1];
    road.k3 = fitres.coeffs[2];
  } else {
    road.k1 = number_or(j, "k1_per_m3", 0.0);
    road.k2 = number_or(j, "k2_per_m2", 0.0);
    road.k3 = number_or(j, "k3_per_m", 0.0);
  }
  return road;
}

VehicleState parse_state(const json& j, const std::string& section) {
  check_keys(j, section,
             {"sx_m", "ey_m", "epsi_rad", "vx_mps", "vy_mps", "r_radps", "gamma", "px_m",
              "py_m", "psi_rad"});
  VehicleState x;
  x.s_x = require_number(j, section, "sx_m");
  x.e_y = require_number(j, section, "ey_m");
  x.e_psi = number_or(j, "epsi_rad", 0.0);
  x.v_x = require_number(j, section, "vx_mps");
  x.v_y = number_or(j, "vy_mps", 0.0);
  x.r = number_or(j, "r_radps", 0.0);
  x.gamma = require_number(j, section, "gamma");
  x.p_x = require_number(j, section, "px_m");
  x.p_y = require_number(j, section, "py_m");
  x.psi = number_or(j, "psi_rad", 0.0);
  return x;
}

obstacles::ObstacleScript parse_script(const json& j, const std::string& section) {
  if (!j.contains("kind")) missing(section + ".kind");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "static") {
    check_keys(j, section, {"kind", "center_m"});
    if (!j.contains("center_m")) missing(section + ".center_m");
    return obstacles::ObstacleScript(
        obstacles::StaticScript{vec2_from(j["center_m"], section + ".center_m")});
  }
  if (kind == "accel_profile") {
    check_keys(j, section, {"kind", "start_m", "heading_rad", "v0_mps", "phases"});
    obstacles::AccelProfileScript s;
    if (!j.contains("start_m")) missing(section + ".start_m");
    s.start = vec2_from(j["start_m"], section + ".start_m");
    s.heading = number_or(j, "heading_rad", 0.0);
    s.v0 = require_number(j, section, "v0_mps");
    if (j.contains("phases")) {
      for (const auto& ph : j["phases"]) {
        check_keys(ph, section + ".phases[]", {"accel_mps2", "duration_s"});
        s.phases.push_back({require_number(ph, section + ".phases[]", "accel_mps2"),
                            require_number(ph, section + ".phases[]", "duration_s")});
      }
    }
    return obstacles::ObstacleScript(std::move(s));
  }
  if (kind == "waypoints") {
    check_keys(j, section, {"kind", "points_m", "speeds_mps"});
    obstacles::WaypointScript s;
    if (!j.contains("points_m")) missing(section + ".points_m");
    for (const auto& pt : j["points_m"]) {
      s.points.push_back(vec2_from(pt, section + ".points_m[]"));
    }
    if (j.contains("speeds_mps")) {
      for (const auto& v : j["speeds_mps"]) s.speeds.push_back(v.get<double>());
    }
    return obstacles::ObstacleScript(std::move(s));
  }
  throw ValidationError("unknown obstacle script kind '" + kind + "' in " + section);
}

json script_to_json(const obstacles::ObstacleScript& script) {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, obstacles::StaticScript>) {
          j["kind"] = "static";
          j["center_m"] = vec2_to(s.center);
        } else if constexpr (std::is_same_v<T, obstacles::AccelProfileScript>) {
          j["kind"] = "accel_profile";
          j["start_m"] = vec2_to(s.start);
          j["heading_rad"] = s.heading;
          j["v0_mps"] = s.v0;
          json phases = json::array();
          for (const auto& ph : s.phases) {
            phases.push_back({{"accel_mps2", ph.accel}, {"duration_s", ph.duration}});
          }
          j["phases"] = phases;
        } else {
          j["kind"] = "waypoints";
          json pts = json::array();
          for (const auto& p : s.points) pts.push_back(vec2_to(p));
          j["points_m"] = pts;
          j["speeds_mps"] = s.speeds;
        }
      },
      script.program());
  return j;
}

}  // namespace

sim::Scenario scenario_from_json(const json& j) {
  check_keys(j, "(root)",
             {"name", "vehicle", "bounds", "motor", "road", "ev", "obstacles", "controller",
              "sim"});
  sim::Scenario s;
  s.name = j.contains("name") ? j["name"].get<std::string>() : "scenario";
  s.params = parse_vehicle(j.value("vehicle", json()));
  s.bounds = parse_bounds(j.value("bounds", json()));
  s.motor = parse_motor(j.value("motor", json()));
  if (!j.contains("road")) missing("road");
  s.road = parse_road(j["road"]);

  if (!j.contains("ev")) missing("ev");
  const json& ev = j["ev"];
  check_keys(ev, "ev", {"initial_state", "x_dest"});
  if (!ev.contains("initial_state")) missing("ev.initial_state");
  s.x0 = parse_state(ev["initial_state"], "ev.initial_state");
  if (!ev.contains("x_dest")) missing("ev.x_dest");
  const auto& xd = ev["x_dest"];
  if (!xd.is_array() || xd.size() != 10) {
    throw ValidationError("ev.x_dest must be a 10-vector in state order");
  }
  for (int i = 0; i < 10; ++i) s.dest.x_dest[i] = xd[i].get<double>();
  s.dest.s_x_dest = s.dest.x_dest[StateIdx::s_x];
  s.dest.e_y_dest = s.dest.x_dest[StateIdx::e_y];
  s.dest.gamma_max = s.bounds.gamma_max;

  if (j.contains("obstacles")) {
    int idx = 0;
    for (const auto& jo : j["obstacles"]) {
      const std::string section = "obstacles[" + std::to_string(idx) + "]";
      check_keys(jo, section,
                 {"name", "length_m", "width_m", "heading_rad", "d_safe_m",
                  "jitter_halfwidth_m", "script"});
      sim::ObstacleSpec spec;
      spec.name = jo.contains("name") ? jo["name"].get<std::string>()
                                      : "obstacle_" + std::to_string(idx);
      spec.length = require_number(jo, section, "length_m");
      spec.width = require_number(jo, section, "width_m");
      spec.heading = number_or(jo, "heading_rad", 0.0);
      spec.d_safe = number_or(jo, "d_safe_m", 2.0);
      if (jo.contains("jitter_halfwidth_m")) {
        spec.jitter_halfwidth =
            vec2_from(jo["jitter_halfwidth_m"], section + ".jitter_halfwidth_m");
      }
      if (!jo.contains("script")) missing(section + ".script");
      spec.script = parse_script(jo["script"], section + ".script");
      s.obstacles.push_back(std::move(spec));
      ++idx;
    }
  }

  if (!j.contains("controller")) missing("controller");
  const json& c = j["controller"];
  check_keys(c, "controller",
             {"N", "Ns", "Ts_s", "epsilon", "beta", "energy_aware", "cost_form",
              "kinematics", "weights", "solver"});
  if (!c.contains("N")) missing("controller.N");
  s.N = c["N"].get<int>();
  if (!c.contains("Ns")) missing("controller.Ns");
  s.N_s = c["Ns"].get<int>();
  s.T_s = require_number(c, "controller", "Ts_s");
  s.epsilon = number_or(c, "epsilon", 0.1);
  s.beta = number_or(c, "beta", 0.1);
  s.weights.energy_aware = c.value("energy_aware", true);
  if (c.contains("cost_form")) {
    const std::string form = c["cost_form"].get<std::string>();
    if (form == "normalized") {
      s.weights.form = ocp::CostForm::normalized;
    } else if (form == "compact") {
      s.weights.form = ocp::CostForm::compact;
    } else {
      throw ValidationError("controller.cost_form must be 'normalized' or 'compact'");
    }
  }
  if (c.contains("kinematics")) {
    const std::string variant = c["kinematics"].get<std::string>();
    if (variant == "standard") {
      s.variant = dyn::KinematicsVariant::standard;
    } else if (variant == "transposed") {
      s.variant = dyn::KinematicsVariant::transposed;
    } else {
      throw ValidationError("controller.kinematics must be 'standard' or 'transposed'");
    }
  }
  if (c.contains("weights")) {
    const json& w = c["weights"];
    check_keys(w, "controller.weights",
               {"Q1", "Q2", "Q3", "R1", "R2", "R3", "P1", "P2", "Ws", "ey_max_m",
                "epsi_max_rad"});
    s.weights.Q1 = number_or(w, "Q1", s.weights.Q1);
    s.weights.Q2 = number_or(w, "Q2", s.weights.Q2);
    s.weights.Q3 = number_or(w, "Q3", s.weights.Q3);
    s.weights.R1 = number_or(w, "R1", s.weights.R1);
    s.weights.R2 = number_or(w, "R2", s.weights.R2);
    s.weights.R3 = number_or(w, "R3", s.weights.R3);
    s.weights.P1 = number_or(w, "P1", s.weights.P1);
    s.weights.P2 = number_or(w, "P2", s.weights.P2);
    s.weights.W_s = number_or(w, "Ws", s.weights.W_s);
    s.weights.e_y_max = number_or(w, "ey_max_m", s.weights.e_y_max);
    s.weights.e_psi_max = number_or(w, "epsi_max_rad", s.weights.e_psi_max);
  }
  // Input normalizers follow the configured bounds.
  s.weights.a_max = s.bounds.a_max;
  s.weights.delta_max = s.bounds.delta_max;
  s.weights.d_min = s.bounds.d_min;
  s.solver.kkt_tol = 1e-8;
  s.solver.max_iter = 250;
  if (c.contains("solver")) {
    const json& so = c["solver"];
    check_keys(so, "controller.solver", {"kkt_tol", "max_iter", "warm_start"});
    s.solver.kkt_tol = number_or(so, "kkt_tol", s.solver.kkt_tol);
    s.solver.max_iter = so.value("max_iter", s.solver.max_iter);
    s.solver.warm_start = so.value("warm_start", s.solver.warm_start);
  }

  if (!j.contains("sim")) missing("sim");
  const json& sj = j["sim"];
  check_keys(sj, "sim",
             {"max_time_s", "arrival_tol_sx_m", "arrival_tol_ey_m", "jitter_seed",
              "dump_sets"});
  s.max_time_s = require_number(sj, "sim", "max_time_s");
  s.arrival_tol_s_x = number_or(sj, "arrival_tol_sx_m", 1.0);
  s.arrival_tol_e_y = number_or(sj, "arrival_tol_ey_m", 0.5);
  s.jitter_seed = sj.value("jitter_seed", std::uint64_t{1});
  s.dump_sets = sj.value("dump_sets", false);

  s.validate();
  return s;
}

sim::Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

json scenario_to_json(const sim::Scenario& s) {
  json j;
  j["name"] = s.name;
  j["vehicle"] = {{"m_kg", s.params.m},
                  {"Iz_kgm2", s.params.I_z},
                  {"lF_m", s.params.l_F},
                  {"lR_m", s.params.l_R},
                  {"CF_N_per_rad", s.params.C_F},
                  {"CR_N_per_rad", s.params.C_R},
                  {"Nd", s.params.N_d},
                  {"rw_m", s.params.r_w},
                  {"eta_i", s.params.eta_i},
                  {"eta_b", s.params.eta_b},
                  {"Eb_kWh", s.params.E_b / 3.6e6}};
  j["bounds"] = {{"a_min_mps2", s.bounds.a_min},     {"a_max_mps2", s.bounds.a_max},
                 {"d_min_mps2", s.bounds.d_min},     {"d_max_mps2", s.bounds.d_max},
                 {"delta_min_rad", s.bounds.delta_min}, {"delta_max_rad", s.bounds.delta_max},
                 {"vx_min_mps", s.bounds.v_x_min},   {"vx_max_mps", s.bounds.v_x_max},
                 {"ey_min_m", s.bounds.e_y_min},     {"ey_max_m", s.bounds.e_y_max},
                 {"gamma_min", s.bounds.gamma_min},  {"gamma_max", s.bounds.gamma_max}};
  j["motor"] = {{"battery_poly_c", s.motor.c},
                {"torque_limit_xi", s.motor.xi},
                {"loss",
                 {{"kc_W_per_Nm2", s.motor.k_c},
                  {"ki_Ws", s.motor.k_i},
                  {"kw_Ws3", s.motor.k_w},
                  {"kf_Ws2", s.motor.k_f},
                  {"k0_W", s.motor.k_0}}}};
  j["road"] = {{"k1_per_m3", s.road.k1}, {"k2_per_m2", s.road.k2}, {"k3_per_m", s.road.k3}};
  j["ev"] = {{"initial_state",
              {{"sx_m", s.x0.s_x},
               {"ey_m", s.x0.e_y},
               {"epsi_rad", s.x0.e_psi},
               {"vx_mps", s.x0.v_x},
               {"vy_mps", s.x0.v_y},
               {"r_radps", s.x0.r},
               {"gamma", s.x0.gamma},
               {"px_m", s.x0.p_x},
               {"py_m", s.x0.p_y},
               {"psi_rad", s.x0.psi}}},
             {"x_dest", std::vector<double>(s.dest.x_dest.data(), s.dest.x_dest.data() + 10)}};
  json obstacles = json::array();
  for (const auto& o : s.obstacles) {
    obstacles.push_back({{"name", o.name},
                         {"length_m", o.length},
                         {"width_m", o.width},
                         {"heading_rad", o.heading},
                         {"d_safe_m", o.d_safe},
                         {"jitter_halfwidth_m", vec2_to(o.jitter_halfwidth)},
                         {"script", script_to_json(o.script)}});
  }
  j["obstacles"] = obstacles;
  j["controller"] = {
      {"N", s.N},
      {"Ns", s.N_s},
      {"Ts_s", s.T_s},
      {"epsilon", s.epsilon},
      {"beta", s.beta},
      {"energy_aware", s.weights.energy_aware},
      {"cost_form", s.weights.form == ocp::CostForm::normalized ? "normalized" : "compact"},
      {"kinematics",
       s.variant == dyn::KinematicsVariant::standard ? "standard" : "transposed"},
      {"weights",
       {{"Q1", s.weights.Q1},
        {"Q2", s.weights.Q2},
        {"Q3", s.weights.Q3},
        {"R1", s.weights.R1},
        {"R2", s.weights.R2},
        {"R3", s.weights.R3},
        {"P1", s.weights.P1},
        {"P2", s.weights.P2},
        {"Ws", s.weights.W_s},
        {"ey_max_m", s.weights.e_y_max},
        {"epsi_max_rad", s.weights.e_psi_max}}},
      {"solver",
       {{"kkt_tol", s.solver.kkt_tol},
        {"max_iter", s.solver.max_iter},
        {"warm_start", s.solver.warm_start}}}};
  j["sim"] = {{"max_time_s", s.max_time_s},
              {"arrival_tol_sx_m", s.arrival_tol_s_x},
              {"arrival_tol_ey_m", s.arrival_tol_e_y},
              {"jitter_seed", s.jitter_seed},
              {"dump_sets", s.dump_sets}};
  return j;
}

void save_scenario(const sim::Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write scenario file '" + path + "'");
  out << scenario_to_json(scenario).dump(2) << "\n";
}

const char* status_name(ocp::HorizonStatus status) {
  switch (status) {
    case ocp::HorizonStatus::converged: return "converged";
    case ocp::HorizonStatus::max_iter: return "max_iter";
    case ocp::HorizonStatus::infeasible_relaxed: return "infeasible_relaxed";
    case ocp::HorizonStatus::numeric_error: return "numeric_error";
  }
  return "unknown";
}

const char* verdict_name(sim::CompareVerdict verdict) {
  switch (verdict) {
    case sim::CompareVerdict::pass: return "PASS";
    case sim::CompareVerdict::fail: return "FAIL";
    case sim::CompareVerdict::error: return "ERROR";
  }
  return "unknown";
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string csv_header(int num_obstacles) {
  std::string h = "t,s_x,e_y,e_psi,v_x,v_y,r,gamma,p_x,p_y,psi,a,delta,d,P_b,P_lat";
  for (int m = 1; m <= num_obstacles; ++m) h += ",d_EO_" + std::to_string(m);
  h += ",slack_sum,solver_status,solve_ms";
  return h;
}

void write_trajectory_csv(std::ostream& os, const sim::SimLog& log) {
  const int M = log.steps.empty() ? 0 : static_cast<int>(log.steps.front().d_eo.size());
  os << csv_header(M) << "\n";
  for (const auto& rec : log.steps) {
    const StateVec x = rec.state.vec();
    os << fmt_double(rec.t);
    for (int i = 0; i < 10; ++i) os << ',' << fmt_double(x[i]);
    os << ',' << fmt_double(rec.input.a) << ',' << fmt_double(rec.input.delta) << ','
       << fmt_double(rec.input.d) << ',' << fmt_double(rec.P_b) << ','
       << fmt_double(rec.P_lat);
    for (const double d : rec.d_eo) os << ',' << fmt_double(d);
    os << ',' << fmt_double(rec.slack_sum) << ',' << status_name(rec.solver_status) << ','
       << fmt_double(rec.solve_ms);
    os << "\n";
  }
}

json metrics_to_json(const sim::Metrics& metrics, const sim::SimLog& log) {
  json j;
  j["energy_Wh"] = metrics.energy_Wh;
  j["travel_time_s"] =
      metrics.travel_time_s.has_value() ? json(*metrics.travel_time_s) : json(nullptr);
  j["arrived"] = metrics.arrived;
  j["min_d_EO_m"] = metrics.min_d_eo_m.has_value() ? json(*metrics.min_d_eo_m) : json(nullptr);
  j["lateral_dissipation_Wh"] = metrics.lateral_dissipation_Wh;
  j["regen_Wh"] = metrics.regen_Wh;
  j["violations"] = metrics.violations;
  j["energy_double_entry_rel_err"] = metrics.energy_double_entry_rel_err;
  j["distance_m"] = metrics.distance_m;
  switch (log.outcome) {
    case sim::RunOutcome::arrived: j["outcome"] = "arrived"; break;
    case sim::RunOutcome::timeout: j["outcome"] = "timeout"; break;
    case sim::RunOutcome::aborted: j["outcome"] = "aborted"; break;
  }
  j["certificate_checks"] = log.certificate_checks;
  j["certificate_failures"] = log.certificate_failures;
  if (!log.abort_reason.empty()) j["abort_reason"] = log.abort_reason;
  return j;
}

json comparison_to_json(const sim::CompareOutcome& outcome) {
  json j;
  j["aware"] = metrics_to_json(outcome.aware, outcome.log_aware);
  j["unaware"] = metrics_to_json(outcome.unaware, outcome.log_unaware);
  j["energy_ratio"] = outcome.energy_ratio();
  if (outcome.aware.travel_time_s.has_value() && outcome.unaware.travel_time_s.has_value() &&
      *outcome.unaware.travel_time_s > 0.0) {
    j["time_ratio"] = *outcome.aware.travel_time_s / *outcome.unaware.travel_time_s;
  } else {
    j["time_ratio"] = nullptr;
  }
  j["verdict"] = verdict_name(outcome.verdict);
  j["diagnostics"] = outcome.diagnostics;
  return j;
}

json sets_dump_to_json(const sim::SimLog& log) {
  json frames = json::array();
  for (const auto& frame : log.set_dump) {
    json jf;
    jf["t"] = frame.t;
    json obstacles = json::array();
    for (const auto& per_k : frame.polygons) {
      json steps = json::array();
      for (const auto& poly : per_k) {
        json verts = json::array();
        for (const Vec2& v : poly) verts.push_back(vec2_to(v));
        steps.push_back(verts);
      }
      obstacles.push_back(steps);
    }
    jf["obstacles"] = obstacles;
    frames.push_back(jf);
  }
  return frames;
}

}  // namespace evnav::io
