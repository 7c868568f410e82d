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

#include "evnav/simulate.hpp"

#include <cmath>
#include <string>

#include "evnav/avoidance.hpp"
#include "evnav/geometry.hpp"
#include "evnav/uncertainty.hpp"
#include "evnav/util.hpp"

namespace evnav::sim {

namespace {

constexpr double kCertificateSlackThreshold = 1e-6;
constexpr double kCertificateFeasTol = 1e-6;

Vec2 jitter_offset(const ObstacleSpec& spec, std::uint64_t seed, std::size_t obstacle_idx,
                   long step) {
  if (spec.jitter_halfwidth.isZero()) return Vec2::Zero();
  const std::uint64_t base =
      splitmix64(seed + 0x9E3779B97F4A7C15ull * (obstacle_idx + 1));
  const std::uint64_t h1 = splitmix64(base ^ (0xD1B54A32D192ED03ull * (step + 1)));
  const std::uint64_t h2 = splitmix64(h1 ^ 0xA0761D6478BD642Full);
  return Vec2(spec.jitter_halfwidth.x() * hash_to_symmetric_unit(h1),
              spec.jitter_halfwidth.y() * hash_to_symmetric_unit(h2));
}

}  // namespace

void Scenario::validate() const {
  params.validate();
  bounds.validate();
  dyn::validate_power_loss(motor);
  if (N < 1) throw ValidationError("controller horizon N must be >= 1");
  if (N_s < 2) throw ValidationError("sample window N_s must be >= 2");
  if (!(T_s > 0.0)) throw ValidationError("T_s must be > 0");
  if (!(max_time_s > 0.0)) throw ValidationError("max_time_s must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw ValidationError("epsilon and beta must lie in (0, 1)");
  }
  if (dest.s_x_dest == 0.0) throw ValidationError("destination s_x must be nonzero");
  for (const auto& o : obstacles) {
    if (!(o.length > 0.0) || !(o.width > 0.0)) {
      throw ValidationError("obstacle dimensions must be positive");
    }
    if (!(o.d_safe > 0.0)) throw ValidationError("d_safe must be positive");
  }
  const int required = uncertainty::required_sample_count(epsilon, beta, 2);
  if (N_s < required) {
    log::warn("N_s = " + std::to_string(N_s) + " is below the sample bound " +
              std::to_string(required) + " for epsilon=" + std::to_string(epsilon) +
              ", beta=" + std::to_string(beta));
  }
}

double ground_truth_distance(const Vec2& ev_position, const std::vector<Vec2>& polygon) {
  return geom::distance_point_to_polygon(ev_position, polygon);
}

SimLog run_receding_horizon(const Scenario& scenario) {
  scenario.validate();
  SimLog log;
  const int M = static_cast<int>(scenario.obstacles.size());
  const std::size_t capacity =
      static_cast<std::size_t>(scenario.N_s) + static_cast<std::size_t>(scenario.N);

  std::vector<obstacles::ObstacleTrack> tracks;
  tracks.reserve(static_cast<std::size_t>(M));
  for (int m = 0; m < M; ++m) tracks.emplace_back(capacity, scenario.T_s);

  VehicleState state = scenario.x0;
  ocp::HorizonSolution previous;
  bool have_previous = false;

  const long max_steps = std::lround(scenario.max_time_s / scenario.T_s);
  for (long step = 0;; ++step) {
    const double t = static_cast<double>(step) * scenario.T_s;

    StepRecord rec;
    rec.t = t;
    rec.state = state;
    rec.obstacle_positions.resize(static_cast<std::size_t>(M));
    rec.d_eo.resize(static_cast<std::size_t>(M));

    // Sense: scripted ground truth plus jitter, recorded into the tracks.
    std::vector<obstacles::ObstaclePolytope> true_polys(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
      const auto& spec = scenario.obstacles[static_cast<std::size_t>(m)];
      const Vec2 pos = spec.script.position(t) +
                       jitter_offset(spec, scenario.jitter_seed,
                                     static_cast<std::size_t>(m), step);
      tracks[static_cast<std::size_t>(m)].record_position(pos, t);
      rec.obstacle_positions[static_cast<std::size_t>(m)] = pos;
      true_polys[static_cast<std::size_t>(m)] =
          obstacles::rectangle_halfspaces(pos, spec.heading, spec.length, spec.width);
      rec.d_eo[static_cast<std::size_t>(m)] =
          ground_truth_distance(state.position(),
                                true_polys[static_cast<std::size_t>(m)].vertices());
    }

    const bool arrived = std::abs(state.s_x - scenario.dest.s_x_dest) < scenario.arrival_tol_s_x &&
                         std::abs(state.e_y - scenario.dest.e_y_dest) < scenario.arrival_tol_e_y;
    if (arrived || step >= max_steps) {
      rec.applied = false;
      const auto [tau, omega] = dyn::motor_operating_point(state, 0.0, scenario.params);
      rec.P_b = dyn::battery_power(tau, omega, scenario.motor);
      rec.P_lat = dyn::lateral_dissipation(state, ControlInput{}, scenario.params);
      rec.solver_status = ocp::HorizonStatus::converged;
      log.steps.push_back(std::move(rec));
      log.outcome = arrived ? RunOutcome::arrived : RunOutcome::timeout;
      if (arrived) log.arrival_time_s = t;
      break;
    }

    // Forecast and plan.
    std::vector<ocp::ObstacleConstraint> constraints;
    constraints.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
      ocp::ObstacleConstraint oc;
      oc.forecast = obstacles::forecast_occupancy(tracks[static_cast<std::size_t>(m)],
                                                  true_polys[static_cast<std::size_t>(m)],
                                                  scenario.N, scenario.N_s);
      oc.d_safe = scenario.obstacles[static_cast<std::size_t>(m)].d_safe;
      constraints.push_back(std::move(oc));
    }

    if (scenario.dump_sets) {
      OccupancyFrame frame;
      frame.t = t;
      frame.polygons.resize(static_cast<std::size_t>(M));
      for (int m = 0; m < M; ++m) {
        auto& per_k = frame.polygons[static_cast<std::size_t>(m)];
        per_k.resize(static_cast<std::size_t>(scenario.N));
        const auto base_verts = constraints[static_cast<std::size_t>(m)].forecast.base.vertices();
        for (int k = 1; k <= scenario.N; ++k) {
          const auto& set = constraints[static_cast<std::size_t>(m)].forecast.step(k);
          per_k[static_cast<std::size_t>(k - 1)] = geom::minkowski_sum_convex(
              base_verts, geom::polytope_vertices(set.G, set.h));
        }
      }
      log.set_dump.push_back(std::move(frame));
    }

    ocp::OcpNlp problem(state, constraints, scenario.weights, scenario.dest, scenario.bounds,
                        scenario.params, scenario.motor, scenario.road, scenario.N,
                        scenario.T_s, scenario.variant);
    const ocp::HorizonSolution sol =
        problem.solve(scenario.solver, have_previous ? &previous : nullptr);

    if (sol.status == ocp::HorizonStatus::numeric_error) {
      rec.applied = false;
      rec.solver_status = sol.status;
      log.steps.push_back(std::move(rec));
      log.outcome = RunOutcome::aborted;
      log.abort_reason = "solver numeric error at t=" + std::to_string(t);
      log::error(log.abort_reason);
      break;
    }
    if (sol.status == ocp::HorizonStatus::max_iter) {
      log::warn("horizon solve hit the iteration budget at t=" + std::to_string(t) +
                " (kkt " + std::to_string(sol.kkt.max()) + "); applying best iterate");
    }

    // Certificate soundness audit for successfully certified blocks.
    if (sol.status != ocp::HorizonStatus::max_iter) {
      for (int m = 0; m < M; ++m) {
        const auto& fc = constraints[static_cast<std::size_t>(m)].forecast;
        for (int j = 0; j < scenario.N; ++j) {
          if (sol.slacks(m, j) >= kCertificateSlackThreshold) continue;
          ++log.certificate_checks;
          avoid::RobustConstraintBlock block;
          block.A = fc.base.A;
          block.b = fc.base.b;
          const auto& set = fc.step_sets[static_cast<std::size_t>(j)];
          block.G = set.G;
          block.h = set.h;
          block.d_safe = scenario.obstacles[static_cast<std::size_t>(m)].d_safe;
          block.slack = sol.slacks(m, j);
          avoid::DualVariables duals;
          duals.lambda = sol.lambdas[static_cast<std::size_t>(m)].col(j);
          duals.mu = sol.mus[static_cast<std::size_t>(m)].col(j);
          const Vec2 p = sol.states[static_cast<std::size_t>(j + 1)].position();
          const Eigen::VectorXd res = avoid::robust_residuals(p, duals, block);
          if (res.minCoeff() < -kCertificateFeasTol) {
            ++log.certificate_failures;
            continue;
          }
          const auto occupancy = geom::minkowski_sum_convex(
              fc.base.vertices(), geom::polytope_vertices(set.G, set.h));
          const double dist = geom::distance_point_to_convex_set(p, occupancy);
          if (dist < block.d_safe - 1e-6) ++log.certificate_failures;
        }
      }
    }

    const ControlInput u0 = sol.inputs.front();
    rec.input = u0;
    rec.applied = true;
    const auto [tau, omega] = dyn::motor_operating_point(state, u0.a, scenario.params);
    rec.P_b = dyn::battery_power(tau, omega, scenario.motor);
    rec.P_lat = dyn::lateral_dissipation(state, u0, scenario.params);
    rec.solver_status = sol.status;
    rec.slack_sum = sol.slacks.size() > 0 ? sol.slacks.sum() : 0.0;
    rec.solve_ms = sol.wall_time_s * 1e3;
    log.steps.push_back(std::move(rec));

    state = dyn::euler_step(state, u0, scenario.T_s, scenario.params, scenario.motor,
                            scenario.road, scenario.variant);
    previous = sol;
    have_previous = true;
  }
  return log;
}

Metrics compute_metrics(const SimLog& log, const Scenario& scenario) {
  if (log.steps.empty()) throw ValidationError("compute_metrics needs a nonempty log");
  Metrics metrics;
  const double gamma0 = log.steps.front().state.gamma;
  const double gamma_end = log.steps.back().state.gamma;
  metrics.energy_Wh = (gamma0 - gamma_end) * scenario.params.E_b / 3600.0;
  metrics.arrived = log.outcome == RunOutcome::arrived;
  if (metrics.arrived) metrics.travel_time_s = log.arrival_time_s;
  metrics.distance_m = log.steps.back().state.s_x - log.steps.front().state.s_x;

  double power_sum = 0.0;
  double abs_power_sum = 0.0;
  for (const auto& rec : log.steps) {
    if (rec.applied) {
      power_sum += scenario.T_s * rec.P_b;
      abs_power_sum += scenario.T_s * std::abs(rec.P_b);
      metrics.lateral_dissipation_Wh += scenario.T_s * rec.P_lat / 3600.0;
      metrics.regen_Wh += scenario.T_s * std::max(0.0, -rec.P_b) / 3600.0;
    }
    bool violated = false;
    for (std::size_t m = 0; m < rec.d_eo.size(); ++m) {
      if (rec.d_eo[m] < scenario.obstacles[m].d_safe) violated = true;
    }
    if (violated) ++metrics.violations;
    if (!rec.d_eo.empty()) {
      const double step_min = *std::min_element(rec.d_eo.begin(), rec.d_eo.end());
      metrics.min_d_eo_m = metrics.min_d_eo_m.has_value()
                               ? std::min(*metrics.min_d_eo_m, step_min)
                               : step_min;
    }
  }
  const double from_state = (gamma0 - gamma_end) * scenario.params.E_b;
  const double from_power = scenario.params.eta_b * power_sum;
  metrics.energy_double_entry_rel_err =
      std::abs(from_state - from_power) / std::max(1.0, std::abs(abs_power_sum));
  return metrics;
}

CompareOutcome compare_schemes(const Scenario& scenario) {
  CompareOutcome out;
  Scenario aware = scenario;
  aware.weights.energy_aware = true;
  Scenario unaware = scenario;
  unaware.weights.energy_aware = false;

  out.log_aware = run_receding_horizon(aware);
  out.log_unaware = run_receding_horizon(unaware);

  if (out.log_aware.outcome == RunOutcome::aborted ||
      out.log_unaware.outcome == RunOutcome::aborted) {
    out.verdict = CompareVerdict::error;
    out.diagnostics = "run aborted: " + (out.log_aware.abort_reason.empty()
                                             ? out.log_unaware.abort_reason
                                             : out.log_aware.abort_reason);
    return out;
  }
  out.aware = compute_metrics(out.log_aware, aware);
  out.unaware = compute_metrics(out.log_unaware, unaware);

  std::string why;
  if (!out.aware.arrived) why += "energy-aware run did not arrive; ";
  if (!out.unaware.arrived) why += "energy-unaware run did not arrive; ";
  if (out.aware.violations > 0) {
    why += "energy-aware run has " + std::to_string(out.aware.violations) + " violations; ";
  }
  if (out.unaware.violations > 0) {
    why += "energy-unaware run has " + std::to_string(out.unaware.violations) +
           " violations; ";
  }
  if (why.empty() && !(out.aware.energy_Wh < out.unaware.energy_Wh)) {
    why += "no energy saving (" + std::to_string(out.aware.energy_Wh) + " vs " +
           std::to_string(out.unaware.energy_Wh) + " Wh); ";
  }
  out.verdict = why.empty() ? CompareVerdict::pass : CompareVerdict::fail;
  out.diagnostics = why;
  return out;
}

}  // namespace evnav::sim
