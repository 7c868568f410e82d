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
// Command line front end: scenario runs, scheme comparison, least-squares
// fits and uncertainty-set validation.
//
// Exit codes: 0 pass, 1 validation/usage error, 2 safety violation,
// 3 solver abort, 4 timeout before arrival.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "evnav/fit.hpp"
#include "evnav/scenario_io.hpp"
#include "evnav/simulate.hpp"
#include "evnav/uncertainty.hpp"
#include "evnav/util.hpp"

namespace fs = std::filesystem;
using namespace evnav;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitViolation = 2;
constexpr int kExitAbort = 3;
constexpr int kExitTimeout = 4;

struct RunOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::string energy_aware;  // "", "on", "off"
  std::optional<int> horizon;
  bool dump_sets = false;
  bool trace = false;
};

void add_common_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--scenario", opt.scenario_path, "Scenario file (JSON)")->required();
  cmd->add_option("--out", opt.out_dir, "Output directory");
  cmd->add_option("--seed", opt.seed, "Override the obstacle jitter seed");
  cmd->add_option("--energy-aware", opt.energy_aware,
                  "Override the energy-awareness flag (on|off)")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--horizon", opt.horizon, "Override the prediction horizon N");
  cmd->add_flag("--dump-sets", opt.dump_sets, "Write forecast occupancy polygons");
  cmd->add_flag("--trace", opt.trace, "Write per-iteration solver trace records");
}

// Solver trace sink shared across the receding-horizon solves.
struct TraceSink {
  std::ofstream file;
  long solve_counter = -1;
};

sim::Scenario load_with_overrides(const RunOptions& opt, TraceSink* sink) {
  sim::Scenario scenario = io::load_scenario(opt.scenario_path);
  if (opt.seed.has_value()) scenario.jitter_seed = *opt.seed;
  if (opt.horizon.has_value()) scenario.N = *opt.horizon;
  if (opt.energy_aware == "on") scenario.weights.energy_aware = true;
  if (opt.energy_aware == "off") scenario.weights.energy_aware = false;
  if (opt.dump_sets) scenario.dump_sets = true;
  if (opt.trace && sink != nullptr) {
    sink->file.open(fs::path(opt.out_dir) / "solver_trace.jsonl");
    scenario.solver.trace = [sink](int iter, double objective, double stationarity,
                                   double feasibility, double complementarity, double mu,
                                   double step) {
      if (iter == 0) ++sink->solve_counter;
      json line{{"solve", sink->solve_counter}, {"iter", iter},
                {"objective", objective},      {"stationarity", stationarity},
                {"feasibility", feasibility},  {"complementarity", complementarity},
                {"mu", mu},                    {"step", step}};
      sink->file << line.dump() << "\n";
    };
  }
  scenario.validate();
  return scenario;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << content;
}

void write_run_outputs(const fs::path& dir, const std::string& suffix,
                       const sim::SimLog& log, const sim::Metrics& metrics) {
  std::ostringstream csv;
  io::write_trajectory_csv(csv, log);
  write_text(dir / ("trajectory" + suffix + ".csv"), csv.str());
  write_text(dir / ("metrics" + suffix + ".json"),
             io::metrics_to_json(metrics, log).dump(2) + "\n");
  if (!log.set_dump.empty()) {
    write_text(dir / ("occupancy_sets" + suffix + ".json"),
               io::sets_dump_to_json(log).dump() + "\n");
  }
}

int exit_code_for(const sim::Scenario& scenario, const sim::SimLog& log,
                  const sim::Metrics& metrics) {
  if (log.outcome == sim::RunOutcome::aborted) {
    std::cerr << "run aborted: " << log.abort_reason << "\n";
    return kExitAbort;
  }
  if (metrics.violations > 0) {
    std::cerr << "safety violation: " << metrics.violations << " step(s) below d_safe";
    for (const auto& rec : log.steps) {
      bool violated = false;
      for (std::size_t m = 0; m < rec.d_eo.size(); ++m) {
        if (rec.d_eo[m] < scenario.obstacles[m].d_safe) violated = true;
      }
      if (violated) {
        std::cerr << ", first at t=" << rec.t << " s";
        break;
      }
    }
    std::cerr << "\n";
    return kExitViolation;
  }
  if (log.outcome == sim::RunOutcome::timeout) {
    std::cerr << "destination not reached within the time budget\n";
    return kExitTimeout;
  }
  return kExitOk;
}

int cmd_run(const RunOptions& opt) {
  TraceSink sink;
  const sim::Scenario scenario = load_with_overrides(opt, &sink);
  fs::create_directories(opt.out_dir);
  const sim::SimLog log = sim::run_receding_horizon(scenario);
  const sim::Metrics metrics = sim::compute_metrics(log, scenario);
  write_run_outputs(opt.out_dir, "", log, metrics);
  std::cout << io::metrics_to_json(metrics, log).dump(2) << "\n";
  return exit_code_for(scenario, log, metrics);
}

int cmd_compare(const RunOptions& opt) {
  TraceSink sink;
  const sim::Scenario scenario = load_with_overrides(opt, &sink);
  fs::create_directories(opt.out_dir);
  const sim::CompareOutcome outcome = sim::compare_schemes(scenario);
  write_run_outputs(opt.out_dir, "-aware", outcome.log_aware, outcome.aware);
  write_run_outputs(opt.out_dir, "-unaware", outcome.log_unaware, outcome.unaware);
  const json cj = io::comparison_to_json(outcome);
  write_text(fs::path(opt.out_dir) / "comparison.json", cj.dump(2) + "\n");
  std::cout << cj.dump(2) << "\n";
  switch (outcome.verdict) {
    case sim::CompareVerdict::pass:
      return kExitOk;
    case sim::CompareVerdict::fail: {
      const bool violation =
          outcome.aware.violations > 0 || outcome.unaware.violations > 0;
      std::cerr << "comparison FAIL: " << outcome.diagnostics << "\n";
      if (violation) return kExitViolation;
      return outcome.aware.arrived && outcome.unaware.arrived ? kExitValidation
                                                              : kExitTimeout;
    }
    case sim::CompareVerdict::error:
      std::cerr << "comparison ERROR: " << outcome.diagnostics << "\n";
      return kExitAbort;
  }
  return kExitAbort;
}

std::vector<std::vector<double>> read_table(const std::string& path, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line) {
      if (ch == ',' || ch == ';') ch = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;  // blank or comment-ish line
    if (row.size() != cols) {
      throw ValidationError("data row with " + std::to_string(row.size()) +
                            " columns, expected " + std::to_string(cols));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("data file '" + path + "' holds no samples");
  return rows;
}

int cmd_fit(const std::string& kind, const std::string& data_path,
            const std::string& out_dir) {
  fs::create_directories(out_dir);
  json fragment;
  double r_squared = 0.0;
  if (kind == "battery") {
    const auto rows = read_table(data_path, 3);
    std::vector<fit::BatteryPowerSample> samples;
    samples.reserve(rows.size());
    for (const auto& r : rows) samples.push_back({r[0], r[1], r[2]});
    const auto res = fit::fit_battery_power_model(samples);
    fragment["motor"]["battery_poly_c"] = res.model.c;
    r_squared = res.r_squared;
    std::cout << "battery power coefficients (c1..c7):";
    for (const double c : res.model.c) std::cout << " " << c;
    std::cout << "\nR^2 = " << r_squared << "\n";
  } else if (kind == "torque") {
    const auto rows = read_table(data_path, 2);
    std::vector<std::array<double, 2>> samples;
    for (const auto& r : rows) samples.push_back({r[0], r[1]});
    const auto res = fit::fit_torque_limit(samples);
    fragment["motor"]["torque_limit_xi"] =
        std::vector<double>(res.coeffs.data(), res.coeffs.data() + 4);
    r_squared = res.r_squared;
    std::cout << "torque limit coefficients (xi1..xi4): " << res.coeffs.transpose()
              << "\nR^2 = " << r_squared << "\n";
  } else if (kind == "curvature") {
    const auto rows = read_table(data_path, 2);
    std::vector<std::array<double, 2>> samples;
    for (const auto& r : rows) samples.push_back({r[0], r[1]});
    const auto res = fit::fit_curvature(samples);
    fragment["road"] = {{"k1_per_m3", res.coeffs[0]},
                        {"k2_per_m2", res.coeffs[1]},
                        {"k3_per_m", res.coeffs[2]}};
    r_squared = res.r_squared;
    std::cout << "curvature coefficients (k1..k3): " << res.coeffs.transpose()
              << "\nR^2 = " << r_squared << "\n";
  } else {
    throw ValidationError("unknown fit kind '" + kind + "'");
  }
  write_text(fs::path(out_dir) / ("fit_" + kind + ".json"), fragment.dump(2) + "\n");
  return kExitOk;
}

int cmd_validate_sets(double epsilon, double beta, int trials, std::uint64_t seed) {
  const auto result = uncertainty::validate_coverage(epsilon, beta, trials, 10000, seed);
  std::cout << "sample bound N_s = " << result.sample_count << "\n"
            << "trials with coverage >= " << (1.0 - epsilon) << ": " << result.successes
            << "/" << result.trials << " (required " << result.min_successes << ")\n"
            << "worst inside-fraction: " << result.worst_fraction << "\n"
            << "empirical confidence: "
            << static_cast<double>(result.successes) / result.trials << "\n"
            << (result.pass ? "PASS" : "FAIL") << "\n";
  return result.pass ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware collision-avoiding EV trajectory simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run one closed-loop scenario");
  add_common_options(run, run_opt);

  RunOptions cmp_opt;
  CLI::App* cmp =
      app.add_subcommand("compare", "Run the energy-aware and energy-unaware schemes");
  add_common_options(cmp, cmp_opt);

  std::string fit_kind, fit_data, fit_out = ".";
  CLI::App* fit_cmd = app.add_subcommand("fit", "Least-squares model fits");
  fit_cmd->add_option("kind", fit_kind, "battery | torque | curvature")
      ->required()
      ->check(CLI::IsMember({"battery", "torque", "curvature"}));
  fit_cmd->add_option("data", fit_data, "Sample file (rows in documented column order)")
      ->required();
  fit_cmd->add_option("--out", fit_out, "Output directory for the scenario fragment");

  double vs_epsilon = 0.1, vs_beta = 0.1;
  int vs_trials = 200;
  std::uint64_t vs_seed = 2026;
  CLI::App* vs = app.add_subcommand("validate-sets",
                                    "Monte-Carlo check of the coverage sample bound");
  vs->add_option("--epsilon", vs_epsilon, "Coverage miss probability, in (0,1)");
  vs->add_option("--beta", vs_beta, "Confidence miss probability, in (0,1)");
  vs->add_option("--trials", vs_trials, "Number of Monte-Carlo trials");
  vs->add_option("--seed", vs_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opt);
    if (cmp->parsed()) return cmd_compare(cmp_opt);
    if (fit_cmd->parsed()) return cmd_fit(fit_kind, fit_data, fit_out);
    if (vs->parsed()) return cmd_validate_sets(vs_epsilon, vs_beta, vs_trials, vs_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitAbort;
  }
  return kExitValidation;
}
