#include <cmath>

#include "doctest.h"
#include "evnav/ocp.hpp"
#include "evnav/util.hpp"
#include "support.hpp"

using namespace evnav;
using ocp::Destination;
using ocp::HorizonStatus;
using ocp::ObstacleConstraint;
using ocp::OcpNlp;
using ocp::OcpWeights;

namespace {

Destination dest_at(double s_x, double e_y) {
  Destination d;
  d.s_x_dest = s_x;
  d.e_y_dest = e_y;
  d.gamma_max = 0.9;
  d.x_dest.setZero();
  d.x_dest[StateIdx::s_x] = s_x;
  d.x_dest[StateIdx::e_y] = e_y;
  d.x_dest[StateIdx::gamma] = 0.9;
  return d;
}

VehicleState initial_state(double s_x, double e_y, double v_x) {
  VehicleState x;
  x.s_x = s_x;
  x.e_y = e_y;
  x.v_x = v_x;
  x.gamma = 0.88;  // strictly inside the battery box
  x.p_x = s_x;
  x.p_y = e_y;
  return x;
}

ObstacleConstraint static_obstacle(const Vec2& center, double length, double width,
                                   int horizon, double d_safe = 2.0) {
  ObstacleConstraint oc;
  oc.forecast.base = obstacles::rectangle_halfspaces(center, 0.0, length, width);
  for (int k = 0; k < horizon; ++k) {
    oc.forecast.step_sets.push_back(uncertainty::singleton_set(Vec2::Zero()));
    oc.forecast.under_sampled.push_back(false);
  }
  oc.d_safe = d_safe;
  return oc;
}

OcpNlp make_ocp(const VehicleState& x0, std::vector<ObstacleConstraint> obs,
                const Destination& dest, int N, OcpWeights w = {}) {
  return OcpNlp(x0, std::move(obs), w, dest, Bounds{}, VehicleParams{}, MotorPowerModel{},
                RoadModel{}, N, 0.1);
}

}  // namespace

TEST_CASE("stage cost") {
  OcpWeights w;
  const Destination dest = dest_at(170.0, 1.3);

  VehicleState x = initial_state(50.0, 1.3, 12.0);
  x.gamma = 0.9;
  CHECK(ocp::stage_cost(x, ControlInput{}, w, dest) == doctest::Approx(0.0).scale(1.0));

  SUBCASE("energy-unaware removes the state-of-energy term") {
    OcpWeights wu = w;
    wu.energy_aware = false;
    x.gamma = 0.3;
    CHECK(ocp::stage_cost(x, ControlInput{}, wu, dest) == doctest::Approx(0.0).scale(1.0));
    CHECK(ocp::stage_cost(x, ControlInput{}, w, dest) ==
          doctest::Approx(10.0 * 0.36).epsilon(1e-12));
  }

  SUBCASE("lateral deviation normalization") {
    x.e_y = 1.3 + w.e_y_max;
    CHECK(ocp::stage_cost(x, ControlInput{}, w, dest) == doctest::Approx(0.0048));
  }

  SUBCASE("input terms") {
    x.e_y = 1.3;
    x.gamma = 0.9;
    ControlInput u;
    u.a = 7.4;
    CHECK(ocp::stage_cost(x, u, w, dest) == doctest::Approx(w.R1));
    u.a = 0.0;
    u.d = -5.75;
    CHECK(ocp::stage_cost(x, u, w, dest) == doctest::Approx(w.R3));
  }
}

TEST_CASE("terminal cost") {
  OcpWeights w;
  const Destination dest = dest_at(170.0, 1.3);
  VehicleState x = initial_state(170.0, 1.3, 0.0);
  x.gamma = 0.9;
  CHECK(ocp::terminal_cost(x, w, dest) == doctest::Approx(0.0).scale(1.0));

  x.s_x = 0.0;
  CHECK(ocp::terminal_cost(x, w, dest) == doctest::Approx(0.4));

  x.s_x = 170.0;
  x.gamma = 0.8;
  CHECK(ocp::terminal_cost(x, w, dest) == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("problem structure") {
  const Destination dest = dest_at(170.0, 1.3);
  const VehicleState x0 = initial_state(20.0, 1.3, 10.0);

  SUBCASE("no obstacles: 13 N variables") {
    const OcpNlp p(x0, {}, OcpWeights{}, dest, Bounds{}, VehicleParams{}, MotorPowerModel{},
                   RoadModel{}, 20, 0.1);
    CHECK(p.num_vars() == 13 * 20);
    CHECK(p.num_eq() == 10 * 20);
    CHECK(p.num_ineq() == 2 * 20);
  }

  SUBCASE("one rectangle obstacle adds 9 variables per step") {
    std::vector<ObstacleConstraint> obs;
    obs.push_back(static_obstacle({60, 1.3}, 4.0, 2.0, 20));
    const OcpNlp p = make_ocp(x0, std::move(obs), dest, 20);
    CHECK(p.num_vars() == 13 * 20 + 20 * (4 + 4 + 1));
    CHECK(p.num_eq() == 10 * 20 + 2 * 20);
    CHECK(p.num_ineq() == 2 * 20 + 2 * 20);
  }

  SUBCASE("missing forecast step is an assembly error") {
    ObstacleConstraint oc = static_obstacle({60, 1.3}, 4.0, 2.0, 5);
    std::vector<ObstacleConstraint> obs{oc};
    CHECK_THROWS_WITH_AS(make_ocp(x0, std::move(obs), dest, 20),
                         doctest::Contains("missing step"), ValidationError);
  }

  SUBCASE("dynamics jacobian is block bidiagonal") {
    const OcpNlp p = make_ocp(x0, {}, dest, 8);
    solver::TripletVec J;
    Eigen::VectorXd c(p.num_eq());
    c.setZero();
    p.functions().equality(p.cold_start(), &c, &J);
    for (const auto& t : J) {
      const int k = t.row() / 10;  // dynamics block index
      const bool in_state_k = t.col() >= p.state_index(k, 0) && t.col() < p.state_index(k, 0) + 10 && k >= 1;
      const bool in_state_k1 =
          t.col() >= p.state_index(k + 1, 0) && t.col() < p.state_index(k + 1, 0) + 10;
      const bool in_input_k =
          t.col() >= p.input_index(k, 0) && t.col() < p.input_index(k, 0) + 3;
      CHECK((in_state_k || in_state_k1 || in_input_k));
    }
  }
}

TEST_CASE("objective gradient matches central differences") {
  const Destination dest = dest_at(170.0, 1.3);
  const VehicleState x0 = initial_state(20.0, 1.3, 10.0);
  std::vector<ObstacleConstraint> obs;
  obs.push_back(static_obstacle({40, 1.3}, 4.0, 2.0, 6));
  for (const auto form : {ocp::CostForm::normalized, ocp::CostForm::compact}) {
    OcpWeights w;
    w.form = form;
    const OcpNlp p = make_ocp(x0, obs, dest, 6, w);
    const auto nlp = p.functions();
    Rng rng(31);
    Eigen::VectorXd z = p.cold_start();
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += rng.uniform(-0.3, 0.3);
    // Keep the slack-penalty terms small so the finite-difference probe is
    // not dominated by rounding in the large W_s * s^2 contributions.
    for (int m = 0; m < p.num_obstacles(); ++m) {
      for (int j = 0; j < 6; ++j) z[p.slack_index(m, j)] = rng.uniform(0.0, 0.05);
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(z.size());
    nlp.objective(z, &grad);
    for (Eigen::Index i = 0; i < z.size(); i += 7) {  // sampled columns
      const double h = 1e-6 * std::max(1.0, std::abs(z[i]));
      Eigen::VectorXd zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      const double fd = (nlp.objective(zp, nullptr) - nlp.objective(zm, nullptr)) / (2 * h);
      CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("solve: destination equals the initial state") {
  const Destination dest = dest_at(50.0, 0.0);
  VehicleState x0 = initial_state(50.0, 0.0, 0.0);
  OcpWeights w;
  w.energy_aware = false;  // gamma sits below gamma_max on purpose
  const OcpNlp p = make_ocp(x0, {}, dest, 10, w);
  solver::SolverConfig cfg;
  cfg.kkt_tol = 1e-8;
  const auto sol = p.solve(cfg);
  CHECK(sol.status == HorizonStatus::converged);
  CHECK(sol.objective < 1e-4);
  for (const auto& u : sol.inputs) {
    CHECK(std::abs(u.a) < 2e-2);
    CHECK(std::abs(u.delta) < 2e-2);
    CHECK(std::abs(u.d) < 2e-2);
  }
}

TEST_CASE("solve: open road beats the zero-input rollout") {
  const Destination dest = dest_at(170.0, 1.3);
  const VehicleState x0 = initial_state(20.0, 1.3, 10.0);
  const OcpNlp p = make_ocp(x0, {}, dest, 20);
  solver::SolverConfig cfg;
  const auto sol = p.solve(cfg);
  REQUIRE(sol.status == HorizonStatus::converged);

  // Zero-input rollout cost as the comparison trajectory.
  OcpWeights w;
  double j_zero = 0.0;
  VehicleState x = x0;
  for (int k = 0; k < 20; ++k) {
    j_zero += ocp::stage_cost(x, ControlInput{}, w, dest);
    x = dyn::euler_step(x, ControlInput{}, 0.1, VehicleParams{}, MotorPowerModel{},
                        RoadModel{});
  }
  j_zero += ocp::terminal_cost(x, w, dest);
  CHECK(sol.objective < j_zero);
  CHECK(sol.states[5].v_x > x0.v_x);  // accelerates toward the destination

  SUBCASE("replaying the inputs reproduces the planned states") {
    VehicleState rx = x0;
    for (int k = 0; k < 20; ++k) {
      rx = dyn::euler_step(rx, sol.inputs[static_cast<std::size_t>(k)], 0.1, VehicleParams{},
                           MotorPowerModel{}, RoadModel{});
      const StateVec diff = rx.vec() - sol.states[static_cast<std::size_t>(k + 1)].vec();
      CHECK(diff.lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }

  SUBCASE("converged KKT residuals satisfy the configured tolerance") {
    const auto kkt = p.check_kkt(sol);
    CHECK(kkt.stationarity <= 10 * cfg.kkt_tol);
    CHECK(kkt.feasibility <= 10 * cfg.kkt_tol);
  }

  SUBCASE("warm start shift is near-feasible on interior steps") {
    const auto ws = p.shift_warm_start(sol);
    // New problem rooted at the successor state.
    const OcpNlp p2 = make_ocp(sol.states[1], {}, dest, 20);
    Eigen::VectorXd c(p2.num_eq());
    c.setZero();
    p2.functions().equality(ws.z, &c, nullptr);
    for (int k = 0; k + 1 < 20; ++k) {
      for (int comp = 0; comp < 10; ++comp) {
        CHECK(std::abs(c[p2.dynamics_row(k, comp)]) < 1e-6);
      }
    }
    // Entries 2..N of the previous solution appear shifted by one.
    CHECK(ws.z.segment<10>(p2.state_index(1, 0)).isApprox(sol.states[2].vec()));
    CHECK(ws.z.segment<3>(p2.input_index(0, 0)).isApprox(sol.inputs[1].vec()));
  }
}

TEST_CASE("solve: torque envelope binds under full-throttle demand") {
  // A strong destination pull encourages max acceleration; the cubic
  // envelope caps the motor torque below the raw a_max.
  const Destination dest = dest_at(500.0, 0.0);
  const VehicleState x0 = initial_state(0.0, 0.0, 5.0);
  OcpWeights w;
  w.P1 = 400.0;
  w.energy_aware = false;
  const OcpNlp p = make_ocp(x0, {}, dest, 15, w);
  solver::SolverConfig cfg;
  const auto sol = p.solve(cfg);
  REQUIRE(sol.status == HorizonStatus::converged);
  const VehicleParams params;
  const MotorPowerModel motor;
  for (int k = 0; k < 15; ++k) {
    const double v = sol.states[static_cast<std::size_t>(k)].v_x;
    const double tau = params.torque_per_accel() * sol.inputs[static_cast<std::size_t>(k)].a;
    CHECK(std::abs(tau) <= dyn::torque_limit(v, motor) + 1e-6);
  }
  const double tau0 = params.torque_per_accel() * sol.inputs[0].a;
  CHECK(tau0 > 0.8 * dyn::torque_limit(x0.v_x, motor));
}

TEST_CASE("solve: blocked road converges with positive slack") {
  const Destination dest = dest_at(170.0, 0.0);
  const VehicleState x0 = initial_state(20.0, 0.0, 20.0);
  // Wall spanning the whole road within the stopping distance.
  std::vector<ObstacleConstraint> obs;
  obs.push_back(static_obstacle({20.0 + 12.0, 0.0}, 2.0, 12.0, 20));
  const OcpNlp p = make_ocp(x0, obs, dest, 20);
  solver::SolverConfig cfg;
  const auto sol = p.solve(cfg);
  REQUIRE((sol.status == HorizonStatus::converged ||
           sol.status == HorizonStatus::infeasible_relaxed));
  CHECK(sol.max_slack > 1e-6);
  CHECK(sol.status == HorizonStatus::infeasible_relaxed);

  // Hard constraints still hold: dynamics replay and bounds.
  VehicleState rx = x0;
  for (int k = 0; k < 20; ++k) {
    rx = dyn::euler_step(rx, sol.inputs[static_cast<std::size_t>(k)], 0.1, VehicleParams{},
                         MotorPowerModel{}, RoadModel{});
    CHECK((rx.vec() - sol.states[static_cast<std::size_t>(k + 1)].vec())
              .lpNorm<Eigen::Infinity>() < 1e-6);
  }
  // Bounds hold up to the solver's 1e-8 interior relaxation.
  const Bounds bounds;
  for (const auto& u : sol.inputs) {
    CHECK(u.a >= bounds.a_min - 1e-7);
    CHECK(u.a <= bounds.a_max + 1e-7);
    CHECK(u.d >= bounds.d_min - 1e-7);
    CHECK(u.d <= 1e-7);
  }

  SUBCASE("slack shrinks as its penalty grows") {
    double prev_total = -1.0;
    for (const double ws : {1e2, 1e3, 1e4, 1e5}) {
      OcpWeights w;
      w.W_s = ws;
      const OcpNlp pw = make_ocp(x0, obs, dest, 20, w);
      const auto s = pw.solve(cfg);
      const double total = s.slacks.sum();
      if (prev_total >= 0.0) CHECK(total <= prev_total + 1e-5);
      prev_total = total;
    }
  }
}

TEST_CASE("energy-unaware cost ignores the state of energy") {
  OcpWeights w;
  w.energy_aware = false;
  const Destination dest = dest_at(120.0, 0.0);
  VehicleState a = initial_state(20.0, 0.0, 12.0);
  VehicleState b = a;
  b.gamma = 0.5;

  solver::SolverConfig cfg;
  cfg.kkt_tol = 1e-9;
  const auto sol_a = make_ocp(a, {}, dest, 12, w).solve(cfg);
  const auto sol_b = make_ocp(b, {}, dest, 12, w).solve(cfg);
  REQUIRE(sol_a.status == HorizonStatus::converged);
  REQUIRE(sol_b.status == HorizonStatus::converged);
  CHECK(std::abs(sol_a.inputs[0].a - sol_b.inputs[0].a) < 1e-5);
  CHECK(std::abs(sol_a.inputs[0].delta - sol_b.inputs[0].delta) < 1e-5);
  CHECK(std::abs(sol_a.inputs[0].d - sol_b.inputs[0].d) < 1e-5);
}
