#include <cmath>

#include "doctest.h"
#include "evnav/dynamics.hpp"
#include "evnav/fit.hpp"
#include "evnav/util.hpp"
#include "support.hpp"

using namespace evnav;

namespace {

VehicleState cruising(double v_x) {
  VehicleState x;
  x.v_x = v_x;
  x.gamma = 0.9;
  return x;
}

Eigen::MatrixXd fd_jacobian(const std::function<StateVec(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& v0) {
  Eigen::MatrixXd J(10, v0.size());
  Eigen::VectorXd v = v0;
  for (Eigen::Index j = 0; j < v0.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(v0[j]));
    v[j] = v0[j] + h;
    const StateVec fp = f(v);
    v[j] = v0[j] - h;
    const StateVec fm = f(v);
    v[j] = v0[j];
    J.col(j) = (fp - fm) / (2.0 * h);
  }
  return J;
}

}  // namespace

TEST_CASE("slip angles") {
  VehicleParams p;
  VehicleState x = cruising(10.0);

  auto [aF, aR] = dyn::slip_angles(x, 0.0, p);
  CHECK(aF == 0.0);
  CHECK(aR == 0.0);

  std::tie(aF, aR) = dyn::slip_angles(x, 0.1, p);
  CHECK(aF == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(aR == 0.0);

  x.v_x = 20.0;
  x.v_y = 1.0;
  x.r = 0.5;
  std::tie(aF, aR) = dyn::slip_angles(x, 0.0, p);
  CHECK(aF == doctest::Approx(std::atan((1.0 + 0.5 * 1.188) / 20.0)).epsilon(1e-12));
  CHECK(aR == doctest::Approx(std::atan((1.0 - 0.5 * 1.512) / 20.0)).epsilon(1e-12));

  // Velocity floor keeps the angles finite at standstill.
  x.v_x = 0.0;
  std::tie(aF, aR) = dyn::slip_angles(x, 0.0, p);
  CHECK(std::isfinite(aF));
  CHECK(std::isfinite(aR));
}

TEST_CASE("lateral forces") {
  VehicleParams p;
  auto [fF, fR] = dyn::lateral_forces(0.0, 0.0, p);
  CHECK(fF == 0.0);
  CHECK(fR == 0.0);
  CHECK(dyn::lateral_forces(0.01, 0.0, p).first == doctest::Approx(-1260.0));
  CHECK(dyn::lateral_forces(0.0, -0.01, p).second == doctest::Approx(1260.0));
}

TEST_CASE("motor operating point") {
  VehicleParams p;
  VehicleState x = cruising(10.0);
  auto [tau, omega] = dyn::motor_operating_point(x, 0.0, p);
  CHECK(tau == 0.0);
  std::tie(tau, omega) = dyn::motor_operating_point(x, 1.0, p);
  CHECK(tau == doctest::Approx(1500.0 * 0.33 / (0.95 * 7.94)).epsilon(1e-12));
  CHECK(omega == doctest::Approx(7.94 * 10.0 / 0.33).epsilon(1e-12));
}

TEST_CASE("battery power polynomial") {
  MotorPowerModel m;
  MotorPowerModel zero = m;
  zero.c = {5.0, 0, 0, 0, 0, 0, 0};
  CHECK(dyn::battery_power(0.0, 0.0, zero) == 5.0);

  // Fitted coefficients: the cross term dominates, P_b ~ tau*omega.
  const double tau = 65.63, omega = 240.6;
  CHECK(dyn::battery_power(tau, omega, m) ==
        doctest::Approx(tau * omega).epsilon(1e-9));
  CHECK(dyn::battery_power(tau, omega, m) == doctest::Approx(15790.6).epsilon(1e-4));
}

TEST_CASE("power loss") {
  MotorPowerModel m;
  CHECK(dyn::power_loss(0.0, 0.0, m) == m.k_0);
  CHECK(dyn::power_loss(100.0, 0.0, m) == doctest::Approx(2050.0));
  CHECK_NOTHROW(dyn::validate_power_loss(m));

  MotorPowerModel bad = m;
  bad.k_i = -100.0;
  CHECK_THROWS_AS(dyn::validate_power_loss(bad), ValidationError);
}

TEST_CASE("battery power fit") {
  MotorPowerModel m;

  SUBCASE("exact recovery of a known coefficient vector") {
    MotorPowerModel truth = m;
    truth.c = {12.0, -0.5, 3.0, 0.002, 0.9, 0.0, 1e-6};
    std::vector<fit::BatteryPowerSample> samples;
    for (double tau = 0.0; tau <= 300.0; tau += 50.0) {
      for (double omega = 0.0; omega <= 600.0; omega += 100.0) {
        samples.push_back({tau, omega, dyn::battery_power(tau, omega, truth)});
      }
    }
    const auto fitres = fit::fit_battery_power_model(samples);
    for (int i = 0; i < 7; ++i) {
      CHECK(fitres.model.c[i] ==
            doctest::Approx(truth.c[i]).epsilon(1e-9).scale(std::abs(truth.c[i]) + 1e-12));
    }
    CHECK(fitres.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("refit of physically composed data") {
    const auto samples = testing::battery_samples(m);
    const auto fitres = fit::fit_battery_power_model(samples);
    CHECK(fitres.r_squared >= 0.99);
  }

  SUBCASE("degenerate sample sets are rejected") {
    std::vector<fit::BatteryPowerSample> six(6, {10.0, 20.0, 250.0});
    CHECK_THROWS_AS(fit::fit_battery_power_model(six), FitError);
    std::vector<fit::BatteryPowerSample> dup(12, {10.0, 20.0, 250.0});
    CHECK_THROWS_AS(fit::fit_battery_power_model(dup), FitError);
  }
}

TEST_CASE("torque limit cubic") {
  MotorPowerModel m;
  CHECK(dyn::torque_limit(0.0, m) == doctest::Approx(454.2));
  CHECK(dyn::torque_limit(10.0, m) == doctest::Approx(457.82).epsilon(1e-12));
  CHECK(dyn::torque_limit(30.0, m) ==
        doctest::Approx(0.0036 * 27000.0 - 0.3661 * 900.0 + 3.663 * 30.0 + 454.2)
            .epsilon(1e-12));
  // Positive over the admissible speed range.
  for (double v = 0.0; v <= 30.0; v += 0.5) CHECK(dyn::torque_limit(v, m) > 0.0);
}

TEST_CASE("torque envelope fit") {
  const auto samples = testing::torque_envelope_samples();
  const auto res = fit::fit_torque_limit(samples);
  CHECK(res.r_squared >= 0.97);
  CHECK(res.coeffs.size() == 4);
}

TEST_CASE("curvature polynomial") {
  RoadModel straight;
  CHECK(dyn::curvature(123.0, straight) == 0.0);
  RoadModel arc{0.0, 0.0, 0.01};
  CHECK(dyn::curvature(50.0, arc) == doctest::Approx(0.01));
  RoadModel quad{1e-6, 0.0, 0.0};
  CHECK(dyn::curvature(100.0, quad) == doctest::Approx(0.01).epsilon(1e-12));

  SUBCASE("exact waypoint fit recovery") {
    std::vector<std::array<double, 2>> pts;
    const RoadModel truth{2e-7, -1e-5, 3e-3};
    for (double s = 0.0; s <= 300.0; s += 25.0) pts.push_back({s, dyn::curvature(s, truth)});
    const auto res = fit::fit_curvature(pts);
    CHECK(res.coeffs[0] == doctest::Approx(truth.k1).epsilon(1e-9));
    CHECK(res.coeffs[1] == doctest::Approx(truth.k2).epsilon(1e-9));
    CHECK(res.coeffs[2] == doctest::Approx(truth.k3).epsilon(1e-9));
  }
}

TEST_CASE("fit optimality: perturbing fitted coefficients never reduces SSR") {
  MotorPowerModel m;
  auto ssr_battery = [&](const std::array<double, 7>& c,
                         const std::vector<fit::BatteryPowerSample>& samples) {
    MotorPowerModel probe = m;
    probe.c = c;
    double ssr = 0.0;
    for (const auto& s : samples) {
      const double r = dyn::battery_power(s.tau_m, s.omega_m, probe) - s.P_b;
      ssr += r * r;
    }
    return ssr;
  };
  const auto samples = testing::battery_samples(m);
  const auto fitres = fit::fit_battery_power_model(samples);
  const double base = ssr_battery(fitres.model.c, samples);
  for (int i = 0; i < 7; ++i) {
    if (fitres.model.c[i] == 0.0) continue;
    for (double sign : {-1.0, 1.0}) {
      auto c = fitres.model.c;
      c[i] *= 1.0 + sign * 1e-3;
      CHECK(ssr_battery(c, samples) >= base * (1.0 - 1e-12));
    }
  }

  const auto tq = testing::torque_envelope_samples();
  const auto tqfit = fit::fit_torque_limit(tq);
  auto ssr_torque = [&](const Eigen::VectorXd& xi) {
    double ssr = 0.0;
    for (const auto& s : tq) {
      const double v = s[0];
      const double r = ((xi[0] * v + xi[1]) * v + xi[2]) * v + xi[3] - s[1];
      ssr += r * r;
    }
    return ssr;
  };
  const double tq_base = ssr_torque(tqfit.coeffs);
  for (int i = 0; i < 4; ++i) {
    for (double sign : {-1.0, 1.0}) {
      Eigen::VectorXd xi = tqfit.coeffs;
      xi[i] *= 1.0 + sign * 1e-3;
      CHECK(ssr_torque(xi) >= tq_base * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("continuous dynamics: cruising and regeneration") {
  VehicleParams p;
  MotorPowerModel m;
  RoadModel road;
  VehicleState x = cruising(10.0);
  ControlInput u;

  const StateVec f = dyn::continuous_dynamics(x, u, p, m, road);
  CHECK(f[StateIdx::s_x] == 10.0);
  CHECK(f[StateIdx::p_x] == 10.0);
  CHECK(f[StateIdx::e_y] == 0.0);
  CHECK(f[StateIdx::v_y] == 0.0);
  CHECK(f[StateIdx::r] == 0.0);
  CHECK(f[StateIdx::p_y] == 0.0);
  CHECK(f[StateIdx::psi] == 0.0);
  const auto [tau, omega] = dyn::motor_operating_point(x, 0.0, p);
  CHECK(f[StateIdx::gamma] ==
        doctest::Approx(-p.eta_b * dyn::battery_power(tau, omega, m) / p.E_b));

  // Regenerative command: P_b < 0 raises the state of energy.
  u.a = -1.0;
  const StateVec fr = dyn::continuous_dynamics(x, u, p, m, road);
  const auto [tau_r, omega_r] = dyn::motor_operating_point(x, u.a, p);
  CHECK(dyn::battery_power(tau_r, omega_r, m) < 0.0);
  CHECK(fr[StateIdx::gamma] > 0.0);
}

TEST_CASE("zero-input symmetry on a straight road") {
  VehicleParams p;
  MotorPowerModel m;
  RoadModel road;
  VehicleState x = cruising(17.0);
  const StateVec f = dyn::continuous_dynamics(x, ControlInput{}, p, m, road);
  CHECK(f[StateIdx::e_y] == 0.0);
  CHECK(f[StateIdx::v_y] == 0.0);
  CHECK(f[StateIdx::r] == 0.0);
  CHECK(f[StateIdx::psi] == 0.0);
}

TEST_CASE("inertial speed equals body speed") {
  VehicleParams p;
  MotorPowerModel m;
  RoadModel road;
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const VehicleState x = testing::random_interior_state(rng);
    const StateVec f = dyn::continuous_dynamics(x, testing::random_input(rng), p, m, road);
    const double inertial = std::hypot(f[StateIdx::p_x], f[StateIdx::p_y]);
    const double body = std::hypot(x.v_x, x.v_y);
    CHECK(inertial == doctest::Approx(body).epsilon(1e-12));
  }
}

TEST_CASE("analytic jacobians match central differences") {
  VehicleParams p;
  MotorPowerModel m;
  const RoadModel road{1e-7, -2e-5, 1e-3};
  Rng rng(11);
  for (const auto variant : {dyn::KinematicsVariant::standard,
                             dyn::KinematicsVariant::transposed}) {
    for (int trial = 0; trial < 100; ++trial) {
      const VehicleState x = testing::random_interior_state(rng);
      const ControlInput u = testing::random_input(rng);

      Eigen::Matrix<double, 10, 10> df_dx;
      Eigen::Matrix<double, 10, 3> df_du;
      dyn::dynamics_jacobians(x, u, p, m, road, variant, df_dx, df_du);

      Eigen::VectorXd v0(13);
      v0 << x.vec(), u.vec();
      const Eigen::MatrixXd fd = fd_jacobian(
          [&](const Eigen::VectorXd& v) {
            return dyn::continuous_dynamics(VehicleState::from_vec(v.head<10>()),
                                            ControlInput::from_vec(v.tail<3>()), p, m, road,
                                            variant);
          },
          v0);
      Eigen::MatrixXd analytic(10, 13);
      analytic << df_dx, df_du;
      for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 13; ++j) {
          CHECK(std::abs(analytic(i, j) - fd(i, j)) <=
                1e-5 * std::max(1.0, std::abs(analytic(i, j))));
        }
      }
    }
  }
}

TEST_CASE("euler step") {
  VehicleParams p;
  MotorPowerModel m;
  RoadModel road;

  SUBCASE("fixed point of f == 0") {
    MotorPowerModel silent = m;
    silent.c = {0, 0, 0, 0, 0, 0, 0};
    VehicleState x;  // all zeros
    const VehicleState next = dyn::euler_step(x, ControlInput{}, 0.1, p, silent, road);
    CHECK(next.vec() == x.vec());
  }

  SUBCASE("constant derivative advances linearly") {
    MotorPowerModel silent = m;
    silent.c = {0, 0, 0, 0, 0, 0, 0};
    VehicleState x = cruising(5.0);
    x.gamma = 0.5;
    const VehicleState next = dyn::euler_step(x, ControlInput{}, 0.1, p, silent, road);
    CHECK(next.s_x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(next.p_x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(next.v_x == 5.0);
  }

  SUBCASE("global error halves with the step on a smooth maneuver") {
    auto input_at = [](double t) {
      ControlInput u;
      u.a = 0.5 * std::sin(0.3 * t);
      u.delta = 0.05 * std::sin(0.5 * t);
      return u;
    };
    auto rollout = [&](double T_s) {
      VehicleState x = cruising(15.0);
      const int steps = static_cast<int>(std::round(5.0 / T_s));
      for (int k = 0; k < steps; ++k) {
        x = dyn::euler_step(x, input_at(k * T_s), T_s, p, m, road);
      }
      return x.vec();
    };
    const StateVec ref = rollout(0.1 / 128.0);
    const double err_coarse = (rollout(0.1) - ref).norm();
    const double err_fine = (rollout(0.05) - ref).norm();
    const double ratio = err_coarse / err_fine;
    CHECK(ratio >= 1.6);
    CHECK(ratio <= 2.4);
  }
}

TEST_CASE("energy bookkeeping telescopes over a rollout") {
  VehicleParams p;
  MotorPowerModel m;
  RoadModel road;
  Rng rng(23);
  VehicleState x = cruising(12.0);
  const double T_s = 0.1;
  double power_sum = 0.0;
  for (int k = 0; k < 50; ++k) {
    ControlInput u;
    u.a = rng.uniform(-1.0, 2.0);
    u.delta = rng.uniform(-0.05, 0.05);
    const auto [tau, omega] = dyn::motor_operating_point(x, u.a, p);
    power_sum += T_s * dyn::battery_power(tau, omega, m);
    x = dyn::euler_step(x, u, T_s, p, m, road);
  }
  const double from_state = (0.9 - x.gamma) * p.E_b;
  const double from_power = p.eta_b * power_sum;
  // Exact telescoping identity, up to ulp accumulation in gamma.
  CHECK(std::abs(from_state - from_power) <= 1e-9 * std::max(1.0, std::abs(from_power)));
}

TEST_CASE("transposed kinematics variant differs as specified") {
  VehicleParams p;
  MotorPowerModel m;
  RoadModel road;
  VehicleState x = cruising(10.0);
  x.e_psi = 0.1;
  x.v_y = 0.3;
  const StateVec std_f =
      dyn::continuous_dynamics(x, ControlInput{}, p, m, road, dyn::KinematicsVariant::standard);
  const StateVec alt_f = dyn::continuous_dynamics(x, ControlInput{}, p, m, road,
                                                  dyn::KinematicsVariant::transposed);
  CHECK(std_f[StateIdx::e_y] == doctest::Approx(0.3 + 10.0 * 0.1));
  CHECK(alt_f[StateIdx::e_y] == doctest::Approx(10.0 + 0.1 * 0.3));
  CHECK(std_f[StateIdx::e_psi] == doctest::Approx(x.r - 10.0 * 0.0));
  CHECK(alt_f[StateIdx::e_psi] == doctest::Approx(0.3));
}
