#include <cmath>

#include "doctest.h"
#include "evnav/avoidance.hpp"
#include "evnav/geometry.hpp"
#include "evnav/obstacles.hpp"
#include "evnav/util.hpp"
#include "support.hpp"

using namespace evnav;
using avoid::DualVariables;
using avoid::RobustConstraintBlock;

namespace {

// Unit square [-1,1]^2 as unit-norm halfspaces (x<=1, -x<=1, y<=1, -y<=1).
RobustConstraintBlock unit_square_block(double d_safe, double slack = 0.0) {
  RobustConstraintBlock block;
  block.A.resize(4, 2);
  block.A << 1, 0, -1, 0, 0, 1, 0, -1;
  block.b = Eigen::Vector4d::Ones();
  const auto zero = uncertainty::singleton_set(Vec2::Zero());
  block.G = zero.G;
  block.h = zero.h;
  block.d_safe = d_safe;
  block.slack = slack;
  return block;
}

}  // namespace

TEST_CASE("robust residuals") {
  SUBCASE("hand-evaluated certificate on the unit square") {
    RobustConstraintBlock block = unit_square_block(1.0);
    DualVariables duals;
    duals.lambda = Eigen::Vector4d(1, 0, 0, 0);  // the x <= 1 face
    duals.mu = Eigen::Vector4d(1, 0, 0, 0);      // balances the link rows
    const Eigen::VectorXd res = avoid::robust_residuals({3, 0}, duals, block);
    CHECK(res[0] == doctest::Approx(1.0));                 // (3-1)*1 - 0 - 1
    CHECK(res[1] == doctest::Approx(0.0).scale(1.0));      // cone boundary
    CHECK(res.segment<2>(2).norm() == doctest::Approx(0.0).scale(1.0));
    CHECK(res.minCoeff() >= 0.0);
  }

  SUBCASE("trivial zero duals cannot certify") {
    RobustConstraintBlock block = unit_square_block(1.0);
    DualVariables duals;
    duals.lambda = Eigen::Vector4d::Zero();
    duals.mu = Eigen::Vector4d::Zero();
    const Eigen::VectorXd res = avoid::robust_residuals({3, 0}, duals, block);
    CHECK(res[0] == doctest::Approx(-1.0));  // -d_safe
  }

  SUBCASE("dimension mismatch is an argument error") {
    RobustConstraintBlock block = unit_square_block(1.0);
    DualVariables duals;
    duals.lambda = Eigen::Vector3d::Zero();
    duals.mu = Eigen::Vector4d::Zero();
    CHECK_THROWS_AS(avoid::robust_residuals({0, 0}, duals, block), ValidationError);
  }
}

TEST_CASE("static residuals") {
  geom::HalfspaceMatrix A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  const Eigen::VectorXd b = Eigen::Vector4d(1, 0, 1, 0);  // square [0,1]^2

  SUBCASE("hand evaluation") {
    const Eigen::VectorXd lambda = Eigen::Vector4d(1, 0, 0, 0);
    const Eigen::VectorXd res = avoid::static_residuals({2, 0.5}, lambda, A, b, 0.5);
    CHECK(res[0] == doctest::Approx(0.5));
    CHECK(res[1] == doctest::Approx(0.0).scale(1.0));
  }

  SUBCASE("interior points admit no positive margin") {
    CHECK(avoid::dual_distance({0.5, 0.5}, A, b) == 0.0);
  }

  SUBCASE("bitwise equality with the robust form at a singleton set") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const auto rect = obstacles::rectangle_halfspaces(
          {rng.uniform(-10, 10), rng.uniform(-10, 10)}, rng.uniform(-2, 2),
          rng.uniform(0.5, 6), rng.uniform(0.5, 3));
      RobustConstraintBlock block;
      block.A = rect.A;
      block.b = rect.b;
      const auto zero = uncertainty::singleton_set(Vec2::Zero());
      block.G = zero.G;
      block.h = zero.h;
      block.d_safe = rng.uniform(0.5, 3.0);
      block.slack = 0.0;
      DualVariables duals;
      duals.lambda = Eigen::Vector4d(rng.uniform(0, 1), rng.uniform(0, 1),
                                     rng.uniform(0, 1), rng.uniform(0, 1));
      duals.mu = Eigen::Vector4d::Zero();
      const Vec2 p(rng.uniform(-15, 15), rng.uniform(-15, 15));
      const Eigen::VectorXd robust = avoid::robust_residuals(p, duals, block);
      const Eigen::VectorXd stat =
          avoid::static_residuals(p, duals.lambda, block.A, block.b, block.d_safe);
      CHECK(robust[0] == stat[0]);  // bitwise
      CHECK(robust[1] == stat[1]);
      for (int i = 0; i < 4; ++i) CHECK(robust[4 + i] == stat[2 + i]);
    }
  }
}

TEST_CASE("point-to-polygon distance") {
  const std::vector<Vec2> sq = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(geom::distance_point_to_polygon({2, 0.5}, sq) == doctest::Approx(1.0));
  CHECK(geom::distance_point_to_polygon({2, 2}, sq) == doctest::Approx(std::sqrt(2.0)));
  CHECK(geom::distance_point_to_polygon({0.5, 0.5}, sq) == 0.0);
  CHECK_THROWS_AS(geom::distance_point_to_polygon({0, 0}, std::vector<Vec2>{{0, 0}, {1, 1}}),
                  ValidationError);
}

TEST_CASE("dual distance equals geometric distance") {
  geom::HalfspaceMatrix A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  const Eigen::VectorXd b = Eigen::Vector4d(1, 0, 1, 0);  // [0,1]^2

  CHECK(avoid::dual_distance({2, 0.5}, A, b) == doctest::Approx(1.0));
  CHECK(avoid::dual_distance({1.0, 0.5}, A, b) == doctest::Approx(0.0).scale(1.0));

  SUBCASE("sweep over random rectangles and points") {
    Rng rng(19);
    int exterior = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const auto rect = obstacles::rectangle_halfspaces(
          {rng.uniform(-20, 20), rng.uniform(-20, 20)}, rng.uniform(-M_PI, M_PI),
          rng.uniform(0.5, 8), rng.uniform(0.5, 5));
      const Vec2 p(rng.uniform(-30, 30), rng.uniform(-30, 30));
      const double dual = avoid::dual_distance(p, rect.A, rect.b);
      const double geometric = geom::distance_point_to_polygon(p, rect.vertices());
      CHECK(std::abs(dual - geometric) < 1e-6);
      if (geometric > 0.0) ++exterior;
    }
    CHECK(exterior > 500);
  }
}

TEST_CASE("certificate verification and soundness") {
  Rng rng(101);
  int verified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto rect = obstacles::rectangle_halfspaces(
        {rng.uniform(-10, 10), rng.uniform(-10, 10)}, rng.uniform(-M_PI, M_PI),
        rng.uniform(1, 6), rng.uniform(0.5, 3));
    uncertainty::SampleSet s;
    s.step_k = 1;
    for (int i = 0; i < 25; ++i) {
      s.samples.emplace_back(0.4 * rng.normal() + rng.uniform(-1, 1),
                             0.3 * rng.normal());
    }
    const auto uset = uncertainty::to_halfspaces(uncertainty::pca_box(s));
    const Vec2 p(rng.uniform(-25, 25), rng.uniform(-25, 25));

    const auto search = testing::best_certificate(p, rect.A, rect.b, uset.G, uset.h);
    if (!search.converged) continue;
    const double d_safe = rng.uniform(0.5, 2.5);
    if (search.value < d_safe + 1e-3) continue;

    // Scale the optimal certificate into the feasible band [d_safe, value].
    const double theta = rng.uniform(d_safe / search.value, 1.0);
    RobustConstraintBlock block;
    block.A = rect.A;
    block.b = rect.b;
    block.G = uset.G;
    block.h = uset.h;
    block.d_safe = d_safe;
    block.slack = 0.0;
    DualVariables duals;
    duals.lambda = (theta * search.lambda).cwiseMax(0.0);
    duals.mu = (theta * search.mu).cwiseMax(0.0);

    const Eigen::VectorXd res = avoid::robust_residuals(p, duals, block);
    if (res.minCoeff() < -1e-9) continue;  // scaled point may brush feasibility
    ++verified;
    CHECK(avoid::verify_certificate(p, duals, block));

    // Soundness: the dual margin lower-bounds the geometric distance.
    const auto occupancy =
        geom::minkowski_sum_convex(rect.vertices(), geom::polytope_vertices(uset.G, uset.h));
    const double distance = geom::distance_point_to_convex_set(p, occupancy);
    CHECK(distance >= d_safe - 1e-6);
    CHECK(distance + 1e-6 >= res[0] + block.d_safe);  // margin <= distance
  }
  CHECK(verified >= 50);
}

TEST_CASE("singleton uncertainty reduces to the static distance check") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rect = obstacles::rectangle_halfspaces(
        {rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(-1, 1), 4.0, 2.0);
    const Vec2 p(rng.uniform(-15, 15), rng.uniform(-15, 15));
    const auto zero = uncertainty::singleton_set(Vec2::Zero());
    const auto search = testing::best_certificate(p, rect.A, rect.b, zero.G, zero.h);
    if (!search.converged) continue;
    const double dual = avoid::dual_distance(p, rect.A, rect.b);
    CHECK(search.value == doctest::Approx(dual).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("translation covariance of the residuals") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec2 center(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double heading = rng.uniform(-1, 1);
    const auto rect = obstacles::rectangle_halfspaces(center, heading, 3.0, 1.5);
    const Vec2 t(rng.uniform(-50, 50), rng.uniform(-50, 50));
    const auto rect_t = obstacles::rectangle_halfspaces(center + t, heading, 3.0, 1.5);

    RobustConstraintBlock block = unit_square_block(1.2);
    block.A = rect.A;
    block.b = rect.b;
    RobustConstraintBlock block_t = block;
    block_t.A = rect_t.A;
    block_t.b = rect_t.b;

    DualVariables duals;
    duals.lambda = Eigen::Vector4d(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1),
                                   rng.uniform(0, 1));
    duals.mu = Eigen::Vector4d(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1),
                               rng.uniform(0, 1));
    const Vec2 p(rng.uniform(-10, 10), rng.uniform(-10, 10));
    const Eigen::VectorXd r0 = avoid::robust_residuals(p, duals, block);
    const Eigen::VectorXd r1 = avoid::robust_residuals(p + t, duals, block_t);
    for (Eigen::Index i = 0; i < r0.size(); ++i) {
      CHECK(r1[i] == doctest::Approx(r0[i]).epsilon(1e-9).scale(1.0 + std::abs(t.norm())));
    }
  }
}
