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

#include "evnav/avoidance.hpp"

#include <Eigen/LU>
#include <cmath>
#include <string>

#include "evnav/util.hpp"

namespace evnav::avoid {

namespace {

void check_dims(const Eigen::VectorXd& v, Eigen::Index expected, const char* name) {
  if (v.size() != expected) {
    throw ValidationError(std::string(name) + " has size " + std::to_string(v.size()) +
                          ", expected " + std::to_string(expected));
  }
}

double margin_core(const Vec2& p, const Eigen::VectorXd& lambda,
                   const geom::HalfspaceMatrix& A, const Eigen::VectorXd& b,
                   double d_safe) {
  return (A * p - b).dot(lambda) - d_safe;
}

double cone_residual(const Eigen::VectorXd& lambda, const geom::HalfspaceMatrix& A) {
  const Vec2 g = A.transpose() * lambda;
  return 1.0 - g.squaredNorm();
}

}  // namespace

Eigen::VectorXd robust_residuals(const Vec2& p, const DualVariables& duals,
                                 const RobustConstraintBlock& block) {
  check_dims(block.b, block.A.rows(), "b");
  check_dims(block.h, block.G.rows(), "h");
  check_dims(duals.lambda, block.A.rows(), "lambda");
  check_dims(duals.mu, block.G.rows(), "mu");

  const Eigen::Index n = block.A.rows();
  const Eigen::Index q = block.G.rows();
  Eigen::VectorXd res(1 + 1 + 2 + n + q + 1);
  res[0] = margin_core(p, duals.lambda, block.A, block.b, block.d_safe) -
           duals.mu.dot(block.h) + block.slack;
  res[1] = cone_residual(duals.lambda, block.A);
  res.segment<2>(2) = block.A.transpose() * duals.lambda - block.G.transpose() * duals.mu;
  res.segment(4, n) = duals.lambda;
  res.segment(4 + n, q) = duals.mu;
  res[4 + n + q] = block.slack;
  return res;
}

Eigen::VectorXd static_residuals(const Vec2& p, const Eigen::VectorXd& lambda,
                                 const geom::HalfspaceMatrix& A, const Eigen::VectorXd& b,
                                 double d_safe) {
  check_dims(b, A.rows(), "b");
  check_dims(lambda, A.rows(), "lambda");
  const Eigen::Index n = A.rows();
  Eigen::VectorXd res(2 + n);
  res[0] = margin_core(p, lambda, A, b, d_safe);
  res[1] = cone_residual(lambda, A);
  res.segment(2, n) = lambda;
  return res;
}

double dual_distance(const Vec2& p, const geom::HalfspaceMatrix& A,
                     const Eigen::VectorXd& b) {
  check_dims(b, A.rows(), "b");
  const Eigen::Index n = A.rows();
  const Eigen::VectorXd c = A * p - b;

  // The maximizing multiplier is supported on the faces active at the nearest
  // point of the polytope: one face or two non-parallel faces in the plane.
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mii = A.row(i).squaredNorm();
    if (mii <= 0.0) throw ValidationError("dual_distance: zero halfspace row");
    if (c[i] > 0.0) best = std::max(best, c[i] / std::sqrt(mii));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Matrix2d M;
      M(0, 0) = A.row(i).squaredNorm();
      M(1, 1) = A.row(j).squaredNorm();
      M(0, 1) = M(1, 0) = A.row(i).dot(A.row(j));
      const double det = M.determinant();
      if (det <= 1e-12 * M(0, 0) * M(1, 1)) continue;  // parallel faces
      const Vec2 cf(c[i], c[j]);
      const Vec2 u = M.inverse() * cf;
      if (!(u[0] > 0.0) || !(u[1] > 0.0)) continue;  // support must be positive
      const double quad = u.dot(M * u);
      if (!(quad > 0.0)) continue;
      best = std::max(best, cf.dot(u) / std::sqrt(quad));
    }
  }
  return best;
}

bool verify_certificate(const Vec2& p, const DualVariables& duals,
                        const RobustConstraintBlock& block) {
  const Eigen::VectorXd res = robust_residuals(p, duals, block);
  if (res.minCoeff() < -1e-9) {
    throw ValidationError("verify_certificate requires feasible duals (min residual " +
                          std::to_string(res.minCoeff()) + ")");
  }
  const auto obstacle_polygon = geom::polytope_vertices(block.A, block.b);
  const auto uncertainty_polygon = geom::polytope_vertices(block.G, block.h);
  const auto occupancy = geom::minkowski_sum_convex(obstacle_polygon, uncertainty_polygon);
  const double distance = geom::distance_point_to_convex_set(p, occupancy);
  return distance >= block.d_safe - 1e-6;
}

}  // namespace evnav::avoid
