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

#include "evnav/geometry.hpp"
#include "evnav/obstacles.hpp"
#include "evnav/types.hpp"
#include "evnav/uncertainty.hpp"

namespace evnav::avoid {

/// Multipliers certifying clearance from one obstacle at one horizon step:
/// lambda pairs with the obstacle halfspaces, mu with the uncertainty-set
/// halfspaces.
struct DualVariables {
  Eigen::VectorXd lambda;
  Eigen::VectorXd mu;
};

/// One robust collision-avoidance block: obstacle {y : A y <= b}, uncertainty
/// set {w : G w <= h}, safety margin and the (penalized) slack that keeps the
/// program feasible.
struct RobustConstraintBlock {
  geom::HalfspaceMatrix A;
  Eigen::VectorXd b;
  geom::HalfspaceMatrix G;
  Eigen::VectorXd h;
  double d_safe = 2.0;
  double slack = 0.0;
};

/// Stacked residuals of the robust dual certificate at EV position p:
///   [ margin  = (A p - b)' lambda - mu' h - d_safe + slack   (>= 0 feasible)
///     cone    = 1 - lambda' A A' lambda                      (>= 0)
///     link    = A' lambda - G' mu                            (= 0, 2 rows)
///     lambda..., mu..., slack ]                              (>= 0)
Eigen::VectorXd robust_residuals(const Vec2& p, const DualVariables& duals,
                                 const RobustConstraintBlock& block);

/// Static-obstacle specialization: the mu terms and the link rows vanish.
/// Layout: [margin, cone, lambda...].
Eigen::VectorXd static_residuals(const Vec2& p, const Eigen::VectorXd& lambda,
                                 const geom::HalfspaceMatrix& A, const Eigen::VectorXd& b,
                                 double d_safe);

/// Distance from p to the polytope {y : A y <= b} by the conic program
///   max (A p - b)' lambda  s.t.  lambda >= 0, ||A' lambda||_2 <= 1,
/// solved exactly by support-set enumeration (supports of size <= 2 suffice
/// in the plane). Returns 0 for interior points.
double dual_distance(const Vec2& p, const geom::HalfspaceMatrix& A,
                     const Eigen::VectorXd& b);

/// Checks the geometric truth implied by a feasible certificate: distance
/// from p to (obstacle + uncertainty set) is at least d_safe - 1e-6.
/// Precondition: all certificate residuals >= -1e-9.
bool verify_certificate(const Vec2& p, const DualVariables& duals,
                        const RobustConstraintBlock& block);

}  // namespace evnav::avoid
