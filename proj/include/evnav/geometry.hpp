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

#include <span>
#include <vector>

#include "evnav/types.hpp"

namespace evnav::geom {

using HalfspaceMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Signed shoelace area; positive for counterclockwise vertex order.
double polygon_area(std::span<const Vec2> vertices);

/// Convex hull (monotone chain), counterclockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

/// True if the vertex list is a convex polygon in counterclockwise order
/// (tolerates collinear edges).
bool is_convex_ccw(std::span<const Vec2> vertices);

/// Vertices of the bounded 2-D polytope {y : A y <= b}, counterclockwise.
/// Degenerate sets may yield 1 (point) or 2 (segment) vertices. Throws
/// ValidationError if the set is empty.
std::vector<Vec2> polytope_vertices(const HalfspaceMatrix& A, const Eigen::VectorXd& b,
                                    double tol = 1e-9);

/// Minkowski sum of two convex polygons given counterclockwise. Proper
/// polygons use the rotating edge-merge; point/segment operands fall back to
/// the hull of pairwise sums. Throws ValidationError for non-convex input.
std::vector<Vec2> minkowski_sum_convex(std::span<const Vec2> p, std::span<const Vec2> q);

/// Exact Euclidean distance from a point to a convex polygon (>= 3 vertices);
/// zero inside. Throws ValidationError for degenerate polygons.
double distance_point_to_polygon(const Vec2& p, std::span<const Vec2> polygon);

/// Distance helper that also accepts degenerate "polygons" (points and
/// segments); used for forecast geometry.
double distance_point_to_convex_set(const Vec2& p, std::span<const Vec2> vertices);

}  // namespace evnav::geom
