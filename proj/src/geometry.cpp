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

#include "evnav/geometry.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "evnav/util.hpp"

namespace evnav::geom {

double polygon_area(std::span<const Vec2> vertices) {
  double twice = 0.0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    twice += cross2(a, b);
  }
  return 0.5 * twice;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) {
                             return (a - b).lpNorm<Eigen::Infinity>() < 1e-12;
                           }),
               points.end());
  const std::size_t n = points.size();
  if (n <= 2) return points;

  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 1e-12) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper chain
    while (k >= t && cross2(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= 1e-12) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool is_convex_ccw(std::span<const Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e1 = vertices[(i + 1) % n] - vertices[i];
    const Vec2 e2 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (cross2(e1, e2) < -1e-9 * (e1.norm() * e2.norm() + 1.0)) return false;
  }
  return polygon_area(vertices) > 0.0;
}

std::vector<Vec2> polytope_vertices(const HalfspaceMatrix& A, const Eigen::VectorXd& b,
                                    double tol) {
  const Eigen::Index n = A.rows();
  std::vector<Vec2> candidates;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Matrix2d M;
      M.row(0) = A.row(i);
      M.row(1) = A.row(j);
      const double det = M.determinant();
      const double scale = A.row(i).norm() * A.row(j).norm();
      if (std::abs(det) < 1e-12 * std::max(scale, 1e-12)) continue;
      const Vec2 v = M.inverse() * Vec2(b[i], b[j]);
      if (((A * v - b).array() <= tol).all()) candidates.push_back(v);
    }
  }
  if (candidates.empty()) {
    throw ValidationError("polytope has no vertices (empty or unbounded)");
  }
  std::vector<Vec2> hull = convex_hull(std::move(candidates));
  if (hull.empty()) throw ValidationError("polytope vertex enumeration failed");
  return hull;
}

namespace {

// Index of the lexicographically smallest (y, then x) vertex: the canonical
// starting point for the edge merge.
std::size_t lowest_vertex(std::span<const Vec2> poly) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < poly.size(); ++i) {
    if (poly[i].y() < poly[best].y() ||
        (poly[i].y() == poly[best].y() && poly[i].x() < poly[best].x())) {
      best = i;
    }
  }
  return best;
}

std::vector<Vec2> sum_by_hull(std::span<const Vec2> p, std::span<const Vec2> q) {
  std::vector<Vec2> sums;
  sums.reserve(p.size() * q.size());
  for (const Vec2& a : p)
    for (const Vec2& b : q) sums.push_back(a + b);
  return convex_hull(std::move(sums));
}

}  // namespace

std::vector<Vec2> minkowski_sum_convex(std::span<const Vec2> p, std::span<const Vec2> q) {
  if (p.empty() || q.empty()) throw ValidationError("minkowski sum of an empty set");
  if (p.size() >= 3 && !is_convex_ccw(p)) {
    throw ValidationError("minkowski sum requires convex counterclockwise polygons");
  }
  if (q.size() >= 3 && !is_convex_ccw(q)) {
    throw ValidationError("minkowski sum requires convex counterclockwise polygons");
  }
  if (p.size() < 3 || q.size() < 3) return sum_by_hull(p, q);

  // Rotating edge merge: walk both edge fans in polar-angle order.
  const std::size_t np = p.size();
  const std::size_t nq = q.size();
  const std::size_t ip0 = lowest_vertex(p);
  const std::size_t iq0 = lowest_vertex(q);
  std::vector<Vec2> out;
  out.reserve(np + nq);
  std::size_t i = 0, j = 0;
  Vec2 current = p[ip0] + q[iq0];
  while (i < np || j < nq) {
    out.push_back(current);
    const Vec2 ep = p[(ip0 + i + 1) % np] - p[(ip0 + i) % np];
    const Vec2 eq = q[(iq0 + j + 1) % nq] - q[(iq0 + j) % nq];
    if (j >= nq) {
      current += ep;
      ++i;
    } else if (i >= np) {
      current += eq;
      ++j;
    } else {
      const double c = cross2(ep, eq);
      if (c > 0.0) {
        current += ep;
        ++i;
      } else if (c < 0.0) {
        current += eq;
        ++j;
      } else {  // parallel edges advance together
        current += ep + eq;
        ++i;
        ++j;
      }
    }
  }
  // Drop collinear chains introduced by parallel-edge merges.
  return convex_hull(std::move(out));
}

double distance_point_to_convex_set(const Vec2& p, std::span<const Vec2> vertices) {
  const std::size_t n = vertices.size();
  if (n == 0) throw ValidationError("distance to an empty vertex set");
  if (n == 1) return (p - vertices[0]).norm();

  double best = std::numeric_limits<double>::infinity();
  bool inside = n >= 3;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % n];
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (p - (a + t * ab)).norm());
    if (inside && cross2(ab, p - a) < 0.0) inside = false;
  }
  return inside ? 0.0 : best;
}

double distance_point_to_polygon(const Vec2& p, std::span<const Vec2> polygon) {
  if (polygon.size() < 3) {
    throw ValidationError("distance_point_to_polygon requires >= 3 vertices");
  }
  if (!is_convex_ccw(polygon)) {
    throw ValidationError("distance_point_to_polygon requires a convex CCW polygon");
  }
  return distance_point_to_convex_set(p, polygon);
}

}  // namespace evnav::geom
