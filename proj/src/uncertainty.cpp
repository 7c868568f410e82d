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

#include "evnav/uncertainty.hpp"

#include <cmath>
#include <string>

#include "evnav/util.hpp"

namespace evnav::uncertainty {

int required_sample_count(double epsilon, double beta, int dim) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ValidationError("beta must lie in (0, 1), got " + std::to_string(beta));
  }
  if (dim < 1) throw ValidationError("dimension must be positive");
  const double e_factor = std::exp(1.0) / (std::exp(1.0) - 1.0);
  const double bound = (1.0 / epsilon) * e_factor * (2.0 * dim - 1.0 + std::log(1.0 / beta));
  return static_cast<int>(std::ceil(bound));
}

namespace {

// Canonical sign: first component with magnitude above tolerance is positive.
Vec2 canonical_sign(Vec2 v) {
  const double lead = std::abs(v.x()) > 1e-12 ? v.x() : v.y();
  return lead < 0.0 ? Vec2(-v) : v;
}

}  // namespace

PcaBox pca_box(const SampleSet& set) {
  const std::size_t n = set.samples.size();
  if (n < 2) {
    throw ValidationError("pca_box needs at least 2 samples, got " + std::to_string(n));
  }
  for (const Vec2& w : set.samples) {
    if (!w.allFinite()) throw ValidationError("pca_box sample is not finite");
  }

  PcaBox box;
  box.mean.setZero();
  for (const Vec2& w : set.samples) box.mean += w;
  box.mean /= static_cast<double>(n);

  // Sample covariance of the centered data.
  double cxx = 0.0, cxy = 0.0, cyy = 0.0;
  for (const Vec2& w : set.samples) {
    const Vec2 z = w - box.mean;
    cxx += z.x() * z.x();
    cxy += z.x() * z.y();
    cyy += z.y() * z.y();
  }
  const double norm = 1.0 / static_cast<double>(n - 1);
  cxx *= norm;
  cxy *= norm;
  cyy *= norm;

  // Closed-form 2x2 eigendecomposition, eigenvalues descending.
  const double tr = cxx + cyy;
  const double det = cxx * cyy - cxy * cxy;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  const double ev1 = tr / 2.0 + disc;
  const double ev2 = tr / 2.0 - disc;

  const double scale = std::max({std::abs(cxx), std::abs(cyy), std::abs(cxy), 1e-300});
  if (disc <= 1e-12 * scale) {
    // Equal eigenvalues (isotropic or all-identical data): coordinate axes.
    box.d1 = Vec2::UnitX();
    box.d2 = Vec2::UnitY();
  } else {
    // Eigenvector of ev1 from the better-conditioned row of (C - ev1 I).
    Vec2 v1(cxy, ev1 - cxx);
    if (v1.norm() < 1e-14 * std::max(1.0, std::abs(ev1))) v1 = Vec2(ev1 - cyy, cxy);
    box.d1 = canonical_sign(v1.normalized());
    box.d2 = canonical_sign(Vec2(-box.d1.y(), box.d1.x()));
    (void)ev2;
  }

  box.lo1 = box.hi1 = 0.0;
  box.lo2 = box.hi2 = 0.0;
  bool first = true;
  for (const Vec2& w : set.samples) {
    const Vec2 z = w - box.mean;
    const double t1 = z.dot(box.d1);
    const double t2 = z.dot(box.d2);
    if (first) {
      box.lo1 = box.hi1 = t1;
      box.lo2 = box.hi2 = t2;
      first = false;
    } else {
      box.lo1 = std::min(box.lo1, t1);
      box.hi1 = std::max(box.hi1, t1);
      box.lo2 = std::min(box.lo2, t2);
      box.hi2 = std::max(box.hi2, t2);
    }
  }
  return box;
}

PolyhedralSet to_halfspaces(const PcaBox& box) {
  PolyhedralSet set;
  set.G.resize(4, 2);
  set.h.resize(4);
  set.G.row(0) = box.d1.transpose();
  set.G.row(1) = -box.d1.transpose();
  set.G.row(2) = box.d2.transpose();
  set.G.row(3) = -box.d2.transpose();
  const double m1 = box.d1.dot(box.mean);
  const double m2 = box.d2.dot(box.mean);
  set.h << box.hi1 + m1, -(box.lo1 + m1), box.hi2 + m2, -(box.lo2 + m2);
  set.witness = box.mean;
  return set;
}

bool contains(const PolyhedralSet& set, const Vec2& omega, double tol) {
  return ((set.G * omega - set.h).array() <= tol).all();
}

std::array<Vec2, 4> box_vertices(const PcaBox& box) {
  return {box.mean + box.lo1 * box.d1 + box.lo2 * box.d2,
          box.mean + box.hi1 * box.d1 + box.lo2 * box.d2,
          box.mean + box.hi1 * box.d1 + box.hi2 * box.d2,
          box.mean + box.lo1 * box.d1 + box.hi2 * box.d2};
}

PolyhedralSet singleton_set(const Vec2& point) {
  PolyhedralSet set;
  set.G.resize(4, 2);
  set.h.resize(4);
  set.G << 1, 0, -1, 0, 0, 1, 0, -1;
  set.h << point.x(), -point.x(), point.y(), -point.y();
  set.witness = point;
  return set;
}

CoverageValidation validate_coverage(double epsilon, double beta, int trials,
                                     int fresh_draws, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("validate_coverage needs trials >= 1");
  if (fresh_draws < 1) throw ValidationError("validate_coverage needs fresh_draws >= 1");
  CoverageValidation out;
  out.sample_count = required_sample_count(epsilon, beta, 2);
  out.trials = trials;

  Rng rng(seed);
  auto draw = [&rng]() {
    const double x = rng.normal();
    const double y = 0.6 * x + 0.8 * rng.normal();
    return Vec2(0.5 + 0.3 * x, -0.2 + 0.25 * y);
  };

  for (int t = 0; t < trials; ++t) {
    SampleSet set;
    set.step_k = 1;
    set.samples.reserve(static_cast<std::size_t>(out.sample_count));
    for (int i = 0; i < out.sample_count; ++i) set.samples.push_back(draw());
    const PolyhedralSet poly = to_halfspaces(pca_box(set));
    int inside = 0;
    for (int i = 0; i < fresh_draws; ++i) {
      if (contains(poly, draw())) ++inside;
    }
    const double fraction = static_cast<double>(inside) / fresh_draws;
    out.worst_fraction = std::min(out.worst_fraction, fraction);
    if (fraction >= 1.0 - epsilon) ++out.successes;
  }

  const double target = trials * (1.0 - beta);
  const double slack = 2.5758 * std::sqrt(trials * beta * (1.0 - beta));
  out.min_successes = std::max(0, static_cast<int>(std::ceil(target - slack)));
  out.pass = out.successes >= out.min_successes;
  return out;
}

}  // namespace evnav::uncertainty
