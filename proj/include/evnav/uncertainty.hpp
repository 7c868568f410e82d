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

#include <array>
#include <vector>

#include "evnav/geometry.hpp"
#include "evnav/types.hpp"

namespace evnav::uncertainty {

/// Displacement samples describing one horizon step.
struct SampleSet {
  int step_k = 0;  ///< horizon step this set describes (1-based)
  std::vector<Vec2> samples;

  std::size_t count() const { return samples.size(); }
};

/// PCA-aligned bounding box: mean, orthonormal principal directions and the
/// min/max projections of the centered samples onto each direction.
struct PcaBox {
  Vec2 mean = Vec2::Zero();
  Vec2 d1 = Vec2::UnitX();
  Vec2 d2 = Vec2::UnitY();
  double lo1 = 0.0, hi1 = 0.0;
  double lo2 = 0.0, hi2 = 0.0;
};

/// Halfspace set {w : G w <= h} with a stored interior witness point.
struct PolyhedralSet {
  geom::HalfspaceMatrix G;
  Eigen::VectorXd h;
  Vec2 witness = Vec2::Zero();
};

/// Minimum sample count N_s giving 1-beta confidence that a fresh draw lies
/// in the constructed set with probability at least 1-epsilon:
/// ceil((1/eps) (e/(e-1)) (2 dim - 1 + ln(1/beta))).
int required_sample_count(double epsilon, double beta, int dim);

/// Builds the PCA box from >= 2 samples. The 2x2 covariance eigenproblem is
/// solved in closed form; equal eigenvalues fall back to the coordinate axes
/// and each direction's sign is fixed so its first nonzero component is
/// positive.
PcaBox pca_box(const SampleSet& samples);

/// Halfspace form of the box: rows (d1, -d1, d2, -d2) with offsets shifted
/// by the mean projection.
PolyhedralSet to_halfspaces(const PcaBox& box);

/// Componentwise G w <= h + tol.
bool contains(const PolyhedralSet& set, const Vec2& omega, double tol = 1e-9);

/// The four corners mean + e1 d1 + e2 d2, e_i in {lo_i, hi_i}.
std::array<Vec2, 4> box_vertices(const PcaBox& box);

/// The set {point}: rows (+I, -I) with matching offsets.
PolyhedralSet singleton_set(const Vec2& point);

/// Monte-Carlo check of the finite-sample coverage bound: per trial, build a
/// set from required_sample_count(epsilon, beta, 2) draws of a fixed
/// correlated 2-D distribution and measure the fraction of fresh draws it
/// contains. A trial succeeds when that fraction reaches 1 - epsilon; the
/// run passes when the success count clears the 1 - beta target with
/// two-sided 99% binomial slack.
struct CoverageValidation {
  int sample_count = 0;    ///< training draws per trial
  int trials = 0;
  int successes = 0;
  int min_successes = 0;   ///< pass threshold including binomial slack
  double worst_fraction = 1.0;
  bool pass = false;
};

CoverageValidation validate_coverage(double epsilon, double beta, int trials,
                                     int fresh_draws, std::uint64_t seed);

}  // namespace evnav::uncertainty
