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

#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "evnav/geometry.hpp"
#include "evnav/types.hpp"
#include "evnav/uncertainty.hpp"

namespace evnav::obstacles {

/// Current occupancy {y : A y <= b} in the inertial frame; rows unit-norm.
struct ObstaclePolytope {
  geom::HalfspaceMatrix A;
  Eigen::VectorXd b;

  std::vector<Vec2> vertices() const { return geom::polytope_vertices(A, b); }
};

/// Four unit-norm halfspaces of an oriented rectangle.
ObstaclePolytope rectangle_halfspaces(const Vec2& center, double heading, double length,
                                      double width);

/// Fixed-heading rectangle whose reference point (geometric center) is
/// tracked over time in a bounded history buffer.
class ObstacleTrack {
 public:
  ObstacleTrack(std::size_t capacity, double T_s)
      : capacity_(capacity), T_s_(T_s) {}

  /// Appends a position; t must advance by exactly T_s (tolerance 1e-9).
  void record_position(const Vec2& position, double t);

  /// k-step displacement samples, newest first, at most max_samples. Returns
  /// nullopt when the history is shorter than k+1 entries.
  std::optional<uncertainty::SampleSet> displacement_samples(int k, int max_samples) const;

  std::size_t size() const { return positions_.size(); }
  std::size_t capacity() const { return capacity_; }
  double sample_time() const { return T_s_; }
  const Vec2& latest() const;
  double latest_time() const;

 private:
  std::size_t capacity_;
  double T_s_;
  std::deque<Vec2> positions_;
  std::deque<double> times_;
};

/// Scripted ground-truth motion programs.
struct StaticScript {
  Vec2 center = Vec2::Zero();
};

struct AccelPhase {
  double accel = 0.0;     ///< [m/s^2]
  double duration = 0.0;  ///< [s]
};

/// Longitudinal piecewise-constant-acceleration profile along a fixed
/// heading; speed clamps at zero (no reversing), final speed holds.
struct AccelProfileScript {
  Vec2 start = Vec2::Zero();
  double heading = 0.0;
  double v0 = 0.0;
  std::vector<AccelPhase> phases;
};

/// Piecewise-linear waypoint path with one speed per segment; the obstacle
/// parks at the last waypoint.
struct WaypointScript {
  std::vector<Vec2> points;
  std::vector<double> speeds;  ///< size points.size()-1, all > 0
};

class ObstacleScript {
 public:
  ObstacleScript() : program_(StaticScript{}) {}
  explicit ObstacleScript(StaticScript s) : program_(std::move(s)) {}
  explicit ObstacleScript(AccelProfileScript s);
  explicit ObstacleScript(WaypointScript s);

  /// Ground-truth reference-point position at time t >= 0 (no jitter).
  Vec2 position(double t) const;

  const std::variant<StaticScript, AccelProfileScript, WaypointScript>& program() const {
    return program_;
  }

 private:
  std::variant<StaticScript, AccelProfileScript, WaypointScript> program_;
};

/// Future occupancy: base polytope plus one uncertainty set per horizon step
/// (index 0 holds the 1-step set).
struct OccupancyForecast {
  ObstaclePolytope base;
  std::vector<uncertainty::PolyhedralSet> step_sets;
  std::vector<bool> under_sampled;  ///< per step: built from < N_s samples

  const uncertainty::PolyhedralSet& step(int k) const { return step_sets.at(k - 1); }
};

/// Builds the per-step uncertainty sets from the track history. Steps with
/// fewer than two usable samples get the singleton {0} (momentarily-static
/// bootstrap); steps with fewer than N_s samples are flagged under-sampled.
OccupancyForecast forecast_occupancy(const ObstacleTrack& track,
                                     const ObstaclePolytope& base, int horizon, int N_s);

}  // namespace evnav::obstacles
