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

#include "evnav/obstacles.hpp"

#include <cmath>
#include <string>

#include "evnav/util.hpp"

namespace evnav::obstacles {

ObstaclePolytope rectangle_halfspaces(const Vec2& center, double heading, double length,
                                      double width) {
  if (!(length > 0.0) || !(width > 0.0)) {
    throw ValidationError("rectangle dimensions must be positive");
  }
  const Vec2 axis_long(std::cos(heading), std::sin(heading));
  const Vec2 axis_lat(-std::sin(heading), std::cos(heading));
  ObstaclePolytope poly;
  poly.A.resize(4, 2);
  poly.b.resize(4);
  poly.A.row(0) = axis_long.transpose();
  poly.A.row(1) = -axis_long.transpose();
  poly.A.row(2) = axis_lat.transpose();
  poly.A.row(3) = -axis_lat.transpose();
  poly.b[0] = axis_long.dot(center) + length / 2.0;
  poly.b[1] = -axis_long.dot(center) + length / 2.0;
  poly.b[2] = axis_lat.dot(center) + width / 2.0;
  poly.b[3] = -axis_lat.dot(center) + width / 2.0;
  return poly;
}

void ObstacleTrack::record_position(const Vec2& position, double t) {
  if (!times_.empty()) {
    const double expected = times_.back() + T_s_;
    if (!(t > times_.back()) || std::abs(t - expected) > 1e-9) {
      throw ValidationError("track timestamps must advance by T_s; expected " +
                            std::to_string(expected) + ", got " + std::to_string(t));
    }
  }
  positions_.push_back(position);
  times_.push_back(t);
  if (positions_.size() > capacity_) {
    positions_.pop_front();
    times_.pop_front();
  }
}

const Vec2& ObstacleTrack::latest() const {
  if (positions_.empty()) throw ValidationError("track is empty");
  return positions_.back();
}

double ObstacleTrack::latest_time() const {
  if (times_.empty()) throw ValidationError("track is empty");
  return times_.back();
}

std::optional<uncertainty::SampleSet> ObstacleTrack::displacement_samples(
    int k, int max_samples) const {
  if (k < 1) throw ValidationError("displacement step k must be >= 1");
  const auto len = static_cast<int>(positions_.size());
  if (len < k + 1) return std::nullopt;
  uncertainty::SampleSet set;
  set.step_k = k;
  const int available = len - k;
  const int count = std::min(available, max_samples);
  set.samples.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const int i = len - 1 - j;  // newest first
    set.samples.push_back(positions_[static_cast<std::size_t>(i)] -
                          positions_[static_cast<std::size_t>(i - k)]);
  }
  return set;
}

ObstacleScript::ObstacleScript(AccelProfileScript s) : program_(std::move(s)) {
  const auto& prof = std::get<AccelProfileScript>(program_);
  if (prof.v0 < 0.0) throw ValidationError("accel profile needs v0 >= 0");
  for (const auto& phase : prof.phases) {
    if (phase.duration < 0.0) throw ValidationError("accel phase duration must be >= 0");
  }
}

ObstacleScript::ObstacleScript(WaypointScript s) : program_(std::move(s)) {
  const auto& wp = std::get<WaypointScript>(program_);
  if (wp.points.empty()) throw ValidationError("waypoint script needs >= 1 point");
  if (wp.points.size() >= 2 && wp.speeds.size() != wp.points.size() - 1) {
    throw ValidationError("waypoint script needs one speed per segment");
  }
  for (double v : wp.speeds) {
    if (!(v > 0.0)) throw ValidationError("waypoint segment speeds must be > 0");
  }
}

namespace {

Vec2 eval_static(const StaticScript& s, double) { return s.center; }

Vec2 eval_accel(const AccelProfileScript& s, double t) {
  double distance = 0.0;
  double v = s.v0;
  double remaining = std::max(t, 0.0);
  auto advance = [&](double a, double dt) {
    // Integrate v' = a with v clamped at 0 (vehicle stops, never reverses).
    if (a < 0.0 && v > 0.0) {
      const double t_stop = v / -a;
      if (dt >= t_stop) {
        distance += v * t_stop + 0.5 * a * t_stop * t_stop;
        v = 0.0;
        return;
      }
    }
    if (v <= 0.0 && a <= 0.0) return;
    if (v <= 0.0 && a > 0.0) v = 0.0;
    distance += v * dt + 0.5 * a * dt * dt;
    v = std::max(0.0, v + a * dt);
  };
  for (const auto& phase : s.phases) {
    if (remaining <= 0.0) break;
    const double dt = std::min(remaining, phase.duration);
    advance(phase.accel, dt);
    remaining -= dt;
  }
  if (remaining > 0.0) distance += v * remaining;  // hold final speed
  return s.start + distance * Vec2(std::cos(s.heading), std::sin(s.heading));
}

Vec2 eval_waypoints(const WaypointScript& s, double t) {
  if (s.points.size() == 1) return s.points.front();
  double remaining = std::max(t, 0.0);
  for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
    const Vec2 seg = s.points[i + 1] - s.points[i];
    const double len = seg.norm();
    const double speed = s.speeds[i];
    const double seg_time = len / speed;
    if (remaining < seg_time) {
      return s.points[i] + (remaining / seg_time) * seg;
    }
    remaining -= seg_time;
  }
  return s.points.back();
}

}  // namespace

Vec2 ObstacleScript::position(double t) const {
  return std::visit(
      [&](const auto& prog) -> Vec2 {
        using T = std::decay_t<decltype(prog)>;
        if constexpr (std::is_same_v<T, StaticScript>) return eval_static(prog, t);
        if constexpr (std::is_same_v<T, AccelProfileScript>) return eval_accel(prog, t);
        if constexpr (std::is_same_v<T, WaypointScript>) return eval_waypoints(prog, t);
      },
      program_);
}

OccupancyForecast forecast_occupancy(const ObstacleTrack& track,
                                     const ObstaclePolytope& base, int horizon, int N_s) {
  if (horizon < 1) throw ValidationError("forecast horizon must be >= 1");
  if (track.size() == 0) throw ValidationError("forecast needs a nonempty track");

  // Millimetric inflation of every forecast set. Exactly degenerate sets
  // (singletons and segments from noiseless or short histories) have no
  // interior, which both starves the constraint multipliers of a strictly
  // feasible point and leaves the paired certificate variables with an
  // unbounded ray; a 1 mm margin is far below d_safe and removes both.
  constexpr double kSetInflation = 1e-3;

  OccupancyForecast forecast;
  forecast.base = base;
  forecast.step_sets.reserve(static_cast<std::size_t>(horizon));
  forecast.under_sampled.reserve(static_cast<std::size_t>(horizon));
  for (int k = 1; k <= horizon; ++k) {
    const auto samples = track.displacement_samples(k, N_s);
    uncertainty::PolyhedralSet set;
    bool under = true;
    if (!samples.has_value() || samples->count() < 2) {
      // Bootstrap: treat the obstacle as momentarily static.
      set = uncertainty::singleton_set(Vec2::Zero());
    } else {
      set = uncertainty::to_halfspaces(uncertainty::pca_box(*samples));
      under = samples->count() < static_cast<std::size_t>(N_s);
      if (under) {
        log::debug("forecast step " + std::to_string(k) + " under-sampled: " +
                   std::to_string(samples->count()) + "/" + std::to_string(N_s));
      }
    }
    set.h.array() += kSetInflation;
    forecast.step_sets.push_back(std::move(set));
    forecast.under_sampled.push_back(under);
  }
  return forecast;
}

}  // namespace evnav::obstacles
