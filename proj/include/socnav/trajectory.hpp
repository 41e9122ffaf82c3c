// Copyright 2026 The socnav Authors
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

#ifndef SOCNAV_TRAJECTORY_HPP_
#define SOCNAV_TRAJECTORY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/common.hpp"

namespace socnav {

enum class TrajectoryKind : std::uint8_t { kStandard, kRecovery, kRollout };

inline std::string to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::kStandard: return "standard";
    case TrajectoryKind::kRecovery: return "recovery";
    case TrajectoryKind::kRollout: return "rollout";
  }
  return "standard";
}

inline TrajectoryKind trajectory_kind_from_string(const std::string& s) {
  if (s == "standard") return TrajectoryKind::kStandard;
  if (s == "recovery") return TrajectoryKind::kRecovery;
  if (s == "rollout") return TrajectoryKind::kRollout;
  throw ParseError("unknown trajectory kind: " + s);
}

// Ordered waypoint sequence in world meters. Consecutive points are distinct
// for standard/recovery trajectories; rollout trajectories converted from
// action chunks may contain near-zero steps.
struct Trajectory {
  std::vector<Vec2> points;
  TrajectoryKind kind = TrajectoryKind::kStandard;
  Vec2 start;
  Vec2 goal;
  std::uint64_t seed = 0;
  // Recovery provenance: sampled initial heading relative to the standard
  // path's forward direction, and the offset side.
  std::optional<double> initial_heading_rad;
  std::optional<bool> offset_left;
};

inline double path_length(const std::vector<Vec2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    len += distance(pts[i - 1], pts[i]);
  }
  return len;
}

inline double path_length(const Trajectory& t) { return path_length(t.points); }

// Cumulative arc length at each point; front() is 0, back() is the total.
inline std::vector<double> cumulative_lengths(const std::vector<Vec2>& pts) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
  }
  return cum;
}

// Point at arc length s with precomputed cumulative lengths (O(log n)).
inline Vec2 point_at_arclength(const std::vector<Vec2>& pts,
                               const std::vector<double>& cum, double s) {
  if (pts.empty()) throw ValidationError("point_at_arclength: empty polyline");
  if (s <= 0.0) return pts.front();
  if (s >= cum.back()) return pts.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cum.begin());
  const double seg = cum[i] - cum[i - 1];
  if (seg <= 0.0) return pts[i];
  const double f = (s - cum[i - 1]) / seg;
  return pts[i - 1] + (pts[i] - pts[i - 1]) * f;
}

// Point at arc length s along the polyline, clamped to the endpoints.
inline Vec2 point_at_arclength(const std::vector<Vec2>& pts, double s) {
  if (pts.empty()) throw ValidationError("point_at_arclength: empty polyline");
  if (s <= 0.0) return pts.front();
  double walked = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double seg = distance(pts[i - 1], pts[i]);
    if (walked + seg >= s && seg > 0.0) {
      const double f = (s - walked) / seg;
      return pts[i - 1] + (pts[i] - pts[i - 1]) * f;
    }
    walked += seg;
  }
  return pts.back();
}

// Resamples a polyline to n points uniformly spaced in arc length, keeping
// both endpoints. A zero-length polyline resamples to n copies of its first
// point.
inline std::vector<Vec2> resample_arclength(const std::vector<Vec2>& pts,
                                            int n) {
  if (pts.empty() || n < 2) {
    throw ValidationError("resample_arclength: need points and n >= 2");
  }
  const double total = path_length(pts);
  std::vector<Vec2> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double s = total * static_cast<double>(i) / (n - 1);
    out.push_back(point_at_arclength(pts, s));
  }
  return out;
}

// Re-spaces a polyline to waypoints at a fixed arc-length spacing, keeping
// both endpoints. Degenerate duplicates are dropped.
inline std::vector<Vec2> densify_polyline(const std::vector<Vec2>& pts,
                                          double spacing_m) {
  if (pts.size() < 2) {
    throw ValidationError("densify_polyline: need at least 2 points");
  }
  if (!(spacing_m > 0.0)) {
    throw ValidationError("densify_polyline: spacing must be positive");
  }
  const double total = path_length(pts);
  const int steps = std::max(1, static_cast<int>(std::ceil(total / spacing_m)));
  std::vector<Vec2> out;
  out.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const double s = total * static_cast<double>(i) / steps;
    const Vec2 p = point_at_arclength(pts, s);
    if (out.empty() || distance(out.back(), p) > 1e-12) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL serialization. One record per trajectory.
// ---------------------------------------------------------------------------

inline nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json pts = nlohmann::json::array();
  for (const Vec2& p : t.points) pts.push_back({p.x, p.y});
  nlohmann::json j = {{"kind", to_string(t.kind)},
                      {"points", pts},
                      {"start", {t.start.x, t.start.y}},
                      {"goal", {t.goal.x, t.goal.y}},
                      {"seed", t.seed}};
  if (t.initial_heading_rad) j["initial_heading_rad"] = *t.initial_heading_rad;
  if (t.offset_left) j["offset_left"] = *t.offset_left;
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  try {
    t.kind = trajectory_kind_from_string(j.at("kind").get<std::string>());
    for (const auto& p : j.at("points")) {
      t.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    t.start = {j.at("start").at(0).get<double>(),
               j.at("start").at(1).get<double>()};
    t.goal = {j.at("goal").at(0).get<double>(),
              j.at("goal").at(1).get<double>()};
    t.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("initial_heading_rad")) {
      t.initial_heading_rad = j["initial_heading_rad"].get<double>();
    }
    if (j.contains("offset_left")) {
      t.offset_left = j["offset_left"].get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("trajectory record: ") + e.what());
  }
  return t;
}

}  // namespace socnav

#endif  // SOCNAV_TRAJECTORY_HPP_
