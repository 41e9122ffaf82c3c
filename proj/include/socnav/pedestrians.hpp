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

#ifndef SOCNAV_PEDESTRIANS_HPP_
#define SOCNAV_PEDESTRIANS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"
#include "socnav/planner.hpp"
#include "socnav/rng.hpp"
#include "socnav/trajectory.hpp"

namespace socnav {

struct PedestrianParams {
  double density_per_100m = 6.0;  // hard cap: floor(density * L / 100)
  double band_lo_m = 0.5;  // spawn clearance band (distance from boundary)
  double band_hi_m = 1.0;
  double speed_mean = 1.0;
  double speed_std = 0.2;
  double speed_lo = 0.4;  // +-3 sigma truncation
  double speed_hi = 1.6;
  double radius_m = 0.3;  // disc footprint for robot-collision checks
  int placement_tries = 50;
  int reroute_tries = 10;
};

// A non-cooperative agent walking shortest-path routes on the road network.
// It never reacts to the robot.
struct Pedestrian {
  Vec2 position;
  double speed = 1.0;  // m/s, fixed per agent
  Trajectory route;
  std::vector<double> route_cumlen;
  double route_progress = 0.0;  // arc-length meters along the route
  int route_end_node = -1;      // network node the route terminates at
  double radius = 0.3;
};

namespace detail {

// Nearest network node reachable from p by a straight unblocked segment, or
// -1 when none qualifies.
inline int nearest_visible_node(const SemanticGrid& grid,
                                const RoadNetwork& net, const Vec2& p) {
  std::vector<int> order(net.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = distance(net.nodes[a], p);
    const double db = distance(net.nodes[b], p);
    return da != db ? da < db : a < b;
  });
  for (int idx : order) {
    if (segment_traversable(grid, p, net.nodes[idx], kEdgeSampleStepM)) {
      return idx;
    }
  }
  return -1;
}

inline void set_route(Pedestrian& ped, std::vector<Vec2> points,
                      int end_node) {
  ped.route.points = std::move(points);
  ped.route.kind = TrajectoryKind::kStandard;
  ped.route.start = ped.route.points.front();
  ped.route.goal = ped.route.points.back();
  ped.route_cumlen = cumulative_lengths(ped.route.points);
  ped.route_progress = 0.0;
  ped.route_end_node = end_node;
}

}  // namespace detail

// Spawns up to floor(density * path_length / 100) pedestrians in the spawn
// clearance band, each with a truncated-normal walking speed and a
// shortest-path route to a random network node. Placement failures shrink
// the returned list instead of raising.
inline std::vector<Pedestrian> spawn_pedestrians(const SemanticGrid& grid,
                                                 const DistanceField& field,
                                                 const RoadNetwork& net,
                                                 double path_length_m,
                                                 Rng& rng,
                                                 const PedestrianParams& params =
                                                     {}) {
  if (!(path_length_m > 0.0)) {
    throw ValidationError("spawn_pedestrians: path length must be positive");
  }
  const int count = static_cast<int>(
      std::floor(params.density_per_100m * path_length_m / 100.0));
  std::vector<Pedestrian> peds;
  if (count <= 0 || net.nodes.size() < 2) return peds;

  // Cells whose clearance sits inside the spawn band, in row-major order.
  std::vector<int> candidates;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.at(x, y) != CellLabel::kTraversable) continue;
      const double c = field.at(x, y);
      if (c >= params.band_lo_m && c <= params.band_hi_m) {
        candidates.push_back(y * grid.width + x);
      }
    }
  }
  if (candidates.empty()) return peds;

  const int n_nodes = static_cast<int>(net.nodes.size());
  for (int k = 0; k < count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < params.placement_tries && !placed;
         ++attempt) {
      const int cell =
          candidates[rng.uniform_index(candidates.size())];
      const Vec2 pos = grid.cell_center(cell % grid.width, cell / grid.width);
      const int start_node = detail::nearest_visible_node(grid, net, pos);
      if (start_node < 0) continue;
      int goal_node = -1;
      std::vector<Vec2> route_pts;
      for (int t = 0; t < params.reroute_tries; ++t) {
        const int g = static_cast<int>(rng.uniform_index(n_nodes));
        if (g == start_node) continue;
        try {
          const Trajectory path = astar_shortest_path(net, start_node, g);
          route_pts.clear();
          if (distance(pos, path.points.front()) > 1e-9) {
            route_pts.push_back(pos);
          }
          route_pts.insert(route_pts.end(), path.points.begin(),
                           path.points.end());
          goal_node = g;
          break;
        } catch (const NoPathError&) {
          continue;
        }
      }
      if (goal_node < 0 || route_pts.size() < 2) continue;
      Pedestrian ped;
      ped.position = pos;
      ped.radius = params.radius_m;
      detail::set_route(ped, std::move(route_pts), goal_node);
      ped.speed = rng.truncated_normal(params.speed_mean, params.speed_std,
                                       params.speed_lo, params.speed_hi);
      peds.push_back(std::move(ped));
      placed = true;
    }
  }
  return peds;
}

inline std::vector<Pedestrian> spawn_pedestrians(const SemanticGrid& grid,
                                                 const RoadNetwork& net,
                                                 double path_length_m,
                                                 Rng& rng,
                                                 const PedestrianParams& params =
                                                     {}) {
  const DistanceField field = distance_transform(grid);
  return spawn_pedestrians(grid, field, net, path_length_m, rng, params);
}

// Advances every pedestrian by speed * dt meters of route arc length. A
// pedestrian that exhausts its route picks a fresh random goal, starts the
// new shortest path, and spends the leftover arc length on it.
inline void step_pedestrians(std::vector<Pedestrian>& peds, double dt,
                             const RoadNetwork& net, Rng& rng,
                             const PedestrianParams& params = {}) {
  if (!(dt >= 0.0)) {
    throw ValidationError("step_pedestrians: dt must be nonnegative");
  }
  if (dt == 0.0) return;
  const int n_nodes = static_cast<int>(net.nodes.size());
  for (Pedestrian& ped : peds) {
    double remaining = ped.speed * dt;
    // The reroute guard bounds the loop even for absurd speed * dt.
    for (int hop = 0; hop < 1 + params.reroute_tries && remaining > 1e-12;
         ++hop) {
      const double total = ped.route_cumlen.back();
      const double left = total - ped.route_progress;
      if (remaining <= left || n_nodes < 2) {
        ped.route_progress += std::min(remaining, left);
        remaining = 0.0;
        break;
      }
      remaining -= left;
      ped.route_progress = total;
      int goal_node = -1;
      std::vector<Vec2> route_pts;
      for (int t = 0; t < params.reroute_tries; ++t) {
        const int g = static_cast<int>(rng.uniform_index(n_nodes));
        if (g == ped.route_end_node) continue;
        try {
          const Trajectory path =
              astar_shortest_path(net, ped.route_end_node, g);
          route_pts = path.points;
          goal_node = g;
          break;
        } catch (const NoPathError&) {
          continue;
        }
      }
      if (goal_node < 0) {
        remaining = 0.0;  // stranded at a dead end; stay put
        break;
      }
      detail::set_route(ped, std::move(route_pts), goal_node);
    }
    ped.position = point_at_arclength(ped.route.points, ped.route_cumlen,
                                      ped.route_progress);
  }
}

}  // namespace socnav

#endif  // SOCNAV_PEDESTRIANS_HPP_
