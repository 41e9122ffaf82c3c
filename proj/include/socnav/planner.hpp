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

#ifndef SOCNAV_PLANNER_HPP_
#define SOCNAV_PLANNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"
#include "socnav/json_io.hpp"
#include "socnav/rng.hpp"
#include "socnav/trajectory.hpp"

namespace socnav {

// Sparse waypoint graph over the traversable region. Edge weights are the
// Euclidean distances between the endpoint nodes.
struct RoadNetwork {
  std::vector<Vec2> nodes;
  std::vector<std::pair<int, int>> edges;
  // adjacency[i] = (neighbor index, edge length in meters).
  std::vector<std::vector<std::pair<int, double>>> adjacency;
  // True when the graph has more than one connected component. Allowed, but
  // samplers may reject pairs across components.
  bool disconnected = false;
};

namespace detail {

// Walks a straight segment at `step_m` intervals (endpoints included) and
// reports whether every sample lands on a traversable cell.
inline bool segment_traversable(const SemanticGrid& grid, Vec2 a, Vec2 b,
                                double step_m) {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / step_m)));
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = a + (b - a) * (static_cast<double>(i) / n);
    if (!is_traversable(grid, p)) return false;
  }
  return true;
}

}  // namespace detail

// Spacing used both for edge-blockage sampling and recovery interpolation.
inline constexpr double kEdgeSampleStepM = 0.05;

inline RoadNetwork build_road_graph(const SemanticGrid& grid,
                                    std::vector<Vec2> nodes,
                                    std::vector<std::pair<int, int>> edges) {
  RoadNetwork net;
  const int n = static_cast<int>(nodes.size());
  for (int i = 0; i < n; ++i) {
    if (!is_traversable(grid, nodes[i])) {
      throw NodeOffRoadError("node " + std::to_string(i) + " at (" +
                             std::to_string(nodes[i].x) + ", " +
                             std::to_string(nodes[i].y) +
                             ") is not on a traversable cell");
    }
  }
  net.adjacency.assign(n, {});
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw ValidationError("edge references invalid node index (" +
                            std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    const double len = distance(nodes[i], nodes[j]);
    if (!(len > 0.0)) {
      throw ValidationError("zero-length edge (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
    }
    if (!detail::segment_traversable(grid, nodes[i], nodes[j],
                                     kEdgeSampleStepM)) {
      throw EdgeBlockedError("edge (" + std::to_string(i) + ", " +
                             std::to_string(j) +
                             ") crosses a non-traversable cell");
    }
    net.adjacency[i].push_back({j, len});
    net.adjacency[j].push_back({i, len});
  }
  net.nodes = std::move(nodes);
  net.edges = std::move(edges);
  // Connectivity check (breadth-first from node 0) for the warning flag.
  if (n > 0) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const auto& [v, w] : net.adjacency[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    net.disconnected = (count < n);
  }
  return net;
}

// A* over the road graph with the (admissible) straight-line heuristic.
// Returns the node-index sequence from s to g; cost equals the summed edge
// lengths. Throws DegenerateQueryError when s == g and NoPathError when g is
// unreachable.
inline std::vector<int> astar_node_path(const RoadNetwork& net, int s, int g) {
  const int n = static_cast<int>(net.nodes.size());
  if (s < 0 || g < 0 || s >= n || g >= n) {
    throw ValidationError("astar: node index out of range");
  }
  if (s == g) {
    throw DegenerateQueryError("astar: start and goal are the same node " +
                               std::to_string(s));
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<int> parent(n, -1);
  // (f, node); ties broken by node index for determinism.
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  dist[s] = 0.0;
  open.push({distance(net.nodes[s], net.nodes[g]), s});
  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (u == g) break;
    if (f > dist[u] + distance(net.nodes[u], net.nodes[g]) + 1e-12) continue;
    for (const auto& [v, w] : net.adjacency[u]) {
      const double cand = dist[u] + w;
      if (cand < dist[v]) {
        dist[v] = cand;
        parent[v] = u;
        open.push({cand + distance(net.nodes[v], net.nodes[g]), v});
      }
    }
  }
  if (dist[g] == inf) {
    throw NoPathError("astar: no path from node " + std::to_string(s) +
                      " to node " + std::to_string(g));
  }
  std::vector<int> path;
  for (int u = g; u != -1; u = parent[u]) path.push_back(u);
  std::reverse(path.begin(), path.end());
  return path;
}

inline Trajectory astar_shortest_path(const RoadNetwork& net, int s, int g) {
  const std::vector<int> idx = astar_node_path(net, s, g);
  Trajectory t;
  t.kind = TrajectoryKind::kStandard;
  t.points.reserve(idx.size());
  for (int i : idx) t.points.push_back(net.nodes[i]);
  t.start = net.nodes[s];
  t.goal = net.nodes[g];
  return t;
}

inline double astar_cost(const RoadNetwork& net, int s, int g) {
  return path_length(astar_shortest_path(net, s, g));
}

struct StandardSampleParams {
  double l_min_m = 50.0;
  double densify_spacing_m = 0.25;
  int max_attempts = 10000;
};

// Uniformly samples node pairs until the network geodesic between them is at
// least l_min, then returns the A* path densified to a fixed waypoint
// spacing.
inline Trajectory sample_standard_trajectory(
    const RoadNetwork& net, Rng& rng,
    const StandardSampleParams& params = {}) {
  const int n = static_cast<int>(net.nodes.size());
  if (n < 2) throw NoFeasiblePairError("network has fewer than two nodes");
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    const int s = static_cast<int>(rng.uniform_index(n));
    const int g = static_cast<int>(rng.uniform_index(n));
    if (s == g) continue;
    Trajectory path;
    try {
      path = astar_shortest_path(net, s, g);
    } catch (const NoPathError&) {
      continue;  // different components; allowed, just resample
    }
    if (path_length(path) < params.l_min_m) continue;
    Trajectory out;
    out.kind = TrajectoryKind::kStandard;
    out.points = densify_polyline(path.points, params.densify_spacing_m);
    out.start = net.nodes[s];
    out.goal = net.nodes[g];
    out.seed = rng.root_seed();
    return out;
  }
  throw NoFeasiblePairError(
      "no node pair with geodesic >= " + std::to_string(params.l_min_m) +
      " m found in " + std::to_string(params.max_attempts) + " attempts");
}

struct RecoveryParams {
  double convergence_arclength_m = 5.0;
  double offset_min_m = 0.5;
  double offset_max_m = 2.0;
  // Initial-heading magnitude relative to path-forward; the sign follows the
  // offset side (left offset -> negative, right offset -> positive).
  double heading_min_deg = 45.0;
  double heading_max_deg = 90.0;
  double step_m = kEdgeSampleStepM;
  double noise_sigma_m = 0.01;
  double clearance_margin_m = 0.1;
  int max_retries = 100;
};

// Pre-noise geometry of the accepted recovery attempt, for statistical tests
// of the generator (noise std, step sizes, heading intervals).
struct RecoveryDebug {
  std::vector<Vec2> ideal_points;  // same indexing as the returned points
  int interior_begin = 0;          // first perturbed index
  int interior_end = 0;            // one past the last perturbed index
  Vec2 q1;                         // first point along the sampled heading
  Vec2 p_conv;
  double heading_rad = 0.0;
  bool offset_left = false;
};

// Synthesizes a corrective expert trajectory: a laterally offset start whose
// first step follows a deliberately misaligned heading, a densely
// interpolated noisy segment converging onto the reference path 5 m ahead,
// and the remainder of the reference path to its goal. Attempts are rejected
// until every point is traversable with the required clearance.
inline Trajectory sample_recovery_trajectory(const Trajectory& standard,
                                             const SemanticGrid& grid,
                                             const DistanceField& field,
                                             Rng& rng,
                                             const RecoveryParams& params = {},
                                             RecoveryDebug* debug = nullptr) {
  if (standard.points.size() < 2) {
    throw ValidationError("recovery: reference trajectory needs >= 2 points");
  }
  const double total_len = path_length(standard);
  if (total_len < params.convergence_arclength_m) {
    throw TooShortError("recovery: reference trajectory is " +
                        std::to_string(total_len) + " m, need >= " +
                        std::to_string(params.convergence_arclength_m) + " m");
  }
  const Vec2 p_conv =
      point_at_arclength(standard.points, params.convergence_arclength_m);
  const Vec2 forward =
      (standard.points[1] - standard.points[0]).normalized();
  const Vec2 left_dir = forward.perp();  // +90 deg

  // Reference tail: points strictly beyond the convergence arc length.
  std::vector<Vec2> tail;
  {
    double walked = 0.0;
    for (std::size_t i = 1; i < standard.points.size(); ++i) {
      walked += distance(standard.points[i - 1], standard.points[i]);
      if (walked > params.convergence_arclength_m + 1e-9) {
        tail.push_back(standard.points[i]);
      }
    }
  }

  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    const bool left = rng.coin();
    const double mag = rng.uniform(params.offset_min_m, params.offset_max_m);
    const double mag_deg =
        rng.uniform(params.heading_min_deg, params.heading_max_deg);
    const double heading = deg_to_rad(left ? -mag_deg : mag_deg);
    const Vec2 s_rec =
        standard.points.front() + left_dir * (left ? mag : -mag);
    const Vec2 q1 = s_rec + forward.rotated(heading) * params.step_m;

    std::vector<Vec2> ideal;
    ideal.push_back(s_rec);
    ideal.push_back(q1);
    const double chord = distance(q1, p_conv);
    const int steps =
        std::max<int>(1, static_cast<int>(std::llround(chord / params.step_m)));
    for (int k = 1; k < steps; ++k) {
      ideal.push_back(q1 + (p_conv - q1) * (static_cast<double>(k) / steps));
    }
    ideal.push_back(p_conv);

    // Interior = everything strictly between s_rec and p_conv.
    const int interior_begin = 1;
    const int interior_end = static_cast<int>(ideal.size()) - 1;
    std::vector<Vec2> pts = ideal;
    for (int i = interior_begin; i < interior_end; ++i) {
      pts[i].x += rng.normal(0.0, params.noise_sigma_m);
      pts[i].y += rng.normal(0.0, params.noise_sigma_m);
    }
    for (const Vec2& p : tail) pts.push_back(p);

    bool ok = true;
    for (const Vec2& p : pts) {
      if (!is_traversable(grid, p) ||
          clearance_at(field, p) < params.clearance_margin_m) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    Trajectory out;
    out.kind = TrajectoryKind::kRecovery;
    // Drop exact duplicates defensively (noise makes them measure-zero).
    for (const Vec2& p : pts) {
      if (out.points.empty() || distance(out.points.back(), p) > 1e-12) {
        out.points.push_back(p);
      }
    }
    out.start = s_rec;
    out.goal = standard.goal;
    out.seed = rng.root_seed();
    out.initial_heading_rad = heading;
    out.offset_left = left;
    if (debug != nullptr) {
      debug->ideal_points = std::move(ideal);
      debug->interior_begin = interior_begin;
      debug->interior_end = interior_end;
      debug->q1 = q1;
      debug->p_conv = p_conv;
      debug->heading_rad = heading;
      debug->offset_left = left;
    }
    return out;
  }
  throw NoValidRecoveryError("no clearance-valid recovery trajectory in " +
                             std::to_string(params.max_retries) + " attempts");
}

inline Trajectory sample_recovery_trajectory(const Trajectory& standard,
                                             const SemanticGrid& grid,
                                             Rng& rng) {
  const DistanceField field = distance_transform(grid);
  return sample_recovery_trajectory(standard, grid, field, rng);
}

// ---------------------------------------------------------------------------
// Road-network JSON I/O: {"nodes": [[x,y],...], "edges": [[i,j],...]} meters.
// ---------------------------------------------------------------------------

inline nlohmann::json network_to_json(const RoadNetwork& net) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Vec2& p : net.nodes) nodes.push_back({p.x, p.y});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : net.edges) edges.push_back({i, j});
  return {{"nodes", nodes}, {"edges", edges}};
}

// Parses the raw node/edge lists; validation against a grid happens in
// build_road_graph.
inline std::pair<std::vector<Vec2>, std::vector<std::pair<int, int>>>
network_lists_from_json(const nlohmann::json& j) {
  std::vector<Vec2> nodes;
  std::vector<std::pair<int, int>> edges;
  try {
    for (const auto& p : j.at("nodes")) {
      nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
    for (const auto& e : j.at("edges")) {
      edges.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("road network json: ") + e.what());
  }
  return {std::move(nodes), std::move(edges)};
}

inline RoadNetwork load_network(const std::string& path,
                                const SemanticGrid& grid) {
  auto [nodes, edges] = network_lists_from_json(load_json_file(path));
  return build_road_graph(grid, std::move(nodes), std::move(edges));
}

}  // namespace socnav

#endif  // SOCNAV_PLANNER_HPP_
