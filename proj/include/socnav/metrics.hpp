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

#ifndef SOCNAV_METRICS_HPP_
#define SOCNAV_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"

namespace socnav {

// ---------------------------------------------------------------------------
// Geodesic distances on the traversable cell lattice (8-connected, diagonal
// moves forbidden when either adjacent orthogonal cell is blocked).
// ---------------------------------------------------------------------------

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

namespace detail {

struct LatticeNeighbor {
  int dx, dy;
  bool diagonal;
};

inline constexpr LatticeNeighbor kLatticeNeighbors[8] = {
    {1, 0, false}, {-1, 0, false}, {0, 1, false},  {0, -1, false},
    {1, 1, true},  {1, -1, true},  {-1, 1, true},  {-1, -1, true}};

inline bool lattice_cell_ok(const SemanticGrid& grid, int x, int y) {
  return grid.in_bounds_cell(x, y) &&
         grid.at(x, y) == CellLabel::kTraversable;
}

inline bool lattice_move_ok(const SemanticGrid& grid, int x, int y,
                            const LatticeNeighbor& nb) {
  const int nx = x + nb.dx, ny = y + nb.dy;
  if (!lattice_cell_ok(grid, nx, ny)) return false;
  if (nb.diagonal) {
    // No corner cutting: both orthogonal companions must be open.
    if (!lattice_cell_ok(grid, x + nb.dx, y) ||
        !lattice_cell_ok(grid, x, y + nb.dy)) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

// Shortest-path distance (meters) from cell `a` to every traversable cell,
// row-major indexed; unreachable cells hold kUnreachable.
inline std::vector<double> geodesic_map(const SemanticGrid& grid, int ax,
                                        int ay) {
  if (!detail::lattice_cell_ok(grid, ax, ay)) {
    throw ValidationError("geodesic_map: source cell is not traversable");
  }
  const double res = grid.resolution;
  const double diag = res * std::numbers::sqrt2;
  std::vector<double> dist(grid.cells.size(), kUnreachable);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  const int src = ay * grid.width + ax;
  dist[src] = 0.0;
  heap.push({0.0, src});
  while (!heap.empty()) {
    const auto [d, idx] = heap.top();
    heap.pop();
    if (d > dist[idx] + 1e-12) continue;
    const int x = idx % grid.width, y = idx / grid.width;
    for (const auto& nb : detail::kLatticeNeighbors) {
      if (!detail::lattice_move_ok(grid, x, y, nb)) continue;
      const int nidx = (y + nb.dy) * grid.width + (x + nb.dx);
      const double nd = d + (nb.diagonal ? diag : res);
      if (nd < dist[nidx] - 1e-12) {
        dist[nidx] = nd;
        heap.push({nd, nidx});
      }
    }
  }
  return dist;
}

// A* point query on the same lattice (octile heuristic). Both endpoints are
// snapped to their containing cells. Throws NoPathError when an endpoint is
// off the traversable lattice or no route exists.
inline double lattice_geodesic(const SemanticGrid& grid, const Vec2& a,
                               const Vec2& b) {
  int ax, ay, bx, by;
  if (!grid.in_bounds_world(a) || !grid.in_bounds_world(b)) {
    throw NoPathError("lattice_geodesic: endpoint off the map");
  }
  grid.world_to_cell(a, ax, ay);
  grid.world_to_cell(b, bx, by);
  if (!detail::lattice_cell_ok(grid, ax, ay) ||
      !detail::lattice_cell_ok(grid, bx, by)) {
    throw NoPathError("lattice_geodesic: endpoint off the traversable lattice");
  }
  if (ax == bx && ay == by) return 0.0;
  const double res = grid.resolution;
  const double diag = res * std::numbers::sqrt2;
  const auto heuristic = [&](int x, int y) {
    const double dx = std::abs(x - bx), dy = std::abs(y - by);
    return res * (std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy));
  };
  std::vector<double> dist(grid.cells.size(), kUnreachable);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  const int src = ay * grid.width + ax;
  const int dst = by * grid.width + bx;
  dist[src] = 0.0;
  heap.push({heuristic(ax, ay), src});
  while (!heap.empty()) {
    const auto [f, idx] = heap.top();
    heap.pop();
    const int x = idx % grid.width, y = idx / grid.width;
    if (f > dist[idx] + heuristic(x, y) + 1e-12) continue;
    if (idx == dst) return dist[idx];
    for (const auto& nb : detail::kLatticeNeighbors) {
      if (!detail::lattice_move_ok(grid, x, y, nb)) continue;
      const int nidx = (y + nb.dy) * grid.width + (x + nb.dx);
      const double nd = dist[idx] + (nb.diagonal ? diag : res);
      if (nd < dist[nidx] - 1e-12) {
        dist[nidx] = nd;
        heap.push({nd + heuristic(x + nb.dx, y + nb.dy), nidx});
      }
    }
  }
  throw NoPathError("lattice_geodesic: endpoints are not connected");
}

// ---------------------------------------------------------------------------
// Episode outcome record and the metrics derived from it.
// ---------------------------------------------------------------------------

struct EpisodeResult {
  bool success = false;
  int collisions = 0;
  double final_goal_dist_m = 0.0;
  double d_actual = 0.0;       // executed path length
  double d_compliant = 0.0;    // portion on traversable ground
  double d_noncompliant = 0.0;
  double t_actual = 0.0;       // wall time simulated
  double t_compliant = 0.0;
  double geodesic_start_goal = 0.0;
  double geodesic_start_final = 0.0;
  double geodesic_remaining = 0.0;  // final position -> goal
  double maoe_rad = std::numeric_limits<double>::quiet_NaN();  // open-loop only
};

inline constexpr double kSuccessRadiusM = 3.0;
inline constexpr int kCollisionLimit = 3;

inline bool success_criterion(double final_goal_dist_m, int collisions,
                              double radius_m = kSuccessRadiusM,
                              int collision_limit = kCollisionLimit) {
  return final_goal_dist_m <= radius_m && collisions < collision_limit;
}

// Fraction of the start->goal geodesic actually covered, capped at 1.
inline double route_completion(const EpisodeResult& r) {
  if (!(r.geodesic_start_goal > 0.0)) {
    throw DegenerateEpisodeError(
        "route_completion: start-goal geodesic must be positive");
  }
  return std::min(1.0, r.geodesic_start_final / r.geodesic_start_goal);
}

// Success weighted by path optimality for one episode.
inline double episode_spl(const EpisodeResult& r) {
  if (!r.success) return 0.0;
  if (!(r.geodesic_start_goal > 0.0)) {
    throw DegenerateEpisodeError(
        "episode_spl: start-goal geodesic must be positive");
  }
  return r.geodesic_start_goal /
         std::max(r.d_actual, r.geodesic_start_goal);
}

// Batch SPL: mean over episodes of s_i * l_i / max(p_i, l_i).
inline double spl(const std::vector<bool>& success,
                  const std::vector<double>& shortest,
                  const std::vector<double>& actual) {
  if (success.size() != shortest.size() || success.size() != actual.size()) {
    throw ShapeMismatchError("spl: input lengths differ");
  }
  if (success.empty()) throw ValidationError("spl: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < success.size(); ++i) {
    if (!success[i]) continue;
    if (!(shortest[i] > 0.0)) {
      throw ValidationError("spl: shortest length must be positive");
    }
    sum += shortest[i] / std::max(actual[i], shortest[i]);
  }
  return sum / success.size();
}

// Distance / time compliance rates: the compliant share on success, zero on
// failure. A successful episode with no motion is vacuously compliant.
inline std::pair<double, double> compliance_rates(const EpisodeResult& r) {
  if (!r.success) return {0.0, 0.0};
  const double dcr = (r.d_actual > 0.0) ? r.d_compliant / r.d_actual : 1.0;
  const double tcr = (r.t_actual > 0.0) ? r.t_compliant / r.t_actual : 1.0;
  return {dcr, tcr};
}

// Mean (over samples) of the worst per-step heading error between predicted
// and reference displacement sequences. Aligned pairs must have equal length;
// a zero-length displacement has no heading and raises ZeroVectorError.
inline double maoe(const std::vector<std::vector<Vec2>>& pred,
                   const std::vector<std::vector<Vec2>>& reference) {
  if (pred.size() != reference.size()) {
    throw ShapeMismatchError("maoe: sample counts differ");
  }
  if (pred.empty()) throw ValidationError("maoe: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto& p = pred[i];
    const auto& g = reference[i];
    if (p.size() != g.size()) {
      throw ShapeMismatchError("maoe: sample " + std::to_string(i) +
                               " lengths differ");
    }
    if (p.size() < 2) {
      throw TooShortError("maoe: sample " + std::to_string(i) +
                          " needs at least 2 points");
    }
    double worst = 0.0;
    for (std::size_t t = 1; t < p.size(); ++t) {
      worst = std::max(worst,
                       angle_between(p[t] - p[t - 1], g[t] - g[t - 1]));
    }
    sum += worst;
  }
  return sum / pred.size();
}

// ---------------------------------------------------------------------------
// Aggregates.
// ---------------------------------------------------------------------------

struct MetricsReport {
  int n_episodes = 0;
  double sr = 0.0;
  double rc = 0.0;
  double spl = 0.0;
  double dcr = 0.0;
  double tcr = 0.0;
  double maoe_rad = std::numeric_limits<double>::quiet_NaN();
};

inline MetricsReport aggregate_metrics(const std::vector<EpisodeResult>& eps) {
  MetricsReport rep;
  rep.n_episodes = static_cast<int>(eps.size());
  if (eps.empty()) return rep;
  double maoe_sum = 0.0;
  int maoe_n = 0;
  for (const EpisodeResult& e : eps) {
    rep.sr += e.success ? 1.0 : 0.0;
    rep.rc += route_completion(e);
    rep.spl += episode_spl(e);
    const auto [dcr, tcr] = compliance_rates(e);
    rep.dcr += dcr;
    rep.tcr += tcr;
    if (std::isfinite(e.maoe_rad)) {
      maoe_sum += e.maoe_rad;
      ++maoe_n;
    }
  }
  rep.sr /= eps.size();
  rep.rc /= eps.size();
  rep.spl /= eps.size();
  rep.dcr /= eps.size();
  rep.tcr /= eps.size();
  if (maoe_n > 0) rep.maoe_rad = maoe_sum / maoe_n;
  return rep;
}

}  // namespace socnav

#endif  // SOCNAV_METRICS_HPP_
