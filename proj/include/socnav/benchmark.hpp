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

#ifndef SOCNAV_BENCHMARK_HPP_
#define SOCNAV_BENCHMARK_HPP_

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"
#include "socnav/json_io.hpp"
#include "socnav/metrics.hpp"
#include "socnav/pedestrians.hpp"
#include "socnav/planner.hpp"
#include "socnav/policy.hpp"
#include "socnav/rng.hpp"
#include "socnav/trajectory.hpp"

namespace socnav {

// ---------------------------------------------------------------------------
// Closed-loop episode execution: a holonomic disc robot follows the policy's
// waypoint chunks through a scene with scripted pedestrians.
// ---------------------------------------------------------------------------

struct EpisodeConfig {
  const SemanticGrid* grid = nullptr;
  const RoadNetwork* net = nullptr;       // pedestrian route graph
  const DistanceField* field = nullptr;   // static clearance
  PolicyConfig policy_cfg;                // context layout for make_context
  Vec2 start;
  Vec2 goal;
  double dt = 0.25;            // seconds per control step
  int max_steps = 400;
  int replan_period = 1;       // steps between policy queries
  double robot_radius_m = 0.3;
  double max_speed_mps = 1.0;  // per-step displacement clip
  double success_radius_m = kSuccessRadiusM;
  int collision_limit = kCollisionLimit;
  std::uint64_t seed = 0;
  bool with_pedestrians = true;
  PedestrianParams ped_params;

  void validate() const {
    if (grid == nullptr || net == nullptr || field == nullptr) {
      throw ValidationError("episode: grid, net, and field are required");
    }
    if (!(dt > 0.0)) throw ValidationError("episode: dt must be > 0");
    if (max_steps < 1 || replan_period < 1) {
      throw ValidationError("episode: bad step counts");
    }
    if (!(robot_radius_m > 0.0) || !(max_speed_mps > 0.0) ||
        !(success_radius_m > 0.0) || collision_limit < 1) {
      throw ValidationError("episode: bad robot parameters");
    }
  }
};

struct StepLog {
  Vec2 pose;          // position after the step
  Vec2 action;        // displacement applied this step (post-clip)
  bool compliant = true;
  int collisions = 0;  // cumulative count after the step
};

struct EpisodeOutcome {
  EpisodeResult result;
  std::vector<StepLog> steps;
  Vec2 start;
  Vec2 goal;
  std::uint64_t seed = 0;
  int index = 0;
  double bucket_length_m = 0.0;
};

namespace detail {

// Center of the traversable cell nearest to p (ties break toward the lower
// row-major index), used to anchor geodesic queries when the robot ends up
// on blocked ground.
inline Vec2 nearest_traversable_center(const SemanticGrid& grid,
                                       const Vec2& p) {
  if (is_traversable(grid, p)) return p;
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_center;
  bool found = false;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.at(x, y) != CellLabel::kTraversable) continue;
      const Vec2 c = grid.cell_center(x, y);
      const double d = (c - p).squared_norm();
      if (d < best - 1e-15) {
        best = d;
        best_center = c;
        found = true;
      }
    }
  }
  if (!found) {
    throw ValidationError("nearest_traversable_center: grid has no open cell");
  }
  return best_center;
}

}  // namespace detail

// A controller maps the current context to the next waypoint chunk. The
// policy-backed controller is one instance; tests inject scripted ones.
using Controller = std::function<ActionChunk(const Context&, int step)>;

// Runs one episode. Per step the next pending waypoint displacement is
// executed, clipped to max_speed * dt; ground compliance is judged at the
// segment midpoint. Collisions are debounced rising edges per source (the
// static world, or one pedestrian); reaching the collision limit ends the
// episode as a failure immediately, and entering the success radius with
// fewer collisions ends it as a success. Pedestrians advance after the robot
// each step and never react to it.
inline EpisodeOutcome run_episode_with(const Controller& controller,
                                       const EpisodeConfig& cfg) {
  cfg.validate();
  const SemanticGrid& grid = *cfg.grid;
  const DistanceField& field = *cfg.field;
  if (!is_traversable(grid, cfg.start) || !is_traversable(grid, cfg.goal)) {
    throw ValidationError("episode: start and goal must be traversable");
  }

  EpisodeOutcome out;
  out.start = cfg.start;
  out.goal = cfg.goal;
  out.seed = cfg.seed;
  EpisodeResult& res = out.result;
  res.geodesic_start_goal = lattice_geodesic(grid, cfg.start, cfg.goal);

  std::vector<Pedestrian> peds;
  Rng ped_rng(derive_seed(cfg.seed, "pedestrians"));
  if (cfg.with_pedestrians && res.geodesic_start_goal > 0.0) {
    peds = spawn_pedestrians(grid, field, *cfg.net, res.geodesic_start_goal,
                             ped_rng, cfg.ped_params);
  }

  Vec2 pos = cfg.start;
  std::vector<Vec2> history(cfg.policy_cfg.history_len, pos);
  ActionChunk chunk;
  std::size_t chunk_cursor = 0;
  bool static_contact = false;
  std::vector<bool> ped_contact(peds.size(), false);
  const double step_cap = cfg.max_speed_mps * cfg.dt;
  bool terminated = false;

  if (distance(pos, cfg.goal) <= cfg.success_radius_m) {
    res.success = true;
    terminated = true;
  }

  for (int step = 0; step < cfg.max_steps && !terminated; ++step) {
    if (step % cfg.replan_period == 0 ||
        chunk_cursor >= chunk.waypoints.size()) {
      const Context ctx =
          make_context(history, cfg.goal, field, cfg.policy_cfg);
      chunk = controller(ctx, step);
      if (chunk.waypoints.empty()) {
        throw ValidationError("episode: controller returned an empty chunk");
      }
      chunk_cursor = 0;
    }
    Vec2 disp = chunk.waypoints[chunk_cursor++];
    const double dn = disp.norm();
    if (dn > step_cap && dn > 0.0) disp = disp * (step_cap / dn);
    const Vec2 prev = pos;
    pos += disp;
    if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) {
      throw NonFiniteStateError("episode: robot state diverged at step " +
                                std::to_string(step));
    }

    const double seg = distance(prev, pos);
    const Vec2 mid = prev + 0.5 * (pos - prev);
    const bool compliant = is_traversable(grid, mid);
    res.d_actual += seg;
    res.t_actual += cfg.dt;
    if (compliant) {
      res.d_compliant += seg;
      res.t_compliant += cfg.dt;
    } else {
      res.d_noncompliant += seg;
    }

    // Debounced collision detection: count only contact onsets, per source.
    const bool static_hit = clearance_at(field, pos) < cfg.robot_radius_m;
    if (static_hit && !static_contact) ++res.collisions;
    static_contact = static_hit;
    for (std::size_t i = 0; i < peds.size(); ++i) {
      const bool hit =
          distance(pos, peds[i].position) < cfg.robot_radius_m + peds[i].radius;
      if (hit && !ped_contact[i]) ++res.collisions;
      ped_contact[i] = hit;
    }

    if (!peds.empty()) {
      step_pedestrians(peds, cfg.dt, *cfg.net, ped_rng, cfg.ped_params);
    }

    history.erase(history.begin());
    history.push_back(pos);
    out.steps.push_back({pos, disp, compliant, res.collisions});

    if (res.collisions >= cfg.collision_limit) {
      terminated = true;  // hard failure
    } else if (distance(pos, cfg.goal) <= cfg.success_radius_m) {
      res.success = true;
      terminated = true;
    }
  }

  res.final_goal_dist_m = distance(pos, cfg.goal);
  res.success = success_criterion(res.final_goal_dist_m, res.collisions,
                                  cfg.success_radius_m, cfg.collision_limit);
  const Vec2 final_anchor = detail::nearest_traversable_center(grid, pos);
  res.geodesic_start_final = lattice_geodesic(grid, cfg.start, final_anchor);
  res.geodesic_remaining = lattice_geodesic(grid, final_anchor, cfg.goal);
  return out;
}

// Policy-backed episode: one ODE sample per replan, with a per-step noise
// seed derived from the episode seed so reruns are bit-identical.
inline EpisodeOutcome run_episode(const FlowPolicy& policy,
                                  const EpisodeConfig& cfg) {
  EpisodeConfig local = cfg;
  local.policy_cfg = policy.cfg;
  const std::uint64_t rollout_seed = derive_seed(cfg.seed, "rollout");
  const Controller controller = [&](const Context& ctx, int step) {
    return sample_ode(policy, ctx,
                      derive_seed(rollout_seed, "step:" + std::to_string(step)));
  };
  return run_episode_with(controller, local);
}

// ---------------------------------------------------------------------------
// Benchmark: sampled start/goal pairs in geodesic-length buckets.
// ---------------------------------------------------------------------------

struct BenchmarkConfig {
  std::vector<double> bucket_lengths_m = {20.0, 100.0};
  double bucket_tolerance = 0.1;  // band is length * (1 +- tolerance)
  int pairs_per_bucket = 10;
  int sample_attempts = 10000;
  bool auto_scale = true;  // shrink buckets to fit small scenes, keeping ratios
  std::uint64_t seed = 0;
  EpisodeConfig episode;  // template; start/goal/seed filled per episode
};

struct BenchmarkCase {
  Vec2 start;
  Vec2 goal;
  double bucket_length_m = 0.0;
  std::uint64_t seed = 0;
};

// Estimated lattice diameter via a double sweep: farthest reachable cell from
// an arbitrary open cell, then the farthest distance from that cell.
inline double estimate_diameter(const SemanticGrid& grid) {
  int sx = -1, sy = -1;
  for (int y = 0; y < grid.height && sx < 0; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.at(x, y) == CellLabel::kTraversable) {
        sx = x;
        sy = y;
        break;
      }
    }
  }
  if (sx < 0) throw ValidationError("estimate_diameter: no traversable cell");
  const auto first = geodesic_map(grid, sx, sy);
  int far_idx = sy * grid.width + sx;
  double far = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] != kUnreachable && first[i] > far) {
      far = first[i];
      far_idx = static_cast<int>(i);
    }
  }
  const auto second =
      geodesic_map(grid, far_idx % grid.width, far_idx / grid.width);
  double diameter = 0.0;
  for (double d : second) {
    if (d != kUnreachable && d > diameter) diameter = d;
  }
  return diameter;
}

// Draws start/goal pairs whose lattice geodesic falls in each bucket band.
// Buckets too long for the scene are (optionally) scaled down together so
// their length ratios survive. Throws InfeasibleSceneError when a band
// cannot be populated.
inline std::vector<BenchmarkCase> sample_benchmark_cases(
    const SemanticGrid& grid, const BenchmarkConfig& cfg,
    std::vector<double>* scaled_buckets = nullptr) {
  if (cfg.bucket_lengths_m.empty() || cfg.pairs_per_bucket < 1) {
    throw ValidationError("benchmark: need buckets and pairs_per_bucket >= 1");
  }
  std::vector<double> buckets = cfg.bucket_lengths_m;
  if (cfg.auto_scale) {
    const double diameter = estimate_diameter(grid);
    double longest = 0.0;
    for (double b : buckets) longest = std::max(longest, b);
    const double usable = 0.9 * diameter;
    if (longest > usable && longest > 0.0) {
      const double s = usable / longest;
      for (double& b : buckets) b *= s;
    }
  }
  if (scaled_buckets != nullptr) *scaled_buckets = buckets;

  // Open cells with enough clearance for the robot footprint.
  const DistanceField field = distance_transform(grid);
  std::vector<std::pair<int, int>> open;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.at(x, y) != CellLabel::kTraversable) continue;
      if (field.at(x, y) < cfg.episode.robot_radius_m) continue;
      open.push_back({x, y});
    }
  }
  if (open.size() < 2) {
    throw InfeasibleSceneError("benchmark: scene has too few open cells");
  }

  Rng rng(derive_seed(cfg.seed, "cases"));
  std::vector<BenchmarkCase> cases;
  int case_index = 0;
  for (double bucket : buckets) {
    const double lo = bucket * (1.0 - cfg.bucket_tolerance);
    const double hi = bucket * (1.0 + cfg.bucket_tolerance);
    for (int p = 0; p < cfg.pairs_per_bucket; ++p) {
      bool found = false;
      for (int attempt = 0; attempt < cfg.sample_attempts && !found;
           ++attempt) {
        const auto [ax, ay] = open[rng.uniform_index(open.size())];
        const auto dmap = geodesic_map(grid, ax, ay);
        std::vector<std::pair<int, int>> targets;
        for (const auto& [bx, by] : open) {
          const double d = dmap[by * grid.width + bx];
          if (d != kUnreachable && d >= lo && d <= hi) {
            targets.push_back({bx, by});
          }
        }
        if (targets.empty()) continue;
        const auto [bx, by] = targets[rng.uniform_index(targets.size())];
        BenchmarkCase c;
        c.start = grid.cell_center(ax, ay);
        c.goal = grid.cell_center(bx, by);
        c.bucket_length_m = bucket;
        c.seed = derive_seed(cfg.seed, "episode:" + std::to_string(case_index));
        cases.push_back(c);
        found = true;
      }
      if (!found) {
        throw InfeasibleSceneError(
            "benchmark: no start/goal pair with geodesic in [" +
            std::to_string(lo) + ", " + std::to_string(hi) + "] m");
      }
      ++case_index;
    }
  }
  return cases;
}

struct BenchmarkResult {
  std::vector<EpisodeOutcome> episodes;
  MetricsReport report;
  std::vector<double> bucket_lengths_m;  // post-scaling
};

namespace detail {

inline int env_thread_count() {
  const char* env = std::getenv("SOCNAV_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

// Runs fn(i) for i in [0, n) across SOCNAV_THREADS workers. Work is claimed
// by index from a shared counter, so outputs keyed by i are deterministic
// regardless of thread count.
inline void parallel_for_index(int n, const std::function<void(int)>& fn) {
  const int threads = std::min(env_thread_count(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// Samples cases, then runs every episode under the policy (parallel across
// episodes when SOCNAV_THREADS > 1; per-episode randomness depends only on
// the per-case seed, so results do not depend on the thread count).
inline BenchmarkResult run_benchmark(const FlowPolicy& policy,
                                     const SemanticGrid& grid,
                                     const RoadNetwork& net,
                                     const DistanceField& field,
                                     const BenchmarkConfig& cfg) {
  BenchmarkResult result;
  const std::vector<BenchmarkCase> cases =
      sample_benchmark_cases(grid, cfg, &result.bucket_lengths_m);
  result.episodes.resize(cases.size());
  detail::parallel_for_index(
      static_cast<int>(cases.size()), [&](int i) {
        EpisodeConfig ep = cfg.episode;
        ep.grid = &grid;
        ep.net = &net;
        ep.field = &field;
        ep.start = cases[i].start;
        ep.goal = cases[i].goal;
        ep.seed = cases[i].seed;
        EpisodeOutcome out = run_episode(policy, ep);
        out.index = i;
        out.bucket_length_m = cases[i].bucket_length_m;
        result.episodes[i] = std::move(out);
      });
  std::vector<EpisodeResult> eps;
  eps.reserve(result.episodes.size());
  for (const auto& e : result.episodes) eps.push_back(e.result);
  result.report = aggregate_metrics(eps);
  return result;
}

// ---------------------------------------------------------------------------
// Report emission. All numeric formatting goes through snprintf so artifacts
// are byte-stable; no timestamps are ever written.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_g(double v, int precision = 9) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

inline std::string svg_for_scene(const std::vector<EpisodeOutcome>& episodes,
                                 const SemanticGrid& grid,
                                 const std::string& config_hash,
                                 std::uint64_t seed) {
  const double margin = 1.0;
  const double w = grid.width_m() + 2 * margin;
  const double h = grid.height_m() + 2 * margin;
  const double scale = 12.0;  // px per meter
  auto X = [&](double x) { return (x - grid.origin.x + margin) * scale; };
  auto Y = [&](double y) {  // flip: SVG y grows downward
    return h * scale - (y - grid.origin.y + margin) * scale;
  };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt_g(w * scale, 6) + "\" height=\"" + fmt_g(h * scale, 6) + "\">\n";
  svg += "<!-- config_hash=" + config_hash + " seed=" + std::to_string(seed) +
         " -->\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt_g(w * scale, 6) +
         "\" height=\"" + fmt_g(h * scale, 6) + "\" fill=\"#ffffff\"/>\n";
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      if (grid.at(x, y) != CellLabel::kNonTraversable) continue;
      const Vec2 c0{grid.origin.x + x * grid.resolution,
                    grid.origin.y + y * grid.resolution};
      svg += "<rect x=\"" + fmt_g(X(c0.x), 6) + "\" y=\"" +
             fmt_g(Y(c0.y + grid.resolution), 6) + "\" width=\"" +
             fmt_g(grid.resolution * scale, 6) + "\" height=\"" +
             fmt_g(grid.resolution * scale, 6) + "\" fill=\"#444444\"/>\n";
    }
  }
  // One <path> per episode; noncompliant stretches get red overlays.
  for (const EpisodeOutcome& ep : episodes) {
    std::string d = "M " + fmt_g(X(ep.start.x), 6) + " " +
                    fmt_g(Y(ep.start.y), 6);
    for (const StepLog& s : ep.steps) {
      d += " L " + fmt_g(X(s.pose.x), 6) + " " + fmt_g(Y(s.pose.y), 6);
    }
    svg += "<path d=\"" + d +
           "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
    Vec2 prev = ep.start;
    std::string run;
    int run_len = 0;
    auto flush = [&]() {
      if (run_len > 0) {
        svg += "<polyline points=\"" + run +
               "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
      }
      run.clear();
      run_len = 0;
    };
    for (const StepLog& s : ep.steps) {
      if (!s.compliant) {
        if (run_len == 0) {
          run = fmt_g(X(prev.x), 6) + "," + fmt_g(Y(prev.y), 6);
        }
        run += " " + fmt_g(X(s.pose.x), 6) + "," + fmt_g(Y(s.pose.y), 6);
        ++run_len;
      } else {
        flush();
      }
      prev = s.pose;
    }
    flush();
    svg += "<circle cx=\"" + fmt_g(X(ep.goal.x), 6) + "\" cy=\"" +
           fmt_g(Y(ep.goal.y), 6) +
           "\" r=\"4\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace detail

// Writes metrics.csv (one data row per episode), metrics.json (aggregates),
// cases.json, episodes.jsonl, and trajectories_scene0.svg into out_dir.
inline void emit_report(const std::vector<EpisodeOutcome>& episodes,
                        const SemanticGrid& grid, const std::string& out_dir,
                        const std::string& config_hash, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::string csv = "episode,sr,rc,spl,dcr,tcr,maoe_rad\n";
  for (const EpisodeOutcome& ep : episodes) {
    const EpisodeResult& r = ep.result;
    const auto [dcr, tcr] = compliance_rates(r);
    csv += std::to_string(ep.index) + "," + (r.success ? "1" : "0") + "," +
           detail::fmt_g(route_completion(r)) + "," +
           detail::fmt_g(episode_spl(r)) + "," + detail::fmt_g(dcr) + "," +
           detail::fmt_g(tcr) + "," + detail::fmt_g(r.maoe_rad) + "\n";
  }
  write_text_file(out_dir + "/metrics.csv", csv);

  std::vector<EpisodeResult> results;
  results.reserve(episodes.size());
  for (const auto& e : episodes) results.push_back(e.result);
  const MetricsReport rep = aggregate_metrics(results);
  nlohmann::json mj = {{"config_hash", config_hash},
                       {"seed", seed},
                       {"n_episodes", rep.n_episodes},
                       {"sr", rep.sr},
                       {"rc", rep.rc},
                       {"spl", rep.spl},
                       {"dcr", rep.dcr},
                       {"tcr", rep.tcr}};
  if (std::isfinite(rep.maoe_rad)) {
    mj["maoe_rad"] = rep.maoe_rad;
  } else {
    mj["maoe_rad"] = nullptr;
  }
  save_json_file(out_dir + "/metrics.json", mj);

  nlohmann::json cases = nlohmann::json::array();
  for (const EpisodeOutcome& ep : episodes) {
    cases.push_back({{"index", ep.index},
                     {"start", {ep.start.x, ep.start.y}},
                     {"goal", {ep.goal.x, ep.goal.y}},
                     {"bucket_length_m", ep.bucket_length_m},
                     {"seed", ep.seed}});
  }
  save_json_file(out_dir + "/cases.json",
                 {{"config_hash", config_hash},
                  {"seed", seed},
                  {"cases", cases}});

  std::string jsonl =
      nlohmann::json{{"type", "header"},
                     {"config_hash", config_hash},
                     {"seed", seed}}
          .dump() +
      "\n";
  for (const EpisodeOutcome& ep : episodes) {
    nlohmann::json steps = nlohmann::json::array();
    for (const StepLog& s : ep.steps) {
      steps.push_back({{"pose", {s.pose.x, s.pose.y}},
                       {"compliant", s.compliant},
                       {"collisions", s.collisions}});
    }
    jsonl += nlohmann::json{{"index", ep.index},
                            {"success", ep.result.success},
                            {"collisions", ep.result.collisions},
                            {"d_actual", ep.result.d_actual},
                            {"steps", steps}}
                 .dump() +
             "\n";
  }
  write_text_file(out_dir + "/episodes.jsonl", jsonl);

  write_text_file(out_dir + "/trajectories_scene0.svg",
                  detail::svg_for_scene(episodes, grid, config_hash, seed));
}

}  // namespace socnav

#endif  // SOCNAV_BENCHMARK_HPP_
