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

#ifndef SOCNAV_CONFIG_HPP_
#define SOCNAV_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "socnav/benchmark.hpp"
#include "socnav/common.hpp"
#include "socnav/grpo.hpp"
#include "socnav/json_io.hpp"
#include "socnav/pedestrians.hpp"
#include "socnav/planner.hpp"
#include "socnav/policy.hpp"
#include "socnav/rewards.hpp"

namespace socnav {

// ---------------------------------------------------------------------------
// One JSON file configures a whole run (data synthesis, training, and
// evaluation). Unknown keys are ignored and missing keys keep their
// defaults, so configs stay small; the canonical re-serialization of the
// parsed struct is what gets hashed into artifacts.
// ---------------------------------------------------------------------------

struct DataConfig {
  int n_standard = 100;
  int n_recovery = 100;
  int example_stride = 1;
  StandardSampleParams standard;
  RecoveryParams recovery;
};

struct RunConfig {
  std::string scenario_path;
  std::string network_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  PolicyConfig policy;
  RewardWeights weights;
  GrpoConfig grpo;
  IlConfig il;
  DataConfig data;
  BenchmarkConfig bench;
};

namespace detail {

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (j.is_object() && j.contains(key)) {
    try {
      return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("config key '" + key + "': " + e.what());
    }
  }
  return fallback;
}

inline nlohmann::json section(const nlohmann::json& j, const std::string& key) {
  return (j.is_object() && j.contains(key)) ? j.at(key) : nlohmann::json::object();
}

inline nlohmann::json reward_weights_to_json(const RewardWeights& w) {
  return {{"lambda_social", w.lambda_social},
          {"lambda_expert", w.lambda_expert},
          {"lambda_smooth", w.lambda_smooth},
          {"lambda_efficiency", w.lambda_efficiency},
          {"social_alpha_m", w.social_alpha_m},
          {"social_beta", w.social_beta},
          {"expert_w_dist", w.expert_w_dist},
          {"expert_w_dir", w.expert_w_dir},
          {"expert_tau_m", w.expert_tau_m},
          {"resample_count", w.resample_count},
          {"smooth_scale_m", w.smooth_scale_m},
          {"efficiency_scale_m", w.efficiency_scale_m},
          {"efficiency_beta", w.efficiency_beta}};
}

inline RewardWeights reward_weights_from_json(const nlohmann::json& j) {
  RewardWeights w;
  w.lambda_social = get_or(j, "lambda_social", w.lambda_social);
  w.lambda_expert = get_or(j, "lambda_expert", w.lambda_expert);
  w.lambda_smooth = get_or(j, "lambda_smooth", w.lambda_smooth);
  w.lambda_efficiency = get_or(j, "lambda_efficiency", w.lambda_efficiency);
  w.social_alpha_m = get_or(j, "social_alpha_m", w.social_alpha_m);
  w.social_beta = get_or(j, "social_beta", w.social_beta);
  w.expert_w_dist = get_or(j, "expert_w_dist", w.expert_w_dist);
  w.expert_w_dir = get_or(j, "expert_w_dir", w.expert_w_dir);
  w.expert_tau_m = get_or(j, "expert_tau_m", w.expert_tau_m);
  w.resample_count = get_or(j, "resample_count", w.resample_count);
  w.smooth_scale_m = get_or(j, "smooth_scale_m", w.smooth_scale_m);
  w.efficiency_scale_m = get_or(j, "efficiency_scale_m", w.efficiency_scale_m);
  w.efficiency_beta = get_or(j, "efficiency_beta", w.efficiency_beta);
  return w;
}

inline PolicyConfig policy_config_from_json_lenient(const nlohmann::json& j) {
  PolicyConfig c;
  c.history_len = get_or(j, "history_len", c.history_len);
  c.chunk_len = get_or(j, "chunk_len", c.chunk_len);
  c.patch_w = get_or(j, "patch_w", c.patch_w);
  c.latent_dim = get_or(j, "latent_dim", c.latent_dim);
  c.encoder_hidden = get_or(j, "encoder_hidden", c.encoder_hidden);
  c.velocity_hidden = get_or(j, "velocity_hidden", c.velocity_hidden);
  c.flow_steps = get_or(j, "flow_steps", c.flow_steps);
  c.sigma = get_or(j, "sigma", c.sigma);
  c.action_scale_m = get_or(j, "action_scale_m", c.action_scale_m);
  c.goal_clip_m = get_or(j, "goal_clip_m", c.goal_clip_m);
  c.goal_norm_m = get_or(j, "goal_norm_m", c.goal_norm_m);
  c.patch_norm_m = get_or(j, "patch_norm_m", c.patch_norm_m);
  c.patch_stride_m = get_or(j, "patch_stride_m", c.patch_stride_m);
  return c;
}

inline nlohmann::json pedestrian_params_to_json(const PedestrianParams& p) {
  return {{"density_per_100m", p.density_per_100m},
          {"band_lo_m", p.band_lo_m},
          {"band_hi_m", p.band_hi_m},
          {"speed_mean", p.speed_mean},
          {"speed_std", p.speed_std},
          {"speed_lo", p.speed_lo},
          {"speed_hi", p.speed_hi},
          {"radius_m", p.radius_m}};
}

inline PedestrianParams pedestrian_params_from_json(const nlohmann::json& j) {
  PedestrianParams p;
  p.density_per_100m = get_or(j, "density_per_100m", p.density_per_100m);
  p.band_lo_m = get_or(j, "band_lo_m", p.band_lo_m);
  p.band_hi_m = get_or(j, "band_hi_m", p.band_hi_m);
  p.speed_mean = get_or(j, "speed_mean", p.speed_mean);
  p.speed_std = get_or(j, "speed_std", p.speed_std);
  p.speed_lo = get_or(j, "speed_lo", p.speed_lo);
  p.speed_hi = get_or(j, "speed_hi", p.speed_hi);
  p.radius_m = get_or(j, "radius_m", p.radius_m);
  return p;
}

}  // namespace detail

inline nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["scenario"] = cfg.scenario_path;
  j["network"] = cfg.network_path;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["policy"] = detail::policy_config_to_json(cfg.policy);
  j["rewards"] = detail::reward_weights_to_json(cfg.weights);
  j["grpo"] = {{"group_size", cfg.grpo.group_size},
               {"eps_clip", cfg.grpo.eps_clip},
               {"lr", cfg.grpo.lr},
               {"iterations", cfg.grpo.iterations},
               {"tasks_per_iter", cfg.grpo.tasks_per_iter}};
  j["il"] = {{"lr", cfg.il.lr},
             {"momentum", cfg.il.momentum},
             {"batch_size", cfg.il.batch_size},
             {"steps", cfg.il.steps}};
  j["data"] = {{"n_standard", cfg.data.n_standard},
               {"n_recovery", cfg.data.n_recovery},
               {"example_stride", cfg.data.example_stride},
               {"l_min_m", cfg.data.standard.l_min_m},
               {"densify_spacing_m", cfg.data.standard.densify_spacing_m}};
  j["benchmark"] = {
      {"bucket_lengths_m", cfg.bench.bucket_lengths_m},
      {"bucket_tolerance", cfg.bench.bucket_tolerance},
      {"pairs_per_bucket", cfg.bench.pairs_per_bucket},
      {"auto_scale", cfg.bench.auto_scale},
      {"dt", cfg.bench.episode.dt},
      {"max_steps", cfg.bench.episode.max_steps},
      {"replan_period", cfg.bench.episode.replan_period},
      {"robot_radius_m", cfg.bench.episode.robot_radius_m},
      {"max_speed_mps", cfg.bench.episode.max_speed_mps},
      {"success_radius_m", cfg.bench.episode.success_radius_m},
      {"collision_limit", cfg.bench.episode.collision_limit},
      {"with_pedestrians", cfg.bench.episode.with_pedestrians},
      {"pedestrians",
       detail::pedestrian_params_to_json(cfg.bench.episode.ped_params)}};
  return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  using detail::get_or;
  using detail::section;
  RunConfig cfg;
  cfg.scenario_path = get_or<std::string>(j, "scenario", "");
  cfg.network_path = get_or<std::string>(j, "network", "");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
  cfg.policy = detail::policy_config_from_json_lenient(section(j, "policy"));
  cfg.weights = detail::reward_weights_from_json(section(j, "rewards"));

  const nlohmann::json g = section(j, "grpo");
  cfg.grpo.group_size = get_or(g, "group_size", cfg.grpo.group_size);
  cfg.grpo.eps_clip = get_or(g, "eps_clip", cfg.grpo.eps_clip);
  cfg.grpo.lr = get_or(g, "lr", cfg.grpo.lr);
  cfg.grpo.iterations = get_or(g, "iterations", cfg.grpo.iterations);
  cfg.grpo.tasks_per_iter = get_or(g, "tasks_per_iter", cfg.grpo.tasks_per_iter);

  const nlohmann::json il = section(j, "il");
  cfg.il.lr = get_or(il, "lr", cfg.il.lr);
  cfg.il.momentum = get_or(il, "momentum", cfg.il.momentum);
  cfg.il.batch_size = get_or(il, "batch_size", cfg.il.batch_size);
  cfg.il.steps = get_or(il, "steps", cfg.il.steps);

  const nlohmann::json d = section(j, "data");
  cfg.data.n_standard = get_or(d, "n_standard", cfg.data.n_standard);
  cfg.data.n_recovery = get_or(d, "n_recovery", cfg.data.n_recovery);
  cfg.data.example_stride = get_or(d, "example_stride", cfg.data.example_stride);
  cfg.data.standard.l_min_m = get_or(d, "l_min_m", cfg.data.standard.l_min_m);
  cfg.data.standard.densify_spacing_m =
      get_or(d, "densify_spacing_m", cfg.data.standard.densify_spacing_m);

  const nlohmann::json b = section(j, "benchmark");
  cfg.bench.bucket_lengths_m =
      get_or(b, "bucket_lengths_m", cfg.bench.bucket_lengths_m);
  cfg.bench.bucket_tolerance =
      get_or(b, "bucket_tolerance", cfg.bench.bucket_tolerance);
  cfg.bench.pairs_per_bucket =
      get_or(b, "pairs_per_bucket", cfg.bench.pairs_per_bucket);
  cfg.bench.auto_scale = get_or(b, "auto_scale", cfg.bench.auto_scale);
  cfg.bench.episode.dt = get_or(b, "dt", cfg.bench.episode.dt);
  cfg.bench.episode.max_steps = get_or(b, "max_steps", cfg.bench.episode.max_steps);
  cfg.bench.episode.replan_period =
      get_or(b, "replan_period", cfg.bench.episode.replan_period);
  cfg.bench.episode.robot_radius_m =
      get_or(b, "robot_radius_m", cfg.bench.episode.robot_radius_m);
  cfg.bench.episode.max_speed_mps =
      get_or(b, "max_speed_mps", cfg.bench.episode.max_speed_mps);
  cfg.bench.episode.success_radius_m =
      get_or(b, "success_radius_m", cfg.bench.episode.success_radius_m);
  cfg.bench.episode.collision_limit =
      get_or(b, "collision_limit", cfg.bench.episode.collision_limit);
  cfg.bench.episode.with_pedestrians =
      get_or(b, "with_pedestrians", cfg.bench.episode.with_pedestrians);
  cfg.bench.episode.ped_params =
      detail::pedestrian_params_from_json(section(b, "pedestrians"));

  // Sub-configs that replicate shared knobs.
  cfg.grpo.weights = cfg.weights;
  cfg.grpo.seed = cfg.seed;
  cfg.il.seed = cfg.seed;
  cfg.bench.seed = cfg.seed;
  cfg.bench.episode.policy_cfg = cfg.policy;
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config file not found: " + path);
  }
  return run_config_from_json(load_json_file(path));
}

// Stable content hash of the canonical config serialization (key order is
// alphabetical in the dump, so insertion order cannot leak in).
inline std::string config_hash(const RunConfig& cfg) {
  return hex64(fnv1a64(run_config_to_json(cfg).dump()));
}

}  // namespace socnav

#endif  // SOCNAV_CONFIG_HPP_
