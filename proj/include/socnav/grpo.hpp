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

#ifndef SOCNAV_GRPO_HPP_
#define SOCNAV_GRPO_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"
#include "socnav/policy.hpp"
#include "socnav/rewards.hpp"
#include "socnav/rng.hpp"
#include "socnav/trajectory.hpp"

namespace socnav {

// ---------------------------------------------------------------------------
// Group-relative policy optimization over stochastic flow rollouts. Rewards
// are normalized within each rollout group (no learned critic), the update is
// a clipped surrogate over per-chunk density ratios, and only the velocity
// network moves — the context encoder stays frozen.
// ---------------------------------------------------------------------------

struct GrpoConfig {
  int group_size = 8;      // rollouts per task sharing one context latent
  double eps_clip = 0.2;   // ratio clip half-width
  double lr = 1e-3;        // plain-SGD ascent step on the surrogate
  int iterations = 50;
  int tasks_per_iter = 4;  // contexts sampled per iteration
  std::uint64_t seed = 0;
  RewardWeights weights;

  void validate() const {
    if (group_size < 2) throw ValidationError("grpo: group_size must be >= 2");
    if (eps_clip < 0) throw ValidationError("grpo: eps_clip must be >= 0");
    if (iterations < 0 || tasks_per_iter < 1) {
      throw ValidationError("grpo: bad iteration or task count");
    }
    weights.validate();
  }
};

// One training anchor: a context, the pose it was observed from, and the
// expert path segment rewards are measured against.
struct GrpoTask {
  Context ctx;
  Vec2 pos;
  Trajectory expert_segment;
};

inline GrpoTask task_from_example(const TrainingExample& ex) {
  return {ex.ctx, ex.pos, ex.expert_segment};
}

struct RolloutSample {
  SdeSample sde;
  Trajectory path;  // world-frame polyline unrolled from the task pose
  RewardBreakdown reward;
};

struct RolloutGroup {
  Eigen::VectorXd latent;  // the single shared encoder output
  std::vector<RolloutSample> samples;
  std::vector<double> advantages;
};

// Group-normalized advantages: (R - mean) / (population std + 1e-8).
inline std::vector<double> compute_advantages(
    const std::vector<double>& rewards) {
  if (rewards.empty()) throw ValidationError("compute_advantages: empty group");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= rewards.size();
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= rewards.size();
  const double denom = std::sqrt(var) + 1e-8;
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    adv[i] = (rewards[i] - mean) / denom;
  }
  return adv;
}

// Samples a full rollout group for one task. The context is encoded exactly
// once; every rollout in the group conditions on that latent.
inline RolloutGroup rollout_group(const FlowPolicy& policy,
                                  const GrpoTask& task,
                                  const DistanceField& field, Rng& rng,
                                  const GrpoConfig& cfg) {
  RolloutGroup group;
  group.latent = encode_context(policy, task.ctx);
  group.samples.reserve(cfg.group_size);
  std::vector<double> rewards;
  rewards.reserve(cfg.group_size);
  for (int g = 0; g < cfg.group_size; ++g) {
    RolloutSample s;
    s.sde = sample_sde_with_latent(policy, group.latent, rng);
    s.path = chunk_to_world(s.sde.chunk, task.pos);
    s.reward = total_reward(s.path.points, task.expert_segment.points, field,
                            cfg.weights);
    rewards.push_back(s.reward.total);
    group.samples.push_back(std::move(s));
  }
  group.advantages = compute_advantages(rewards);
  return group;
}

struct GrpoStats {
  double surrogate = 0.0;
  double mean_ratio = 0.0;
  int clipped = 0;  // samples whose gradient the clip deactivated
  int active = 0;   // samples contributing to the mean
};

// Clipped surrogate over all samples of all groups:
//   J = mean_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i)
// with rho_i = exp(sum_k logp_new_k - logp_old_k) over the chunk's
// integration steps. When `grad` is given, dJ/d(velocity params) is
// accumulated; a sample's gradient is A_i rho_i d(log rho_i)/dtheta when the
// unclipped branch attains the min, and zero otherwise. Deterministic
// rollouts (no densities) are excluded.
inline double grpo_surrogate(const FlowPolicy& policy,
                             const std::vector<RolloutGroup>& groups,
                             double eps_clip, PolicyGrad* grad = nullptr,
                             GrpoStats* stats = nullptr) {
  int n = 0;
  for (const auto& g : groups) {
    for (const auto& s : g.samples) {
      if (!s.sde.deterministic) ++n;
    }
  }
  if (n == 0) {
    throw ValidationError("grpo_surrogate: no stochastic samples");
  }
  const int K = policy.cfg.flow_steps;
  const double dt = 1.0 / K;
  const double s_std = policy.cfg.sigma * std::sqrt(dt);
  double total = 0.0;
  double ratio_sum = 0.0;
  int clipped = 0;
  for (const auto& group : groups) {
    for (std::size_t i = 0; i < group.samples.size(); ++i) {
      const RolloutSample& sample = group.samples[i];
      if (sample.sde.deterministic) continue;
      const double adv = group.advantages[i];
      std::vector<MlpCache> caches;
      std::vector<Eigen::VectorXd> mus;
      const std::vector<double> new_logps = sde_step_logps(
          policy, sample.sde, group.latent, grad ? &caches : nullptr,
          grad ? &mus : nullptr);
      double log_ratio = 0.0;
      for (int k = 0; k < K; ++k) {
        log_ratio += new_logps[k] - sample.sde.step_logp[k];
      }
      const double rho = std::exp(log_ratio);
      if (!std::isfinite(rho)) {
        throw NonFiniteRatioError(
            "grpo_surrogate: non-finite density ratio (log ratio " +
            std::to_string(log_ratio) + ")");
      }
      const double unclipped = rho * adv;
      const double rho_clip = std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip);
      const double clipped_term = rho_clip * adv;
      const bool active = unclipped <= clipped_term;
      total += std::min(unclipped, clipped_term);
      ratio_sum += rho;
      if (!active) ++clipped;
      if (grad != nullptr && active && adv != 0.0) {
        // d log rho / d v_k = dt * (x_{k+1} - mu_k) / s^2, pushed through the
        // cached velocity-net forward passes; scaled by A * rho / n.
        const double coeff = adv * rho / n;
        for (int k = 0; k < K; ++k) {
          const Eigen::VectorXd dv =
              coeff * dt * (sample.sde.states[k + 1] - mus[k]) /
              (s_std * s_std);
          mlp_backward(policy.velocity, caches[k], dv, grad->velocity);
        }
      }
    }
  }
  if (stats != nullptr) {
    stats->surrogate = total / n;
    stats->mean_ratio = ratio_sum / n;
    stats->clipped = clipped;
    stats->active = n;
  }
  return total / n;
}

// One ascent step on the surrogate. Only the velocity network is updated.
inline double grpo_update(FlowPolicy& policy,
                          const std::vector<RolloutGroup>& groups,
                          const GrpoConfig& cfg, GrpoStats* stats = nullptr) {
  PolicyGrad grad = make_zero_grad(policy);
  const double surrogate =
      grpo_surrogate(policy, groups, cfg.eps_clip, &grad, stats);
  mlp_axpy(policy.velocity, grad.velocity, cfg.lr);
  if (!mlp_finite(policy.velocity)) {
    throw DivergedTrainingError("grpo_update: velocity parameters diverged");
  }
  return surrogate;
}

struct GrpoCurveRow {
  int iteration = 0;
  double mean_total = 0.0;
  double mean_social = 0.0;
  double mean_expert = 0.0;
  double mean_smooth = 0.0;
  double mean_efficiency = 0.0;
  double mean_clearance_m = 0.0;
  double surrogate = 0.0;
};

// Full RL loop: each iteration samples tasks, rolls out a fresh group per
// task under the current policy, and applies one surrogate ascent step.
// Returns the per-iteration reward curve (pre-update rollout statistics).
// With iterations == 0 the policy is untouched and the curve is empty.
inline std::vector<GrpoCurveRow> train_safe_grpo(
    FlowPolicy& policy, const std::vector<GrpoTask>& tasks,
    const DistanceField& field, const GrpoConfig& cfg) {
  cfg.validate();
  if (tasks.empty()) throw ValidationError("train_safe_grpo: no tasks");
  Rng rng(derive_seed(cfg.seed, "grpo"));
  std::vector<GrpoCurveRow> curve;
  curve.reserve(cfg.iterations);
  for (int it = 0; it < cfg.iterations; ++it) {
    std::vector<RolloutGroup> groups;
    groups.reserve(cfg.tasks_per_iter);
    GrpoCurveRow row;
    row.iteration = it;
    int n = 0;
    for (int t = 0; t < cfg.tasks_per_iter; ++t) {
      const GrpoTask& task = tasks[rng.uniform_index(tasks.size())];
      RolloutGroup group = rollout_group(policy, task, field, rng, cfg);
      for (const auto& s : group.samples) {
        row.mean_total += s.reward.total;
        row.mean_social += s.reward.social;
        row.mean_expert += s.reward.expert;
        row.mean_smooth += s.reward.smooth;
        row.mean_efficiency += s.reward.efficiency;
        row.mean_clearance_m += mean_clearance(s.path.points, field);
        ++n;
      }
      groups.push_back(std::move(group));
    }
    row.mean_total /= n;
    row.mean_social /= n;
    row.mean_expert /= n;
    row.mean_smooth /= n;
    row.mean_efficiency /= n;
    row.mean_clearance_m /= n;
    GrpoStats stats;
    grpo_update(policy, groups, cfg, &stats);
    row.surrogate = stats.surrogate;
    curve.push_back(row);
  }
  return curve;
}

}  // namespace socnav

#endif  // SOCNAV_GRPO_HPP_
