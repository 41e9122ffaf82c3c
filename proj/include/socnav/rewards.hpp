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

#ifndef SOCNAV_REWARDS_HPP_
#define SOCNAV_REWARDS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"
#include "socnav/trajectory.hpp"

namespace socnav {

// Weights and scales of the shaped reward. All four terms are bounded, so the
// total lies in [0, lambda_social*beta_social + lambda_expert + lambda_smooth
// + lambda_efficiency*beta_efficiency].
struct RewardWeights {
  double lambda_social = 1.0;
  double lambda_expert = 1.0;
  double lambda_smooth = 1.0;
  double lambda_efficiency = 1.0;

  double social_alpha_m = 0.5;   // clearance-gap softness (meters)
  double social_beta = 2.0;      // social term upper bound
  double expert_w_dist = 0.7;
  double expert_w_dir = 0.3;
  double expert_tau_m = 1.0;     // distance-decay scale (meters)
  int resample_count = 16;       // arc-length resampling for the expert term
  double smooth_scale_m = 0.8;   // step-length-spread decay scale (meters)
  double efficiency_scale_m = 5.0;  // net-displacement-gap softness (meters)
  double efficiency_beta = 2.0;     // efficiency term upper bound

  void validate() const {
    if (lambda_social < 0 || lambda_expert < 0 || lambda_smooth < 0 ||
        lambda_efficiency < 0) {
      throw ValidationError("reward weights must be >= 0");
    }
    if (social_alpha_m <= 0 || social_beta <= 0 || expert_tau_m <= 0 ||
        smooth_scale_m <= 0 || efficiency_scale_m <= 0 ||
        efficiency_beta <= 0) {
      throw ValidationError("reward scales must be > 0");
    }
    if (expert_w_dist < 0 || expert_w_dir < 0) {
      throw ValidationError("expert sub-weights must be >= 0");
    }
    if (resample_count < 2) {
      throw ValidationError("resample_count must be >= 2");
    }
  }
};

inline double mean_clearance(const std::vector<Vec2>& points,
                             const DistanceField& field) {
  if (points.empty()) throw ValidationError("mean_clearance: empty trajectory");
  double sum = 0.0;
  for (const Vec2& p : points) sum += clearance_at(field, p);
  return sum / points.size();
}

// Rewards keeping at least as much obstacle clearance as the reference path:
// beta * sigmoid((mean_clearance(pred) - mean_clearance(ref)) / alpha).
// Equal clearances give beta/2; the term is bounded in (0, beta).
inline double reward_social(const std::vector<Vec2>& pred,
                            const std::vector<Vec2>& reference,
                            const DistanceField& field,
                            const RewardWeights& w = {}) {
  const double gap = mean_clearance(pred, field) - mean_clearance(reference, field);
  return w.social_beta * sigmoid(gap / w.social_alpha_m);
}

// Geometric agreement with the reference: both paths are resampled to
// resample_count points uniformly by arc length, then
//   r_dist = exp(-mean_t ||p_t - g_t|| / tau)
//   r_dir  = (cos(mean_t angle(dp_t, dg_t)) + 1) / 2
// and the term is w_dist * r_dist + w_dir * r_dir. Steps where either path
// does not move are skipped in the direction average; if no step moves on
// both paths the headings are vacuously aligned and r_dir = 1.
inline double reward_expert(const std::vector<Vec2>& pred,
                            const std::vector<Vec2>& reference,
                            const RewardWeights& w = {}) {
  if (pred.empty() || reference.empty()) {
    throw ValidationError("reward_expert: empty trajectory");
  }
  const std::vector<Vec2> p = resample_arclength(pred, w.resample_count);
  const std::vector<Vec2> g = resample_arclength(reference, w.resample_count);
  double dist_sum = 0.0;
  for (int t = 0; t < w.resample_count; ++t) dist_sum += distance(p[t], g[t]);
  const double r_dist = std::exp(-(dist_sum / w.resample_count) / w.expert_tau_m);

  double angle_sum = 0.0;
  int angle_n = 0;
  for (int t = 1; t < w.resample_count; ++t) {
    const Vec2 dp = p[t] - p[t - 1];
    const Vec2 dg = g[t] - g[t - 1];
    if (dp.norm() < 1e-12 || dg.norm() < 1e-12) continue;
    angle_sum += angle_between(dp, dg);
    ++angle_n;
  }
  const double mean_angle = (angle_n > 0) ? angle_sum / angle_n : 0.0;
  const double r_dir = 0.5 * (std::cos(mean_angle) + 1.0);
  return w.expert_w_dist * r_dist + w.expert_w_dir * r_dir;
}

// Rewards even pacing: exp(-std(step_lengths) / smooth_scale), where the
// standard deviation is the population form over consecutive point spacings.
// Needs at least two steps to have a spread.
inline double reward_smooth(const std::vector<Vec2>& points,
                            const RewardWeights& w = {}) {
  if (points.size() < 3) {
    throw TooShortError("reward_smooth: need at least 3 points, got " +
                        std::to_string(points.size()));
  }
  std::vector<double> steps;
  steps.reserve(points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    steps.push_back(distance(points[i - 1], points[i]));
  }
  double mean = 0.0;
  for (double s : steps) mean += s;
  mean /= steps.size();
  double var = 0.0;
  for (double s : steps) var += (s - mean) * (s - mean);
  var /= steps.size();
  return std::exp(-std::sqrt(var) / w.smooth_scale_m);
}

// Rewards covering at least as much net displacement as the reference:
// beta * sigmoid((net(pred) - net(ref)) / scale), net being the straight-line
// distance from first to last point.
inline double reward_efficiency(const std::vector<Vec2>& pred,
                                const std::vector<Vec2>& reference,
                                const RewardWeights& w = {}) {
  if (pred.empty() || reference.empty()) {
    throw ValidationError("reward_efficiency: empty trajectory");
  }
  const double net_pred = distance(pred.front(), pred.back());
  const double net_ref = distance(reference.front(), reference.back());
  return w.efficiency_beta *
         sigmoid((net_pred - net_ref) / w.efficiency_scale_m);
}

struct RewardBreakdown {
  double social = 0.0;
  double expert = 0.0;
  double smooth = 0.0;
  double efficiency = 0.0;
  double total = 0.0;
};

inline RewardBreakdown total_reward(const std::vector<Vec2>& pred,
                                    const std::vector<Vec2>& reference,
                                    const DistanceField& field,
                                    const RewardWeights& w = {}) {
  w.validate();
  RewardBreakdown r;
  r.social = reward_social(pred, reference, field, w);
  r.expert = reward_expert(pred, reference, w);
  r.smooth = reward_smooth(pred, w);
  r.efficiency = reward_efficiency(pred, reference, w);
  r.total = w.lambda_social * r.social + w.lambda_expert * r.expert +
            w.lambda_smooth * r.smooth + w.lambda_efficiency * r.efficiency;
  return r;
}

}  // namespace socnav

#endif  // SOCNAV_REWARDS_HPP_
