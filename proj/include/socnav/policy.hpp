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

#ifndef SOCNAV_POLICY_HPP_
#define SOCNAV_POLICY_HPP_

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "socnav/common.hpp"
#include "socnav/grid.hpp"
#include "socnav/json_io.hpp"
#include "socnav/rng.hpp"
#include "socnav/trajectory.hpp"

namespace socnav {

// ---------------------------------------------------------------------------
// Dense multi-layer perceptron with hand-rolled backprop. tanh on hidden
// layers, linear output. Gradients are exact (verified against central finite
// differences in the test suite), which the RL update contract depends on.
// ---------------------------------------------------------------------------

struct MlpParams {
  std::vector<Eigen::MatrixXd> W;  // W[l] is out x in
  std::vector<Eigen::VectorXd> b;

  int num_layers() const { return static_cast<int>(W.size()); }
  int input_size() const { return static_cast<int>(W.front().cols()); }
  int output_size() const { return static_cast<int>(W.back().rows()); }

  std::vector<int> sizes() const {
    std::vector<int> s;
    s.push_back(input_size());
    for (const auto& w : W) s.push_back(static_cast<int>(w.rows()));
    return s;
  }
};

// He-style initialization with deterministic element order.
inline MlpParams make_mlp(const std::vector<int>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw ValidationError("mlp: need >= 2 layer sizes");
  MlpParams net;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    if (in < 1 || out < 1) throw ValidationError("mlp: layer size must be >= 1");
    Eigen::MatrixXd w(out, in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) w(r, c) = rng.normal() * scale;
    }
    net.W.push_back(std::move(w));
    net.b.push_back(Eigen::VectorXd::Zero(out));
  }
  return net;
}

struct MlpCache {
  std::vector<Eigen::VectorXd> a;  // a[0] = input, a[l+1] = layer l output
};

inline Eigen::VectorXd mlp_forward(const MlpParams& net,
                                   const Eigen::VectorXd& x,
                                   MlpCache* cache = nullptr) {
  if (x.size() != net.input_size()) {
    throw ShapeMismatchError("mlp: input size " + std::to_string(x.size()) +
                             " != expected " +
                             std::to_string(net.input_size()));
  }
  Eigen::VectorXd a = x;
  if (cache != nullptr) {
    cache->a.clear();
    cache->a.push_back(a);
  }
  const int L = net.num_layers();
  for (int l = 0; l < L; ++l) {
    Eigen::VectorXd z = net.W[l] * a + net.b[l];
    a = (l + 1 < L) ? z.array().tanh().matrix() : z;
    if (cache != nullptr) cache->a.push_back(a);
  }
  return a;
}

// Backpropagates dL/dy through the cached forward pass, accumulating into
// `grad` (same shapes as `net`, pre-zeroed by the caller or reused across a
// batch). Returns dL/dx.
inline Eigen::VectorXd mlp_backward(const MlpParams& net, const MlpCache& cache,
                                    const Eigen::VectorXd& dy,
                                    MlpParams& grad) {
  const int L = net.num_layers();
  if (grad.num_layers() != L ||
      (L > 0 && (grad.W[0].rows() != net.W[0].rows() ||
                 grad.W[0].cols() != net.W[0].cols()))) {
    throw ShapeMismatchError(
        "mlp_backward: gradient accumulator shape differs from the network "
        "(allocate it with the matching zero-gradient helper)");
  }
  Eigen::VectorXd delta = dy;
  for (int l = L - 1; l >= 0; --l) {
    grad.W[l].noalias() += delta * cache.a[l].transpose();
    grad.b[l] += delta;
    Eigen::VectorXd dx = net.W[l].transpose() * delta;
    if (l > 0) {
      // cache.a[l] is the post-tanh output feeding layer l.
      delta = dx.cwiseProduct(
          (1.0 - cache.a[l].array().square()).matrix());
    } else {
      return dx;
    }
  }
  return delta;  // unreachable for L >= 1
}

inline MlpParams zeros_like(const MlpParams& net) {
  MlpParams z;
  for (const auto& w : net.W) z.W.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : net.b) z.b.push_back(Eigen::VectorXd::Zero(b.size()));
  return z;
}

inline void mlp_scale(MlpParams& net, double s) {
  for (auto& w : net.W) w *= s;
  for (auto& b : net.b) b *= s;
}

// a += b * s
inline void mlp_axpy(MlpParams& a, const MlpParams& b, double s) {
  for (std::size_t l = 0; l < a.W.size(); ++l) {
    a.W[l].noalias() += b.W[l] * s;
    a.b[l] += b.b[l] * s;
  }
}

inline bool mlp_finite(const MlpParams& net) {
  for (const auto& w : net.W) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : net.b) {
    if (!b.allFinite()) return false;
  }
  return true;
}

// Flattened parameter view (deterministic order), for finite-difference
// oracles and exact equality checks.
inline Eigen::VectorXd mlp_param_vector(const MlpParams& net) {
  std::size_t total = 0;
  for (const auto& w : net.W) total += w.size();
  for (const auto& b : net.b) total += b.size();
  Eigen::VectorXd out(total);
  std::size_t k = 0;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    for (int r = 0; r < net.W[l].rows(); ++r) {
      for (int c = 0; c < net.W[l].cols(); ++c) out[k++] = net.W[l](r, c);
    }
    for (int r = 0; r < net.b[l].size(); ++r) out[k++] = net.b[l][r];
  }
  return out;
}

inline void mlp_set_param_vector(MlpParams& net, const Eigen::VectorXd& v) {
  std::size_t k = 0;
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    for (int r = 0; r < net.W[l].rows(); ++r) {
      for (int c = 0; c < net.W[l].cols(); ++c) net.W[l](r, c) = v[k++];
    }
    for (int r = 0; r < net.b[l].size(); ++r) net.b[l][r] = v[k++];
  }
  if (k != static_cast<std::size_t>(v.size())) {
    throw ShapeMismatchError("mlp_set_param_vector: size mismatch");
  }
}

// ---------------------------------------------------------------------------
// Policy configuration and context encoding.
// ---------------------------------------------------------------------------

struct PolicyConfig {
  int history_len = 6;  // relative history points, current position last
  int chunk_len = 5;    // predicted waypoints per action chunk
  int patch_w = 5;      // local clearance patch is patch_w x patch_w
  int latent_dim = 64;
  std::vector<int> encoder_hidden = {64, 64};
  std::vector<int> velocity_hidden = {128, 128, 128};
  int flow_steps = 5;    // K Euler steps from noise to action
  double sigma = 0.15;   // SDE noise scale, normalized action units
  double action_scale_m = 1.0;  // meters per normalized action unit
  double goal_clip_m = 10.0;    // goal offset is clipped to this radius
  double goal_norm_m = 10.0;
  double patch_norm_m = 5.0;
  double patch_stride_m = 0.5;  // spacing of the clearance patch samples

  int context_dim() const { return history_len * 2 + 2 + patch_w * patch_w; }
  int action_dim() const { return chunk_len * 2; }

  std::vector<int> encoder_sizes() const {
    std::vector<int> s = {context_dim()};
    s.insert(s.end(), encoder_hidden.begin(), encoder_hidden.end());
    s.push_back(latent_dim);
    return s;
  }
  std::vector<int> velocity_sizes() const {
    std::vector<int> s = {action_dim() + 1 + latent_dim};
    s.insert(s.end(), velocity_hidden.begin(), velocity_hidden.end());
    s.push_back(action_dim());
    return s;
  }
};

// Everything the policy conditions on, in the agent's local frame: recent
// positions relative to the current pose (current = origin, last entry), the
// goal offset, and a square patch of clearance values around the pose.
struct Context {
  std::vector<Vec2> history;
  Vec2 goal;
  std::vector<double> patch;
};

inline Context make_context(const std::vector<Vec2>& recent_abs,
                            const Vec2& goal_world, const DistanceField& field,
                            const PolicyConfig& cfg) {
  if (static_cast<int>(recent_abs.size()) != cfg.history_len) {
    throw ShapeMismatchError("make_context: history length " +
                             std::to_string(recent_abs.size()) + " != " +
                             std::to_string(cfg.history_len));
  }
  const Vec2 pos = recent_abs.back();
  Context ctx;
  ctx.history.reserve(recent_abs.size());
  for (const Vec2& p : recent_abs) ctx.history.push_back(p - pos);
  ctx.goal = goal_world - pos;
  ctx.patch.reserve(cfg.patch_w * cfg.patch_w);
  const int c = cfg.patch_w / 2;
  for (int py = 0; py < cfg.patch_w; ++py) {
    for (int px = 0; px < cfg.patch_w; ++px) {
      const Vec2 offset{(px - c) * cfg.patch_stride_m,
                        (py - c) * cfg.patch_stride_m};
      ctx.patch.push_back(clearance_at(field, pos + offset));
    }
  }
  return ctx;
}

// Normalized input vector fed to the encoder.
inline Eigen::VectorXd context_input(const Context& ctx,
                                     const PolicyConfig& cfg) {
  if (static_cast<int>(ctx.history.size()) != cfg.history_len ||
      static_cast<int>(ctx.patch.size()) != cfg.patch_w * cfg.patch_w) {
    throw ShapeMismatchError(
        "context: history " + std::to_string(ctx.history.size()) + " patch " +
        std::to_string(ctx.patch.size()) + " vs config history " +
        std::to_string(cfg.history_len) + " patch " +
        std::to_string(cfg.patch_w * cfg.patch_w));
  }
  if (ctx.history.back().norm() > 1e-9) {
    throw ValidationError("context: current position must be the origin");
  }
  Eigen::VectorXd in(cfg.context_dim());
  int k = 0;
  for (const Vec2& p : ctx.history) {
    in[k++] = p.x;
    in[k++] = p.y;
  }
  Vec2 goal = ctx.goal;
  const double gn = goal.norm();
  if (gn > cfg.goal_clip_m) goal = goal * (cfg.goal_clip_m / gn);
  in[k++] = goal.x / cfg.goal_norm_m;
  in[k++] = goal.y / cfg.goal_norm_m;
  for (double v : ctx.patch) in[k++] = v / cfg.patch_norm_m;
  return in;
}

// ---------------------------------------------------------------------------
// The flow-matching policy: encoder (context -> latent) plus velocity field
// (action state, time, latent -> action velocity).
// ---------------------------------------------------------------------------

struct FlowPolicy {
  PolicyConfig cfg;
  MlpParams encoder;
  MlpParams velocity;
  // Counts encode_context invocations; the samplers' contract is exactly one
  // encoder evaluation per sampled chunk (and one per rollout group).
  mutable std::atomic<std::uint64_t> encoder_calls{0};

  FlowPolicy() = default;
  FlowPolicy(const FlowPolicy& o)
      : cfg(o.cfg), encoder(o.encoder), velocity(o.velocity),
        encoder_calls(o.encoder_calls.load()) {}
  FlowPolicy& operator=(const FlowPolicy& o) {
    if (this != &o) {
      cfg = o.cfg;
      encoder = o.encoder;
      velocity = o.velocity;
      encoder_calls.store(o.encoder_calls.load());
    }
    return *this;
  }
};

inline FlowPolicy make_policy(const PolicyConfig& cfg, Rng& rng) {
  FlowPolicy p;
  p.cfg = cfg;
  p.encoder = make_mlp(cfg.encoder_sizes(), rng);
  p.velocity = make_mlp(cfg.velocity_sizes(), rng);
  return p;
}

struct PolicyGrad {
  MlpParams encoder;
  MlpParams velocity;
};

inline PolicyGrad make_zero_grad(const FlowPolicy& policy) {
  return {zeros_like(policy.encoder), zeros_like(policy.velocity)};
}

inline Eigen::VectorXd encode_context_cached(const FlowPolicy& policy,
                                             const Context& ctx,
                                             MlpCache* cache) {
  const Eigen::VectorXd in = context_input(ctx, policy.cfg);
  policy.encoder_calls.fetch_add(1, std::memory_order_relaxed);
  return mlp_forward(policy.encoder, in, cache);
}

inline Eigen::VectorXd encode_context(const FlowPolicy& policy,
                                      const Context& ctx) {
  return encode_context_cached(policy, ctx, nullptr);
}

// ---------------------------------------------------------------------------
// Action chunks.
// ---------------------------------------------------------------------------

// Sequence of per-step 2D displacements in meters; the executed path is their
// cumulative sum from the agent pose.
struct ActionChunk {
  std::vector<Vec2> waypoints;
};

inline Eigen::VectorXd chunk_to_vector(const ActionChunk& chunk) {
  Eigen::VectorXd v(2 * chunk.waypoints.size());
  for (std::size_t i = 0; i < chunk.waypoints.size(); ++i) {
    v[2 * i] = chunk.waypoints[i].x;
    v[2 * i + 1] = chunk.waypoints[i].y;
  }
  return v;
}

inline ActionChunk chunk_from_vector(const Eigen::VectorXd& v) {
  if (v.size() % 2 != 0) {
    throw ShapeMismatchError("chunk_from_vector: odd length");
  }
  ActionChunk chunk;
  chunk.waypoints.reserve(v.size() / 2);
  for (int i = 0; i < v.size(); i += 2) {
    chunk.waypoints.push_back({v[i], v[i + 1]});
  }
  return chunk;
}

inline Trajectory chunk_to_world(const ActionChunk& chunk, const Vec2& pos) {
  Trajectory t;
  t.kind = TrajectoryKind::kRollout;
  t.points.push_back(pos);
  Vec2 p = pos;
  for (const Vec2& w : chunk.waypoints) {
    p += w;
    t.points.push_back(p);
  }
  t.start = pos;
  t.goal = p;
  return t;
}

// ---------------------------------------------------------------------------
// Conditional flow matching loss.
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::VectorXd velocity_input(const Eigen::VectorXd& x, double t,
                                      const Eigen::VectorXd& z) {
  Eigen::VectorXd in(x.size() + 1 + z.size());
  in << x, t, z;
  return in;
}

}  // namespace detail

// Draws t ~ U(0,1) and x0 ~ N(0,I) (in that order), forms the linear
// interpolant x_t = (1-t) x0 + t x1 toward the normalized expert chunk x1,
// and returns the mean-squared error between the predicted velocity and the
// constant target velocity x1 - x0. When `grad` is non-null the exact
// parameter gradient (velocity net and encoder) is accumulated into it.
inline double cfm_loss(const FlowPolicy& policy, const Context& ctx,
                       const ActionChunk& chunk, Rng& rng,
                       PolicyGrad* grad = nullptr) {
  const int d = policy.cfg.action_dim();
  Eigen::VectorXd x1 = chunk_to_vector(chunk) / policy.cfg.action_scale_m;
  if (x1.size() != d) {
    throw ShapeMismatchError("cfm_loss: chunk has " +
                             std::to_string(x1.size() / 2) +
                             " waypoints, expected " +
                             std::to_string(policy.cfg.chunk_len));
  }
  if (!x1.allFinite()) {
    throw ValidationError("cfm_loss: expert chunk is not finite");
  }
  const double t = rng.uniform();
  Eigen::VectorXd x0(d);
  for (int i = 0; i < d; ++i) x0[i] = rng.normal();

  MlpCache enc_cache;
  const Eigen::VectorXd z =
      encode_context_cached(policy, ctx, grad ? &enc_cache : nullptr);
  const Eigen::VectorXd xt = (1.0 - t) * x0 + t * x1;
  MlpCache vel_cache;
  const Eigen::VectorXd v = mlp_forward(
      policy.velocity, detail::velocity_input(xt, t, z),
      grad ? &vel_cache : nullptr);
  const Eigen::VectorXd target = x1 - x0;
  const Eigen::VectorXd r = v - target;
  const double loss = r.squaredNorm() / d;
  if (!std::isfinite(loss)) {
    throw NonFiniteLossError("cfm_loss: loss is not finite");
  }
  if (grad != nullptr) {
    const Eigen::VectorXd dv = 2.0 * r / d;
    const Eigen::VectorXd din =
        mlp_backward(policy.velocity, vel_cache, dv, grad->velocity);
    const Eigen::VectorXd dz = din.tail(policy.cfg.latent_dim);
    mlp_backward(policy.encoder, enc_cache, dz, grad->encoder);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Sampling: K-step Euler ODE and Euler-Maruyama SDE.
// ---------------------------------------------------------------------------

inline ActionChunk sample_ode_with_latent(const FlowPolicy& policy,
                                          const Eigen::VectorXd& z,
                                          std::uint64_t noise_seed) {
  const int d = policy.cfg.action_dim();
  const int K = policy.cfg.flow_steps;
  if (K < 1) throw ValidationError("sample_ode: flow_steps must be >= 1");
  Rng rng(noise_seed);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.normal();
  const double dt = 1.0 / K;
  for (int k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) / K;
    const Eigen::VectorXd v =
        mlp_forward(policy.velocity, detail::velocity_input(x, t, z));
    x += v * dt;
    if (!x.allFinite()) {
      throw NonFiniteStateError("sample_ode: state diverged at step " +
                                std::to_string(k));
    }
  }
  return chunk_from_vector(x * policy.cfg.action_scale_m);
}

inline ActionChunk sample_ode(const FlowPolicy& policy, const Context& ctx,
                              std::uint64_t noise_seed) {
  return sample_ode_with_latent(policy, encode_context(policy, ctx),
                                noise_seed);
}

// One stochastic flow sample: the visited states, the per-step Gaussian
// transition log-densities (needed by the RL ratio), and the resulting chunk.
// With sigma = 0 the integration is the ODE exactly and `deterministic` is
// set (no per-step densities exist).
struct SdeSample {
  ActionChunk chunk;
  std::vector<Eigen::VectorXd> states;  // x_0 .. x_K
  std::vector<double> step_logp;        // one entry per step; empty if det.
  bool deterministic = false;
};

inline SdeSample sample_sde_with_latent(const FlowPolicy& policy,
                                        const Eigen::VectorXd& z, Rng& rng) {
  const int d = policy.cfg.action_dim();
  const int K = policy.cfg.flow_steps;
  if (K < 1) throw ValidationError("sample_sde: flow_steps must be >= 1");
  const double sigma = policy.cfg.sigma;
  if (sigma < 0.0) throw ValidationError("sample_sde: sigma must be >= 0");
  SdeSample out;
  out.deterministic = (sigma == 0.0);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.normal();
  out.states.push_back(x);
  const double dt = 1.0 / K;
  const double s = sigma * std::sqrt(dt);  // per-axis transition std
  const double log_norm = -0.5 * std::log(2.0 * M_PI);
  for (int k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) / K;
    const Eigen::VectorXd v =
        mlp_forward(policy.velocity, detail::velocity_input(x, t, z));
    const Eigen::VectorXd mu = x + v * dt;
    if (out.deterministic) {
      x = mu;
    } else {
      double logp = 0.0;
      Eigen::VectorXd next(d);
      for (int i = 0; i < d; ++i) {
        const double xi = rng.normal();
        next[i] = mu[i] + s * xi;
        logp += log_norm - std::log(s) - 0.5 * xi * xi;
      }
      x = next;
      out.step_logp.push_back(logp);
    }
    if (!x.allFinite()) {
      throw NonFiniteStateError("sample_sde: state diverged at step " +
                                std::to_string(k));
    }
    out.states.push_back(x);
  }
  out.chunk = chunk_from_vector(x * policy.cfg.action_scale_m);
  return out;
}

inline SdeSample sample_sde(const FlowPolicy& policy, const Context& ctx,
                            Rng& rng) {
  return sample_sde_with_latent(policy, encode_context(policy, ctx), rng);
}

// Per-step transition log-densities of a stored SDE sample under the current
// velocity parameters (the latent and sigma are held fixed). Used by the RL
// update to form new/old density ratios.
inline std::vector<double> sde_step_logps(const FlowPolicy& policy,
                                          const SdeSample& sample,
                                          const Eigen::VectorXd& z,
                                          std::vector<MlpCache>* caches =
                                              nullptr,
                                          std::vector<Eigen::VectorXd>* mus =
                                              nullptr) {
  if (sample.deterministic) {
    throw ValidationError("sde_step_logps: sample has no densities (sigma 0)");
  }
  const int K = policy.cfg.flow_steps;
  const int d = policy.cfg.action_dim();
  const double dt = 1.0 / K;
  const double s = policy.cfg.sigma * std::sqrt(dt);
  const double log_norm = -0.5 * std::log(2.0 * M_PI);
  std::vector<double> logps(K);
  if (caches != nullptr) caches->assign(K, {});
  if (mus != nullptr) mus->assign(K, {});
  for (int k = 0; k < K; ++k) {
    const double t = static_cast<double>(k) / K;
    MlpCache* cache = caches ? &(*caches)[k] : nullptr;
    const Eigen::VectorXd v = mlp_forward(
        policy.velocity, detail::velocity_input(sample.states[k], t, z),
        cache);
    const Eigen::VectorXd mu = sample.states[k] + v * dt;
    double logp = 0.0;
    for (int i = 0; i < d; ++i) {
      const double r = (sample.states[k + 1][i] - mu[i]) / s;
      logp += log_norm - std::log(s) - 0.5 * r * r;
    }
    logps[k] = logp;
    if (mus != nullptr) (*mus)[k] = mu;
  }
  return logps;
}

// ---------------------------------------------------------------------------
// Imitation training (flow-matching regression with momentum SGD).
// ---------------------------------------------------------------------------

struct IlExample {
  Context ctx;
  ActionChunk chunk;
};

struct IlConfig {
  double lr = 1e-3;
  double momentum = 0.9;
  int batch_size = 64;
  int steps = 2000;
  bool freeze_encoder = false;  // emulates the frozen-conditioner stage
  std::uint64_t seed = 0;
};

struct IlResult {
  std::vector<double> losses;  // batch-mean loss per step
};

inline IlResult train_il(FlowPolicy& policy,
                         const std::vector<IlExample>& dataset,
                         const IlConfig& cfg) {
  if (dataset.empty()) throw ValidationError("train_il: empty dataset");
  if (cfg.batch_size < 1 || cfg.steps < 0) {
    throw ValidationError("train_il: bad batch size or step count");
  }
  Rng rng(cfg.seed);
  PolicyGrad grad = make_zero_grad(policy);
  PolicyGrad vel = make_zero_grad(policy);  // momentum buffers
  IlResult result;
  result.losses.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    mlp_scale(grad.encoder, 0.0);
    mlp_scale(grad.velocity, 0.0);
    double batch_loss = 0.0;
    try {
      for (int i = 0; i < cfg.batch_size; ++i) {
        const std::size_t idx = rng.uniform_index(dataset.size());
        batch_loss +=
            cfm_loss(policy, dataset[idx].ctx, dataset[idx].chunk, rng, &grad);
      }
    } catch (const NonFiniteLossError& e) {
      throw DivergedTrainingError("train_il: step " + std::to_string(step) +
                                  ": " + e.what());
    }
    batch_loss /= cfg.batch_size;
    if (!std::isfinite(batch_loss)) {
      throw DivergedTrainingError("train_il: non-finite loss at step " +
                                  std::to_string(step));
    }
    const double inv_batch = 1.0 / cfg.batch_size;
    // v <- momentum * v + g ; theta <- theta - lr * v
    mlp_scale(vel.velocity, cfg.momentum);
    mlp_axpy(vel.velocity, grad.velocity, inv_batch);
    mlp_axpy(policy.velocity, vel.velocity, -cfg.lr);
    if (!cfg.freeze_encoder) {
      mlp_scale(vel.encoder, cfg.momentum);
      mlp_axpy(vel.encoder, grad.encoder, inv_batch);
      mlp_axpy(policy.encoder, vel.encoder, -cfg.lr);
    }
    if (!mlp_finite(policy.velocity) || !mlp_finite(policy.encoder)) {
      throw DivergedTrainingError("train_il: parameters diverged at step " +
                                  std::to_string(step));
    }
    result.losses.push_back(batch_loss);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O (versioned JSON).
// ---------------------------------------------------------------------------

inline constexpr int kCheckpointFormatVersion = 1;

namespace detail {

inline nlohmann::json mlp_to_json(const MlpParams& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.W.size(); ++l) {
    std::vector<double> w(net.W[l].size());
    std::size_t k = 0;
    for (int r = 0; r < net.W[l].rows(); ++r) {
      for (int c = 0; c < net.W[l].cols(); ++c) w[k++] = net.W[l](r, c);
    }
    std::vector<double> b(net.b[l].data(), net.b[l].data() + net.b[l].size());
    layers.push_back({{"w", w}, {"b", b}});
  }
  return {{"sizes", net.sizes()}, {"layers", layers}};
}

inline MlpParams mlp_from_json(const nlohmann::json& j) {
  const std::vector<int> sizes = j.at("sizes").get<std::vector<int>>();
  if (sizes.size() < 2) throw ParseError("checkpoint: bad layer sizes");
  MlpParams net;
  const auto& layers = j.at("layers");
  if (layers.size() != sizes.size() - 1) {
    throw ParseError("checkpoint: layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const auto w = layers.at(l).at("w").get<std::vector<double>>();
    const auto b = layers.at(l).at("b").get<std::vector<double>>();
    if (static_cast<int>(w.size()) != in * out ||
        static_cast<int>(b.size()) != out) {
      throw ParseError("checkpoint: weight shape mismatch");
    }
    Eigen::MatrixXd W(out, in);
    std::size_t k = 0;
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) W(r, c) = w[k++];
    }
    net.W.push_back(std::move(W));
    net.b.push_back(
        Eigen::Map<const Eigen::VectorXd>(b.data(), b.size()));
  }
  return net;
}

inline nlohmann::json policy_config_to_json(const PolicyConfig& c) {
  return {{"history_len", c.history_len},
          {"chunk_len", c.chunk_len},
          {"patch_w", c.patch_w},
          {"latent_dim", c.latent_dim},
          {"encoder_hidden", c.encoder_hidden},
          {"velocity_hidden", c.velocity_hidden},
          {"flow_steps", c.flow_steps},
          {"sigma", c.sigma},
          {"action_scale_m", c.action_scale_m},
          {"goal_clip_m", c.goal_clip_m},
          {"goal_norm_m", c.goal_norm_m},
          {"patch_norm_m", c.patch_norm_m},
          {"patch_stride_m", c.patch_stride_m}};
}

inline PolicyConfig policy_config_from_json(const nlohmann::json& j) {
  PolicyConfig c;
  c.history_len = j.at("history_len").get<int>();
  c.chunk_len = j.at("chunk_len").get<int>();
  c.patch_w = j.at("patch_w").get<int>();
  c.latent_dim = j.at("latent_dim").get<int>();
  c.encoder_hidden = j.at("encoder_hidden").get<std::vector<int>>();
  c.velocity_hidden = j.at("velocity_hidden").get<std::vector<int>>();
  c.flow_steps = j.at("flow_steps").get<int>();
  c.sigma = j.at("sigma").get<double>();
  c.action_scale_m = j.at("action_scale_m").get<double>();
  c.goal_clip_m = j.at("goal_clip_m").get<double>();
  c.goal_norm_m = j.at("goal_norm_m").get<double>();
  c.patch_norm_m = j.at("patch_norm_m").get<double>();
  c.patch_stride_m = j.at("patch_stride_m").get<double>();
  return c;
}

}  // namespace detail

inline void save_checkpoint(const FlowPolicy& policy, const std::string& path,
                            std::uint64_t seed = 0,
                            const std::string& config_hash = "") {
  nlohmann::json j = {{"format_version", kCheckpointFormatVersion},
                      {"seed", seed},
                      {"config_hash", config_hash},
                      {"config", detail::policy_config_to_json(policy.cfg)},
                      {"encoder", detail::mlp_to_json(policy.encoder)},
                      {"velocity", detail::mlp_to_json(policy.velocity)}};
  save_json_file(path, j, -1);
}

inline FlowPolicy load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingCheckpointError("checkpoint not found: " + path);
  }
  try {
    const nlohmann::json j = load_json_file(path);
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw VersionMismatchError(
          "checkpoint " + path + ": format version " +
          std::to_string(version) + ", expected " +
          std::to_string(kCheckpointFormatVersion));
    }
    FlowPolicy policy;
    policy.cfg = detail::policy_config_from_json(j.at("config"));
    policy.encoder = detail::mlp_from_json(j.at("encoder"));
    policy.velocity = detail::mlp_from_json(j.at("velocity"));
    if (policy.encoder.sizes() != policy.cfg.encoder_sizes() ||
        policy.velocity.sizes() != policy.cfg.velocity_sizes()) {
      throw ParseError("checkpoint: network shapes disagree with config");
    }
    return policy;
  } catch (const VersionMismatchError&) {
    throw;
  } catch (const Error& e) {
    throw VersionMismatchError("checkpoint " + path +
                               " is corrupt: " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw VersionMismatchError("checkpoint " + path +
                               " is corrupt: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training-example extraction from expert trajectories.
// ---------------------------------------------------------------------------

// One supervised sample anchored at a trajectory point: the context observed
// there, the next chunk_len expert displacements, and the matching expert
// path segment (used as the reward reference during RL).
struct TrainingExample {
  Context ctx;
  ActionChunk chunk;
  Vec2 pos;
  Trajectory expert_segment;
};

inline std::vector<TrainingExample> extract_examples(
    const Trajectory& traj, const DistanceField& field,
    const PolicyConfig& cfg, int stride = 1) {
  std::vector<TrainingExample> out;
  const int n = static_cast<int>(traj.points.size());
  const int m = cfg.chunk_len;
  if (stride < 1) throw ValidationError("extract_examples: stride must be >= 1");
  for (int i = 0; i + m < n; i += stride) {
    std::vector<Vec2> recent(cfg.history_len);
    for (int h = 0; h < cfg.history_len; ++h) {
      const int idx = std::max(0, i - (cfg.history_len - 1 - h));
      recent[h] = traj.points[idx];
    }
    TrainingExample ex;
    ex.pos = traj.points[i];
    ex.ctx = make_context(recent, traj.goal, field, cfg);
    for (int k = 1; k <= m; ++k) {
      ex.chunk.waypoints.push_back(traj.points[i + k] - traj.points[i + k - 1]);
    }
    ex.expert_segment.kind = TrajectoryKind::kStandard;
    ex.expert_segment.points.assign(traj.points.begin() + i,
                                    traj.points.begin() + i + m + 1);
    ex.expert_segment.start = traj.points[i];
    ex.expert_segment.goal = traj.goal;
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace socnav

#endif  // SOCNAV_POLICY_HPP_
