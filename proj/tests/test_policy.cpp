#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "socnav/policy.hpp"
#include "worlds.hpp"

using namespace socnav;

namespace {

// Deliberately tiny network so finite-difference sweeps stay fast.
PolicyConfig tiny_config() {
  PolicyConfig cfg;
  cfg.history_len = 2;
  cfg.chunk_len = 3;
  cfg.patch_w = 3;
  cfg.latent_dim = 4;
  cfg.encoder_hidden = {8};
  cfg.velocity_hidden = {8, 8};
  cfg.flow_steps = 3;
  cfg.sigma = 0.15;
  return cfg;
}

struct World {
  SemanticGrid grid = worlds::corridor_grid();
  DistanceField field = distance_transform(grid);
};

const World& world() {
  static World w;
  return w;
}

Context tiny_context(const PolicyConfig& cfg) {
  std::vector<Vec2> recent;
  for (int i = 0; i < cfg.history_len; ++i) {
    recent.push_back({2.0 + 0.3 * i, 3.0});
  }
  return make_context(recent, {20.0, 3.0}, world().field, cfg);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

// Bitwise equality of two parameter vectors.
bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && a.cwiseEqual(b).all();
}

}  // namespace

TEST_CASE("mlp construction gives the requested shapes and scaled init") {
  Rng rng(1);
  const MlpParams net = make_mlp({4, 8, 2}, rng);
  CHECK(net.num_layers() == 2);
  CHECK(net.input_size() == 4);
  CHECK(net.output_size() == 2);
  CHECK(net.W[0].rows() == 8);
  CHECK(net.W[0].cols() == 4);
  CHECK(net.W[1].rows() == 2);
  CHECK(net.W[1].cols() == 8);
  CHECK(net.b[0].isZero());
  CHECK(net.b[1].isZero());
  CHECK(net.sizes() == std::vector<int>{4, 8, 2});

  // Weights are normal with std 1/sqrt(fan_in).
  Rng rng2(2);
  const MlpParams wide = make_mlp({100, 60}, rng2);
  const double mean = wide.W[0].mean();
  const double sq = wide.W[0].array().square().mean();
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::sqrt(sq - mean * mean) == doctest::Approx(0.1).epsilon(0.05));

  CHECK_THROWS_AS(make_mlp({5}, rng), ValidationError);
}

TEST_CASE("mlp forward matches a hand computation") {
  MlpParams net;
  net.W.push_back((Eigen::MatrixXd(2, 2) << 1.0, 0.0, 0.0, 1.0).finished());
  net.b.push_back((Eigen::VectorXd(2) << 0.5, -0.5).finished());
  net.W.push_back((Eigen::MatrixXd(1, 2) << 2.0, -1.0).finished());
  net.b.push_back((Eigen::VectorXd(1) << 0.25).finished());

  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 0.3, 0.7).finished();
  const Eigen::VectorXd y = mlp_forward(net, x);
  REQUIRE(y.size() == 1);
  // Hidden layer is tanh, output layer is linear.
  const double expected =
      2.0 * std::tanh(0.8) - 1.0 * std::tanh(0.2) + 0.25;
  CHECK(y[0] == doctest::Approx(expected).epsilon(1e-12));

  const Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(mlp_forward(net, bad), ShapeMismatchError);
}

TEST_CASE("mlp backward matches finite differences") {
  Rng rng(7);
  MlpParams net = make_mlp({5, 7, 4, 3}, rng);
  Eigen::VectorXd x(5);
  for (int i = 0; i < 5; ++i) x[i] = rng.normal();
  Eigen::VectorXd w(3);
  for (int i = 0; i < 3; ++i) w[i] = rng.normal();

  // L(theta) = w . mlp(x; theta)
  MlpCache cache;
  const Eigen::VectorXd y = mlp_forward(net, x, &cache);
  MlpParams grad = zeros_like(net);
  const Eigen::VectorXd dx = mlp_backward(net, cache, w, grad);

  const Eigen::VectorXd theta = mlp_param_vector(net);
  const Eigen::VectorXd fd = oracles::central_fd(
      [&](const Eigen::VectorXd& th) {
        MlpParams n2 = net;
        mlp_set_param_vector(n2, th);
        return w.dot(mlp_forward(n2, x));
      },
      theta);
  const Eigen::VectorXd ga = mlp_param_vector(grad);
  REQUIRE(ga.size() == fd.size());
  for (int i = 0; i < ga.size(); ++i) {
    CHECK(std::abs(ga[i] - fd[i]) <=
          1e-6 * std::max({1.0, std::abs(ga[i]), std::abs(fd[i])}));
  }

  // Input gradient against finite differences too.
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double fdx = (w.dot(mlp_forward(net, xp)) -
                        w.dot(mlp_forward(net, xm))) / 2e-6;
    CHECK(dx[i] == doctest::Approx(fdx).epsilon(1e-5));
  }
}

TEST_CASE("mlp parameter vector round trips") {
  Rng rng(9);
  MlpParams net = make_mlp({3, 5, 2}, rng);
  const Eigen::VectorXd theta = mlp_param_vector(net);
  CHECK(theta.size() == 3 * 5 + 5 + 5 * 2 + 2);
  Eigen::VectorXd shuffled = theta.reverse();
  mlp_set_param_vector(net, shuffled);
  CHECK(same(mlp_param_vector(net), shuffled));
  mlp_axpy(net, zeros_like(net), 2.0);
  CHECK(same(mlp_param_vector(net), shuffled));
  mlp_scale(net, 0.0);
  CHECK(mlp_param_vector(net).isZero());
  CHECK(mlp_finite(net));
  net.b[0][0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(mlp_finite(net));
}

TEST_CASE("context captures relative history, goal, and clearance patch") {
  PolicyConfig cfg = tiny_config();
  cfg.history_len = 3;
  const std::vector<Vec2> recent = {{2.0, 3.0}, {2.5, 3.0}, {3.0, 3.0}};
  const Context ctx = make_context(recent, {10.0, 4.0}, world().field, cfg);

  REQUIRE(ctx.history.size() == 3);
  CHECK(ctx.history[0].x == doctest::Approx(-1.0));
  CHECK(ctx.history[1].x == doctest::Approx(-0.5));
  CHECK(ctx.history[2].norm() == doctest::Approx(0.0));
  CHECK(ctx.goal.x == doctest::Approx(7.0));
  CHECK(ctx.goal.y == doctest::Approx(1.0));

  // Patch is row-major with py outer, px inner, centered on the pose.
  REQUIRE(ctx.patch.size() == 9);
  const Vec2 pos = recent.back();
  for (int py = 0; py < 3; ++py) {
    for (int px = 0; px < 3; ++px) {
      const Vec2 off{(px - 1) * cfg.patch_stride_m,
                     (py - 1) * cfg.patch_stride_m};
      CHECK(ctx.patch[py * 3 + px] ==
            doctest::Approx(clearance_at(world().field, pos + off)));
    }
  }

  CHECK_THROWS_AS(make_context({{0.0, 0.0}}, {1.0, 1.0}, world().field, cfg),
                  ShapeMismatchError);
}

TEST_CASE("context input is normalized and the goal is clipped") {
  PolicyConfig cfg = tiny_config();
  Context ctx = tiny_context(cfg);
  const Eigen::VectorXd in = context_input(ctx, cfg);
  REQUIRE(in.size() == cfg.context_dim());
  // Layout: history pairs, goal, patch.
  CHECK(in[0] == doctest::Approx(ctx.history[0].x));
  CHECK(in[1] == doctest::Approx(ctx.history[0].y));
  // The egocentric goal is clipped to goal_clip_m before normalization.
  Vec2 clipped = ctx.goal;
  if (clipped.norm() > cfg.goal_clip_m) {
    clipped = clipped * (cfg.goal_clip_m / clipped.norm());
  }
  CHECK(in[2 * cfg.history_len] == doctest::Approx(clipped.x / 10.0));
  CHECK(in[2 * cfg.history_len + 1] == doctest::Approx(clipped.y / 10.0));
  CHECK(in[2 * cfg.history_len + 2] == doctest::Approx(ctx.patch[0] / 5.0));

  // A far goal is clipped to goal_clip_m before normalization.
  Context far = ctx;
  far.goal = {30.0, 40.0};  // norm 50 -> clipped to 10 along (0.6, 0.8)
  const Eigen::VectorXd fin = context_input(far, cfg);
  CHECK(fin[2 * cfg.history_len] == doctest::Approx(0.6));
  CHECK(fin[2 * cfg.history_len + 1] == doctest::Approx(0.8));

  Context off = ctx;
  off.history.back() = {0.5, 0.0};
  CHECK_THROWS_AS(context_input(off, cfg), ValidationError);
  Context wrong = ctx;
  wrong.patch.pop_back();
  CHECK_THROWS_AS(context_input(wrong, cfg), ShapeMismatchError);
}

TEST_CASE("every sampled chunk costs exactly one encoder evaluation") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(11);
  FlowPolicy policy = make_policy(cfg, rng);
  const Context ctx = tiny_context(cfg);

  CHECK(policy.encoder_calls.load() == 0);
  encode_context(policy, ctx);
  CHECK(policy.encoder_calls.load() == 1);
  sample_ode(policy, ctx, 5);
  CHECK(policy.encoder_calls.load() == 2);
  Rng srng(6);
  sample_sde(policy, ctx, srng);
  CHECK(policy.encoder_calls.load() == 3);
  Rng crng(7);
  cfm_loss(policy, ctx, sample_ode_with_latent(policy,
                                               encode_context(policy, ctx), 3),
           crng);
  CHECK(policy.encoder_calls.load() == 5);  // one explicit encode + the loss

  const FlowPolicy copy = policy;
  CHECK(copy.encoder_calls.load() == 5);
}

TEST_CASE("chunk conversions and world-frame unrolling") {
  ActionChunk chunk;
  chunk.waypoints = {{1.0, 0.0}, {0.0, 1.0}, {-0.5, 0.25}};
  const Eigen::VectorXd v = chunk_to_vector(chunk);
  REQUIRE(v.size() == 6);
  CHECK(v[0] == 1.0);
  CHECK(v[3] == 1.0);
  CHECK(v[4] == -0.5);
  const ActionChunk back = chunk_from_vector(v);
  REQUIRE(back.waypoints.size() == 3);
  CHECK(back.waypoints[2].y == 0.25);

  const Trajectory traj = chunk_to_world(chunk, {2.0, 3.0});
  CHECK(traj.kind == TrajectoryKind::kRollout);
  REQUIRE(traj.points.size() == 4);
  CHECK(traj.points[0].x == doctest::Approx(2.0));
  CHECK(traj.points[1].x == doctest::Approx(3.0));
  CHECK(traj.points[2].y == doctest::Approx(4.0));
  CHECK(traj.points[3].x == doctest::Approx(2.5));
  CHECK(traj.points[3].y == doctest::Approx(4.25));
}

TEST_CASE("flow-matching loss vanishes for the target-predicting network") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(21);
  FlowPolicy policy = make_policy(cfg, rng);
  const Context ctx = tiny_context(cfg);

  ActionChunk chunk;
  chunk.waypoints = {{0.4, 0.1}, {0.3, -0.2}, {0.2, 0.0}};
  const Eigen::VectorXd x1 = chunk_to_vector(chunk) / cfg.action_scale_m;

  // Replay the documented draw order (t first, then the noise point) to
  // know the target velocity ahead of the call.
  const std::uint64_t seed = 77;
  Rng replay(seed);
  (void)replay.uniform();
  Eigen::VectorXd x0(cfg.action_dim());
  for (int i = 0; i < x0.size(); ++i) x0[i] = replay.normal();

  mlp_scale(policy.velocity, 0.0);
  policy.velocity.b.back() = x1 - x0;

  Rng call(seed);
  CHECK(cfm_loss(policy, ctx, chunk, call) == 0.0);

  // Any other network has positive loss.
  Rng rng2(22);
  FlowPolicy other = make_policy(cfg, rng2);
  Rng call2(seed);
  CHECK(cfm_loss(other, ctx, chunk, call2) > 0.0);

  // Shape and finiteness validation.
  ActionChunk short_chunk;
  short_chunk.waypoints = {{0.1, 0.1}};
  Rng r3(1);
  CHECK_THROWS_AS(cfm_loss(policy, ctx, short_chunk, r3), ShapeMismatchError);
  ActionChunk bad = chunk;
  bad.waypoints[1].x = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(cfm_loss(policy, ctx, bad, r3), ValidationError);
  FlowPolicy broken = policy;
  broken.velocity.b.back()[0] = std::numeric_limits<double>::infinity();
  Rng r4(2);
  CHECK_THROWS_AS(cfm_loss(broken, ctx, chunk, r4), NonFiniteLossError);
}

TEST_CASE("flow-matching gradient matches finite differences") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(31);
  FlowPolicy policy = make_policy(cfg, rng);
  const Context ctx = tiny_context(cfg);
  ActionChunk chunk;
  chunk.waypoints = {{0.3, 0.05}, {0.25, -0.1}, {0.2, 0.15}};
  const std::uint64_t seed = 123;

  PolicyGrad grad = make_zero_grad(policy);
  Rng call(seed);
  cfm_loss(policy, ctx, chunk, call, &grad);
  const Eigen::VectorXd ga = oracles::policy_grad_vector(policy, grad);

  FlowPolicy probe = policy;
  const Eigen::VectorXd theta = oracles::policy_param_vector(policy);
  const Eigen::VectorXd fd = oracles::central_fd(
      [&](const Eigen::VectorXd& th) {
        oracles::set_policy_param_vector(probe, th);
        Rng r(seed);
        return cfm_loss(probe, ctx, chunk, r);
      },
      theta, 1e-5);

  REQUIRE(ga.size() == fd.size());
  double worst = 0.0;
  for (int i = 0; i < ga.size(); ++i) {
    const double err = std::abs(ga[i] - fd[i]) /
                       std::max({1.0, std::abs(ga[i]), std::abs(fd[i])});
    worst = std::max(worst, err);
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("ode sampling equals zero-noise sde sampling") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(41);
  const FlowPolicy policy = make_policy(cfg, rng);
  FlowPolicy quiet = policy;
  quiet.cfg.sigma = 0.0;
  const Context ctx = tiny_context(cfg);
  const Eigen::VectorXd z = encode_context(policy, ctx);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ActionChunk ode = sample_ode_with_latent(policy, z, seed);
    Rng srng(seed);
    const SdeSample sde = sample_sde_with_latent(quiet, z, srng);
    CHECK(sde.deterministic);
    CHECK(sde.step_logp.empty());
    REQUIRE(sde.chunk.waypoints.size() == ode.waypoints.size());
    for (std::size_t i = 0; i < ode.waypoints.size(); ++i) {
      CHECK(std::abs(ode.waypoints[i].x - sde.chunk.waypoints[i].x) <= 1e-12);
      CHECK(std::abs(ode.waypoints[i].y - sde.chunk.waypoints[i].y) <= 1e-12);
    }
  }

  Rng srng(3);
  const SdeSample det = sample_sde_with_latent(quiet, z, srng);
  CHECK_THROWS_AS(sde_step_logps(quiet, det, z), ValidationError);
}

TEST_CASE("sde sample densities recompute identically at fixed parameters") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(51);
  const FlowPolicy policy = make_policy(cfg, rng);
  const Context ctx = tiny_context(cfg);
  const Eigen::VectorXd z = encode_context(policy, ctx);

  Rng srng(9);
  const SdeSample sample = sample_sde_with_latent(policy, z, srng);
  CHECK_FALSE(sample.deterministic);
  REQUIRE(static_cast<int>(sample.states.size()) == cfg.flow_steps + 1);
  REQUIRE(static_cast<int>(sample.step_logp.size()) == cfg.flow_steps);

  std::vector<MlpCache> caches;
  std::vector<Eigen::VectorXd> mus;
  const std::vector<double> logps =
      sde_step_logps(policy, sample, z, &caches, &mus);
  REQUIRE(logps.size() == sample.step_logp.size());
  REQUIRE(caches.size() == sample.step_logp.size());
  REQUIRE(mus.size() == sample.step_logp.size());
  for (std::size_t k = 0; k < logps.size(); ++k) {
    CHECK(logps[k] == doctest::Approx(sample.step_logp[k]).epsilon(1e-9));
  }
}

TEST_CASE("checkpoints round trip and reject damage") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(61);
  const FlowPolicy policy = make_policy(cfg, rng);
  const auto path = temp_file("socnav_ckpt_test.json");
  save_checkpoint(policy, path.string(), 42, "cafebabe");

  const FlowPolicy loaded = load_checkpoint(path.string());
  CHECK(same(oracles::policy_param_vector(loaded),
             oracles::policy_param_vector(policy)));
  CHECK(loaded.cfg.latent_dim == cfg.latent_dim);
  CHECK(loaded.cfg.sigma == cfg.sigma);
  CHECK(loaded.cfg.encoder_hidden == cfg.encoder_hidden);

  // Byte-stable serialization: saving the loaded policy reproduces the file.
  const auto path2 = temp_file("socnav_ckpt_test2.json");
  save_checkpoint(loaded, path2.string(), 42, "cafebabe");
  std::ifstream f1(path), f2(path2);
  const std::string s1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(s1.find("\"format_version\"") != std::string::npos);

  CHECK_THROWS_AS(load_checkpoint(temp_file("socnav_no_such.json").string()),
                  MissingCheckpointError);

  const auto garbled = temp_file("socnav_ckpt_garbled.json");
  std::ofstream(garbled) << "{not json";
  CHECK_THROWS_AS(load_checkpoint(garbled.string()), VersionMismatchError);

  nlohmann::json j = load_json_file(path.string());
  j["format_version"] = 99;
  const auto wrong_ver = temp_file("socnav_ckpt_ver.json");
  save_json_file(wrong_ver.string(), j, -1);
  CHECK_THROWS_AS(load_checkpoint(wrong_ver.string()), VersionMismatchError);

  nlohmann::json j2 = load_json_file(path.string());
  j2["config"]["latent_dim"] = 999;  // shapes now disagree with the nets
  const auto bad_shape = temp_file("socnav_ckpt_shape.json");
  save_json_file(bad_shape.string(), j2, -1);
  CHECK_THROWS_AS(load_checkpoint(bad_shape.string()), VersionMismatchError);

  for (const auto& p : {path, path2, garbled, wrong_ver, bad_shape}) {
    std::error_code ec;
    std::filesystem::remove(p, ec);
  }
}

TEST_CASE("imitation training is deterministic and honors its knobs") {
  const PolicyConfig cfg = tiny_config();
  Rng rng(71);
  const FlowPolicy init = make_policy(cfg, rng);

  std::vector<IlExample> data;
  Rng drng(72);
  for (int i = 0; i < 8; ++i) {
    std::vector<Vec2> recent;
    const double x = 2.0 + i * 0.5;
    for (int h = 0; h < cfg.history_len; ++h) {
      recent.push_back({x + 0.2 * h, 3.0});
    }
    IlExample ex;
    ex.ctx = make_context(recent, {25.0, 3.0}, world().field, cfg);
    for (int k = 0; k < cfg.chunk_len; ++k) {
      ex.chunk.waypoints.push_back({0.25 + 0.01 * drng.normal(), 0.0});
    }
    data.push_back(std::move(ex));
  }

  SUBCASE("zero learning rate is an identity") {
    FlowPolicy p = init;
    IlConfig il;
    il.lr = 0.0;
    il.steps = 5;
    il.batch_size = 4;
    il.seed = 5;
    train_il(p, data, il);
    CHECK(same(oracles::policy_param_vector(p),
               oracles::policy_param_vector(init)));
  }

  SUBCASE("frozen encoder stays bitwise put while the velocity net moves") {
    FlowPolicy p = init;
    IlConfig il;
    il.lr = 1e-3;
    il.steps = 20;
    il.batch_size = 4;
    il.freeze_encoder = true;
    il.seed = 5;
    train_il(p, data, il);
    CHECK(same(mlp_param_vector(p.encoder), mlp_param_vector(init.encoder)));
    CHECK_FALSE(same(mlp_param_vector(p.velocity),
                     mlp_param_vector(init.velocity)));
  }

  SUBCASE("same seed reproduces the loss curve exactly") {
    FlowPolicy a = init, b = init;
    IlConfig il;
    il.lr = 1e-3;
    il.steps = 15;
    il.batch_size = 4;
    il.seed = 9;
    const IlResult ra = train_il(a, data, il);
    const IlResult rb = train_il(b, data, il);
    REQUIRE(ra.losses.size() == rb.losses.size());
    for (std::size_t i = 0; i < ra.losses.size(); ++i) {
      CHECK(ra.losses[i] == rb.losses[i]);
    }
    CHECK(same(oracles::policy_param_vector(a),
               oracles::policy_param_vector(b)));
  }

  SUBCASE("loss trends down on a learnable dataset") {
    FlowPolicy p = init;
    IlConfig il;
    il.lr = 5e-3;
    il.steps = 300;
    il.batch_size = 8;
    il.seed = 13;
    const IlResult r = train_il(p, data, il);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 20; ++i) {
      head += r.losses[i];
      tail += r.losses[r.losses.size() - 1 - i];
    }
    CHECK(tail < 0.7 * head);
  }

  SUBCASE("bad inputs are rejected") {
    FlowPolicy p = init;
    CHECK_THROWS_AS(train_il(p, {}, IlConfig{}), ValidationError);
    IlConfig il;
    il.batch_size = 0;
    CHECK_THROWS_AS(train_il(p, data, il), ValidationError);
  }

  SUBCASE("a runaway learning rate raises a divergence error") {
    FlowPolicy p = init;
    IlConfig il;
    il.lr = 1e14;
    il.steps = 50;
    il.batch_size = 4;
    il.seed = 3;
    CHECK_THROWS_AS(train_il(p, data, il), DivergedTrainingError);
  }
}

TEST_CASE("training examples slice histories and chunks correctly") {
  PolicyConfig cfg = tiny_config();
  cfg.history_len = 3;
  cfg.chunk_len = 2;

  Trajectory traj;
  traj.kind = TrajectoryKind::kStandard;
  for (int i = 0; i < 12; ++i) {
    traj.points.push_back({2.0 + 0.5 * i, 3.0});
  }
  traj.start = traj.points.front();
  traj.goal = traj.points.back();

  const auto ex = extract_examples(traj, world().field, cfg);
  REQUIRE(ex.size() == 10);  // anchors i = 0..9 leave a full chunk ahead

  // At the start the missing history is clamped to the first point.
  CHECK(ex[0].pos.x == doctest::Approx(2.0));
  CHECK(ex[0].ctx.history[0].norm() == doctest::Approx(0.0));
  CHECK(ex[0].ctx.history[1].norm() == doctest::Approx(0.0));
  CHECK(ex[0].chunk.waypoints.size() == 2);
  CHECK(ex[0].chunk.waypoints[0].x == doctest::Approx(0.5));
  CHECK(ex[0].chunk.waypoints[1].x == doctest::Approx(0.5));
  REQUIRE(ex[0].expert_segment.points.size() == 3);
  CHECK(ex[0].expert_segment.points[2].x == doctest::Approx(3.0));
  CHECK(ex[0].expert_segment.start.x == doctest::Approx(2.0));
  CHECK(ex[0].expert_segment.goal.x == doctest::Approx(traj.goal.x));

  // Mid-trajectory the history really is the trailing window.
  CHECK(ex[3].pos.x == doctest::Approx(3.5));
  CHECK(ex[3].ctx.history[0].x == doctest::Approx(-1.0));
  CHECK(ex[3].ctx.history[1].x == doctest::Approx(-0.5));
  CHECK(ex[3].ctx.history[2].norm() == doctest::Approx(0.0));

  const auto strided = extract_examples(traj, world().field, cfg, 4);
  REQUIRE(strided.size() == 3);  // anchors 0, 4, 8
  CHECK(strided[2].pos.x == doctest::Approx(6.0));

  CHECK_THROWS_AS(extract_examples(traj, world().field, cfg, 0),
                  ValidationError);

  Trajectory tiny;
  tiny.points = {{0.0, 0.0}, {1.0, 0.0}};
  CHECK(extract_examples(tiny, world().field, cfg).empty());
}
