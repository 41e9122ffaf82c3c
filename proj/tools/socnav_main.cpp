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

// Command-line front end: data synthesis, training, evaluation, and report
// aggregation, all driven by one JSON run config.
//
// Exit codes: 0 success; 2 for configuration, input, or checkpoint problems
// (bad config file, unreadable scene, missing or incompatible checkpoint,
// invalid parameter values); 1 for any other runtime failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "socnav/socnav.hpp"

namespace fs = std::filesystem;

namespace {

using namespace socnav;

// Paths named inside the config file resolve relative to the config file's
// directory, so a run is invocable from anywhere.
std::string resolve_from(const fs::path& base, const std::string& path) {
  if (path.empty()) return path;
  fs::path p(path);
  if (p.is_absolute()) return p.string();
  return (base / p).string();
}

struct RunContext {
  RunConfig cfg;
  std::string hash;
  fs::path config_dir;
  fs::path out_dir;
  SemanticGrid grid;
  DistanceField field;
  RoadNetwork net;
};

// Loads the run config, applies command-line overrides, re-stamps the seed
// into the stage sub-configs, and (optionally) loads the scene files.
RunContext load_run(const std::string& config_path,
                    const std::optional<std::uint64_t>& seed_override,
                    const std::string& out_override, bool need_scene) {
  RunContext rc;
  rc.cfg = load_run_config(config_path);
  rc.config_dir = fs::path(config_path).parent_path();
  if (seed_override) {
    rc.cfg.seed = *seed_override;
    rc.cfg.grpo.seed = *seed_override;
    rc.cfg.il.seed = *seed_override;
    rc.cfg.bench.seed = *seed_override;
  }
  rc.hash = config_hash(rc.cfg);
  rc.out_dir = out_override.empty()
                   ? fs::path(resolve_from(rc.config_dir, rc.cfg.out_dir))
                   : fs::path(out_override);
  if (need_scene) {
    if (rc.cfg.scenario_path.empty()) {
      throw ConfigError("config: 'scenario' path is required");
    }
    if (rc.cfg.network_path.empty()) {
      throw ConfigError("config: 'network' path is required");
    }
    rc.grid = load_scenario(resolve_from(rc.config_dir, rc.cfg.scenario_path));
    rc.field = distance_transform(rc.grid);
    rc.net = load_network(resolve_from(rc.config_dir, rc.cfg.network_path),
                          rc.grid);
  }
  return rc;
}

std::string artifact_comment(const RunContext& rc) {
  return "# config_hash=" + rc.hash + " seed=" + std::to_string(rc.cfg.seed) +
         "\n";
}

// ---------------------------------------------------------------------------
// gen-data: synthesize the expert trajectory corpus.
// ---------------------------------------------------------------------------

void cmd_gen_data(const RunContext& rc) {
  fs::create_directories(rc.out_dir);
  Rng rng(derive_seed(rc.cfg.seed, "data"));
  std::ostringstream lines;
  int n_standard = 0, n_recovery = 0;
  for (int i = 0; i < rc.cfg.data.n_standard; ++i) {
    const Trajectory t =
        sample_standard_trajectory(rc.net, rng, rc.cfg.data.standard);
    lines << trajectory_to_json(t).dump() << "\n";
    ++n_standard;
  }
  for (int i = 0; i < rc.cfg.data.n_recovery; ++i) {
    const Trajectory base =
        sample_standard_trajectory(rc.net, rng, rc.cfg.data.standard);
    const Trajectory rec = sample_recovery_trajectory(
        base, rc.grid, rc.field, rng, rc.cfg.data.recovery);
    lines << trajectory_to_json(rec).dump() << "\n";
    ++n_recovery;
  }
  write_text_file((rc.out_dir / "trajectories.jsonl").string(), lines.str());
  save_json_file((rc.out_dir / "dataset_meta.json").string(),
                 {{"config_hash", rc.hash},
                  {"seed", rc.cfg.seed},
                  {"n_standard", n_standard},
                  {"n_recovery", n_recovery}});
  std::cout << "wrote " << (n_standard + n_recovery) << " trajectories to "
            << (rc.out_dir / "trajectories.jsonl").string() << "\n";
}

// ---------------------------------------------------------------------------
// train: imitation pretraining, frozen-encoder refinement, or RL.
// ---------------------------------------------------------------------------

std::vector<Trajectory> load_trajectories(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<Trajectory> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(trajectory_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw ValidationError(path + ": no trajectories");
  return out;
}

void write_loss_curve(const RunContext& rc, const fs::path& path,
                      const std::vector<double>& losses) {
  std::ostringstream csv;
  csv << artifact_comment(rc) << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    csv << i << "," << detail::fmt_g(losses[i]) << "\n";
  }
  write_text_file(path.string(), csv.str());
}

void write_grpo_curve(const RunContext& rc, const fs::path& path,
                      const std::vector<GrpoCurveRow>& curve) {
  std::ostringstream csv;
  csv << artifact_comment(rc)
      << "iteration,mean_total,mean_social,mean_expert,mean_smooth,"
         "mean_efficiency,mean_clearance_m,surrogate\n";
  for (const auto& row : curve) {
    csv << row.iteration << "," << detail::fmt_g(row.mean_total) << ","
        << detail::fmt_g(row.mean_social) << ","
        << detail::fmt_g(row.mean_expert) << ","
        << detail::fmt_g(row.mean_smooth) << ","
        << detail::fmt_g(row.mean_efficiency) << ","
        << detail::fmt_g(row.mean_clearance_m) << ","
        << detail::fmt_g(row.surrogate) << "\n";
  }
  write_text_file(path.string(), csv.str());
}

void cmd_train(const RunContext& rc, const std::string& stage,
               const std::string& checkpoint_path,
               const std::string& data_path) {
  fs::create_directories(rc.out_dir);
  const std::string data_file =
      data_path.empty() ? (rc.out_dir / "trajectories.jsonl").string()
                        : data_path;
  const std::vector<Trajectory> trajectories = load_trajectories(data_file);

  FlowPolicy policy;
  if (stage == "il") {
    Rng init_rng(derive_seed(rc.cfg.seed, "init"));
    policy = make_policy(rc.cfg.policy, init_rng);
  } else {
    if (checkpoint_path.empty()) {
      throw ConfigError("train --stage " + stage + " requires --checkpoint");
    }
    policy = load_checkpoint(checkpoint_path);
  }

  if (stage == "il" || stage == "finetune") {
    std::vector<IlExample> dataset;
    for (const Trajectory& t : trajectories) {
      for (auto& ex : extract_examples(t, rc.field, policy.cfg,
                                       rc.cfg.data.example_stride)) {
        dataset.push_back({std::move(ex.ctx), std::move(ex.chunk)});
      }
    }
    if (dataset.empty()) {
      throw ValidationError("train: no usable examples in " + data_file);
    }
    IlConfig il = rc.cfg.il;
    il.freeze_encoder = (stage == "finetune");
    const IlResult result = train_il(policy, dataset, il);
    write_loss_curve(rc, rc.out_dir / ("train_curve_" + stage + ".csv"),
                     result.losses);
    const double last = result.losses.empty() ? 0.0 : result.losses.back();
    std::cout << "trained " << stage << " on " << dataset.size()
              << " examples; final loss " << detail::fmt_g(last) << "\n";
  } else {  // grpo
    std::vector<GrpoTask> tasks;
    for (const Trajectory& t : trajectories) {
      for (const auto& ex : extract_examples(t, rc.field, policy.cfg,
                                             rc.cfg.data.example_stride)) {
        tasks.push_back(task_from_example(ex));
      }
    }
    if (tasks.empty()) {
      throw ValidationError("train: no usable tasks in " + data_file);
    }
    const auto curve = train_safe_grpo(policy, tasks, rc.field, rc.cfg.grpo);
    write_grpo_curve(rc, rc.out_dir / "grpo_curve.csv", curve);
    const double last = curve.empty() ? 0.0 : curve.back().mean_total;
    std::cout << "ran " << curve.size() << " rl iterations on " << tasks.size()
              << " tasks; final mean reward " << detail::fmt_g(last) << "\n";
  }

  const fs::path ckpt = rc.out_dir / ("checkpoint_" + stage + ".json");
  save_checkpoint(policy, ckpt.string(), rc.cfg.seed, rc.hash);
  std::cout << "saved checkpoint " << ckpt.string() << "\n";
}

// ---------------------------------------------------------------------------
// eval: closed-loop benchmark episodes or open-loop imitation error.
// ---------------------------------------------------------------------------

void cmd_eval(const RunContext& rc, const std::string& checkpoint_path,
              bool open_loop, int scenes) {
  if (checkpoint_path.empty()) {
    throw ConfigError("eval requires --checkpoint");
  }
  const FlowPolicy policy = load_checkpoint(checkpoint_path);
  fs::create_directories(rc.out_dir);

  if (open_loop) {
    // Sample fresh reference trajectories and compare one-chunk predictions
    // against the expert displacement sequences.
    Rng rng(derive_seed(rc.cfg.seed, "openloop"));
    std::vector<std::vector<Vec2>> pred, ref;
    for (int s = 0; s < scenes; ++s) {
      const Trajectory traj =
          sample_standard_trajectory(rc.net, rng, rc.cfg.data.standard);
      for (const auto& ex : extract_examples(traj, rc.field, policy.cfg,
                                             rc.cfg.data.example_stride)) {
        const ActionChunk chunk = sample_ode(policy, ex.ctx, rng.next_u64());
        pred.push_back(chunk_to_world(chunk, ex.pos).points);
        ref.push_back(ex.expert_segment.points);
      }
    }
    if (pred.empty()) {
      throw ValidationError("eval: open-loop sampling produced no examples");
    }
    std::ostringstream csv;
    csv << artifact_comment(rc) << "sample,maoe_rad\n";
    for (std::size_t i = 0; i < pred.size(); ++i) {
      csv << i << "," << detail::fmt_g(maoe({pred[i]}, {ref[i]})) << "\n";
    }
    write_text_file((rc.out_dir / "open_loop.csv").string(), csv.str());
    const double mean_maoe = maoe(pred, ref);
    save_json_file((rc.out_dir / "open_loop.json").string(),
                   {{"config_hash", rc.hash},
                    {"seed", rc.cfg.seed},
                    {"n_samples", pred.size()},
                    {"maoe_rad", mean_maoe}});
    std::cout << "open-loop heading error over " << pred.size()
              << " samples: " << detail::fmt_g(mean_maoe) << " rad\n";
    return;
  }

  BenchmarkConfig bench = rc.cfg.bench;
  if (scenes > 0) bench.pairs_per_bucket = scenes;
  const BenchmarkResult result =
      run_benchmark(policy, rc.grid, rc.net, rc.field, bench);
  emit_report(result.episodes, rc.grid, rc.out_dir.string(), rc.hash,
              rc.cfg.seed);
  std::cout << "episodes " << result.report.n_episodes << "  sr "
            << detail::fmt_g(result.report.sr) << "  rc "
            << detail::fmt_g(result.report.rc) << "  spl "
            << detail::fmt_g(result.report.spl) << "  dcr "
            << detail::fmt_g(result.report.dcr) << "  tcr "
            << detail::fmt_g(result.report.tcr) << "\n";
  std::cout << "report written to " << rc.out_dir.string() << "\n";
}

// ---------------------------------------------------------------------------
// report: aggregate metrics.json files from previous eval runs.
// ---------------------------------------------------------------------------

void cmd_report(const std::vector<std::string>& runs,
                const std::string& csv_out) {
  std::ostringstream table, csv;
  table << "run\tconfig_hash\tn\tsr\trc\tspl\tdcr\ttcr\tmaoe_rad\n";
  csv << "run,config_hash,n,sr,rc,spl,dcr,tcr,maoe_rad\n";
  for (const std::string& dir : runs) {
    const nlohmann::json j =
        load_json_file((fs::path(dir) / "metrics.json").string());
    const auto num = [&](const char* key) -> std::string {
      return j.at(key).is_null() ? "nan"
                                 : detail::fmt_g(j.at(key).get<double>());
    };
    const std::string row_tail = j.at("config_hash").get<std::string>() +
                                 "\t" +
                                 std::to_string(j.at("n_episodes").get<int>()) +
                                 "\t" + num("sr") + "\t" + num("rc") + "\t" +
                                 num("spl") + "\t" + num("dcr") + "\t" +
                                 num("tcr") + "\t" + num("maoe_rad");
    table << dir << "\t" << row_tail << "\n";
    std::string csv_tail = row_tail;
    for (char& c : csv_tail) {
      if (c == '\t') c = ',';
    }
    csv << dir << "," << csv_tail << "\n";
  }
  std::cout << table.str();
  if (!csv_out.empty()) write_text_file(csv_out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Socially-aware navigation toolkit"};
  app.set_version_flag("--version", "socnav 0.1.0");
  app.require_subcommand(1);

  std::string config_path, out_override, checkpoint_path, data_path, csv_out;
  std::string stage = "il";
  std::optional<std::uint64_t> seed_override;
  bool open_loop = false;
  int scenes = 0;
  std::vector<std::string> runs;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run config JSON file")
        ->required();
    sub->add_option("--seed", seed_override,
                    "Override the seed recorded in the config");
    sub->add_option("--out", out_override,
                    "Output directory (default: out_dir from the config, "
                    "relative to the config file)");
  };

  CLI::App* gen = app.add_subcommand(
      "gen-data", "Synthesize the expert trajectory corpus");
  add_common(gen);

  CLI::App* train =
      app.add_subcommand("train", "Train the waypoint policy");
  add_common(train);
  train->add_option("--stage", stage, "il, finetune, or grpo")
      ->required()
      ->check(CLI::IsMember({"il", "finetune", "grpo"}));
  train->add_option("--checkpoint", checkpoint_path,
                    "Checkpoint to continue from (finetune and grpo)");
  train->add_option("--data", data_path,
                    "Trajectory JSONL (default: <out>/trajectories.jsonl)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint to evaluate");
  eval->add_flag("--open-loop", open_loop,
                 "Open-loop heading error instead of closed-loop episodes");
  eval->add_option("--scenes", scenes,
                   "Episode pairs per bucket (closed loop) or reference "
                   "trajectories (open loop)");

  CLI::App* report =
      app.add_subcommand("report", "Tabulate metrics from eval output dirs");
  report->add_option("--runs", runs, "Eval output directories")
      ->required()
      ->expected(-1);
  report->add_option("--csv", csv_out, "Also write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      cmd_gen_data(load_run(config_path, seed_override, out_override, true));
    } else if (train->parsed()) {
      cmd_train(load_run(config_path, seed_override, out_override, true),
                stage, checkpoint_path, data_path);
    } else if (eval->parsed()) {
      if (scenes == 0 && open_loop) scenes = 10;
      cmd_eval(load_run(config_path, seed_override, out_override, true),
               checkpoint_path, open_loop, scenes);
    } else if (report->parsed()) {
      cmd_report(runs, csv_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const MissingCheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const VersionMismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
