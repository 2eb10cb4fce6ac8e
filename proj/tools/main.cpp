#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "avlab/checkpoint.hpp"
#include "avlab/errors.hpp"
#include "avlab/metrics.hpp"
#include "avlab/ppo.hpp"
#include "avlab/scenario.hpp"
#include "avlab/solver.hpp"
#include "avlab/traffic_env.hpp"

namespace fs = std::filesystem;
using namespace avlab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIntegrity = 3;
constexpr int kExitIo = 4;

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out + ": " + ec.message());
}

void refuse_existing_checkpoints(const std::string& out, bool force) {
  if (force || !fs::exists(out)) return;
  for (const auto& entry : fs::directory_iterator(out)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("checkpoint", 0) == 0)
      throw IoError("output directory " + out +
                    " already holds checkpoints; pass --force to overwrite");
  }
}

SpeedSchedule parse_schedule(const std::string& spec, const FlowParams& flow) {
  if (spec.rfind("file:", 0) == 0) {
    const std::string path = spec.substr(5);
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schedule file: " + path);
    std::vector<std::pair<double, double>> knots;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      double t, v;
      char sep;
      if (!(ls >> t)) throw ConfigError("schedule line not parseable: " + line);
      ls >> std::ws;
      if (ls.peek() == ',') ls >> sep;
      if (!(ls >> v)) throw ConfigError("schedule line not parseable: " + line);
      knots.emplace_back(t, v);
    }
    if (knots.empty()) throw ConfigError("schedule file is empty: " + path);
    if (!std::is_sorted(knots.begin(), knots.end(),
                        [](auto& a, auto& b) { return a.first < b.first; }))
      throw ConfigError("schedule times must be non-decreasing");
    return [knots](double t) {
      double v = knots.front().second;
      for (const auto& [tk, vk] : knots) {
        if (tk <= t) v = vk;
        else break;
      }
      return v;
    };
  }
  try {
    const double v = std::stod(spec);
    if (!(v >= 0.0 && v <= flow.v_max))
      throw ConfigError("schedule speed must lie in [0, v_max]");
    return [v](double) { return v; };
  } catch (const std::invalid_argument&) {
    throw ConfigError("schedule must be a constant speed or file:<path>");
  }
}

std::string curve_to_csv(const std::vector<double>& curve) {
  std::ostringstream os;
  os << "iteration,mean_return\n";
  char buf[32];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g", curve[i]);
    os << i << "," << buf << "\n";
  }
  return os.str();
}

int cmd_simulate(const std::string& config_path, const std::string& schedule_spec,
                 const std::string& out, std::uint64_t seed) {
  (void)seed;  // the open-loop simulator has no random element
  ScenarioConfig config = load_config(config_path);
  auto [state, av, grid, flow] = build(config);
  if (!(config.horizon > 0.0)) throw ConfigError("episode.horizon must be > 0");

  SpeedSchedule schedule = parse_schedule(schedule_spec, flow);
  MetricsAccumulator acc;
  StepDiagnostics diag;
  RunOptions options;
  options.cfl = config.cfl;
  // Step exactly like the episodic environment so constant-schedule runs
  // reproduce the evaluation metrics.
  const double dt_max = cfl_timestep(grid, flow, config.cfl);
  const int substeps = std::max(1, static_cast<int>(std::ceil(config.dt_ctrl / dt_max - 1e-12)));
  options.fixed_dt = config.dt_ctrl / substeps;
  options.snapshot_stride = substeps;
  options.observer = [&](const TrafficState& s, const AvState& a) {
    acc.add_step(s, a, flow);
    acc.add_reward(reward(s, a, config.weights, flow) / substeps);
  };
  options.diagnostics = &diag;

  Trace trace = run(std::move(state), av, grid, flow, config.horizon, schedule, options);
  if (trace.states.size() < 2) throw ConfigError("zero-horizon run produced an empty trace");

  ensure_out_dir(out);
  export_time_space(trace, out + "/time_space.csv");

  AggregateMetrics agg;
  agg.mean = acc.finalize();
  agg.n_episodes = 1;
  write_text_file(out + "/metrics.json", metrics_to_json(agg));
  write_text_file(out + "/metrics.txt", metrics_table({{"simulate", agg}}));
  std::cout << metrics_table({{"simulate", agg}});
  return 0;
}

Hyperparams apply_overrides(Hyperparams hp, int iterations, bool sequential,
                            int workers) {
  if (iterations >= 0) hp.iterations = iterations;
  if (workers > 0) hp.n_workers = workers;
  if (sequential) hp.n_workers = 1;
  return hp;
}

int cmd_train(const std::string& config_path, const std::string& out,
              std::uint64_t seed, int iterations, bool sequential, int workers,
              bool force) {
  ScenarioConfig config = load_config(config_path);
  Hyperparams hp = apply_overrides(Hyperparams{}, iterations, sequential, workers);
  validate(hp);

  ensure_out_dir(out);
  refuse_existing_checkpoints(out, force);

  TrafficEnv probe(config);
  const int obs_dim = probe.obs_dim();
  Rng init_rng(mix_seed(seed, 0x1417u));
  GaussianPolicy policy(obs_dim, {64, 64}, init_rng);
  ValueFunction value(obs_dim, {64, 64}, init_rng);

  EnvFactory factory = [config] { return std::make_unique<TrafficEnv>(config); };

  Rng master(seed);
  TrainCallbacks callbacks;
  callbacks.on_iteration = [&](int iter, double mean_return, const UpdateStats& stats) {
    Checkpoint ckpt = make_checkpoint(policy, value, hp, seed, iter + 1,
                                      master.serialize());
    save_checkpoint(ckpt, out + "/checkpoint_latest.json");
    if ((iter + 1) % 50 == 0 || iter + 1 == hp.iterations) {
      char name[64];
      std::snprintf(name, sizeof name, "/checkpoint_%05d.json", iter + 1);
      save_checkpoint(ckpt, out + name);
    }
    if ((iter + 1) % 10 == 0 || iter == 0)
      std::cout << "iter " << iter + 1 << "/" << hp.iterations << " return "
                << mean_return << " critic_loss " << stats.critic_loss << "\n";
  };

  TrainResult result = train(factory, policy, value, hp, seed, callbacks);

  Checkpoint final_ckpt =
      make_checkpoint(policy, value, hp, seed, hp.iterations, master.serialize());
  save_checkpoint(final_ckpt, out + "/checkpoint_final.json");
  write_text_file(out + "/learning_curve.csv", curve_to_csv(result.learning_curve));

  // Final summary: curve statistics plus the no-control reference.
  nlohmann::json summary;
  if (result.learning_curve.size() >= 10) {
    const auto lcs = learning_curve_summary(result.learning_curve);
    summary["curve"] = {{"first_window_return", lcs.baseline_return},
                        {"best_smoothed_return", lcs.best_smoothed_return},
                        {"improvement_fraction", lcs.improvement_fraction}};
  }
  EvalRecord baseline = evaluate(config, constant_controller(1.0), 1, seed);
  summary["no_control_return"] = baseline.metrics.mean.episode_return;
  if (!result.learning_curve.empty()) {
    const int k = std::min<std::size_t>(10, result.learning_curve.size());
    double tail = 0.0;
    for (int i = 0; i < k; ++i)
      tail += result.learning_curve[result.learning_curve.size() - 1 - i];
    summary["final_10_mean_return"] = tail / k;
  }
  write_text_file(out + "/summary.json", summary.dump(1) + "\n");
  return 0;
}

AggregateMetrics eval_checkpoint(const std::string& ckpt_path,
                                 const ScenarioConfig& config, EvalMode mode,
                                 int n_episodes, std::uint64_t seed) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  auto [policy, value] = restore_networks(ckpt);
  (void)value;
  TrafficEnv probe(config);
  if (probe.obs_dim() != ckpt.obs_dim)
    throw ConfigError("checkpoint observation size does not match the scenario");
  EvalRecord record =
      evaluate(config, policy_controller(*policy, mode), n_episodes, seed);
  return record.metrics;
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path,
             const std::string& out, bool deterministic, int n_episodes,
             std::uint64_t seed) {
  ScenarioConfig config = load_config(config_path);
  const EvalMode mode = deterministic ? EvalMode::Deterministic : EvalMode::Stochastic;
  AggregateMetrics metrics = eval_checkpoint(ckpt_path, config, mode, n_episodes, seed);
  ensure_out_dir(out);
  write_text_file(out + "/eval_metrics.json", metrics_to_json(metrics));
  const std::string label = deterministic ? "deterministic" : "stochastic";
  write_text_file(out + "/eval_metrics.txt", metrics_table({{label, metrics}}));
  std::cout << metrics_table({{label, metrics}});
  return 0;
}

int cmd_compare(const std::vector<std::string>& ckpt_paths,
                const std::string& config_path, const std::string& out,
                bool deterministic, int n_episodes, std::uint64_t seed) {
  ScenarioConfig config = load_config(config_path);
  const EvalMode mode = deterministic ? EvalMode::Deterministic : EvalMode::Stochastic;

  std::vector<std::pair<std::string, AggregateMetrics>> rows;
  EvalRecord baseline = evaluate(config, constant_controller(1.0), n_episodes, seed);
  rows.emplace_back("no_control", baseline.metrics);
  for (const auto& path : ckpt_paths)
    rows.emplace_back(fs::path(path).stem().string(),
                      eval_checkpoint(path, config, mode, n_episodes, seed));

  ensure_out_dir(out);
  nlohmann::json j;
  for (const auto& [label, metrics] : rows)
    j[label] = nlohmann::json::parse(metrics_to_json(metrics));
  write_text_file(out + "/compare.json", j.dump(1) + "\n");
  write_text_file(out + "/compare.txt", metrics_table(rows));
  std::cout << metrics_table(rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-autonomy traffic lab: coupled PDE-ODE solver with a PPO speed controller"};
  app.require_subcommand(1);

  std::string config_path, out = "out", schedule = "1.0", ckpt_path;
  std::vector<std::string> ckpt_paths;
  std::uint64_t seed = 0;
  int iterations = -1, n_episodes = 5, workers = 0;
  bool deterministic = false, sequential = false, force = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config file")->required();
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed, "master random seed");
  };

  CLI::App* sim = app.add_subcommand("simulate", "open-loop run under a speed schedule");
  add_common(sim);
  sim->add_option("--schedule", schedule,
                  "constant commanded speed or file:<path> with 't v' rows");

  CLI::App* tr = app.add_subcommand("train", "train the PPO speed controller");
  add_common(tr);
  tr->add_option("--iterations", iterations, "training iterations");
  tr->add_option("--workers", workers, "rollout worker threads");
  tr->add_flag("--sequential", sequential, "force single-threaded rollouts");
  tr->add_flag("--force", force, "overwrite existing checkpoints");

  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(ev);
  ev->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  ev->add_option("--episodes", n_episodes, "evaluation episodes");
  ev->add_flag("--deterministic", deterministic, "use the distribution mean");
  ev->add_flag("--sequential", sequential, "kept for interface symmetry");

  CLI::App* cp = app.add_subcommand("compare", "metrics table for checkpoints + baseline");
  add_common(cp);
  cp->add_option("--checkpoints", ckpt_paths, "checkpoint files");
  cp->add_option("--episodes", n_episodes, "evaluation episodes");
  cp->add_flag("--deterministic", deterministic, "use the distribution mean");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, schedule, out, seed);
    if (tr->parsed())
      return cmd_train(config_path, out, seed, iterations, sequential, workers, force);
    if (ev->parsed())
      return cmd_eval(ckpt_path, config_path, out, deterministic, n_episodes, seed);
    if (cp->parsed())
      return cmd_compare(ckpt_paths, config_path, out, deterministic, n_episodes, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
