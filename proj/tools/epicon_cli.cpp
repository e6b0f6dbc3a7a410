#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "epicon/learner.hpp"
#include "epicon/metrics.hpp"
#include "epicon/policy.hpp"
#include "epicon/rollout.hpp"
#include "epicon/scenario.hpp"
#include "epicon/sweep.hpp"
#include "epicon/trajectory.hpp"
#include "epicon/verification.hpp"

namespace fs = std::filesystem;
using namespace epicon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartialSweep = 3;

Scenario scenario_or_default(const std::string& path) {
  if (path.empty()) return make_outbreak_scenario();
  return load_scenario(path);
}

TrainConfig config_or_default(const std::string& path) {
  if (path.empty()) return TrainConfig{};
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open training config: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("training config " + path + " is not valid JSON: " +
                      e.what());
  }
  return train_config_from_json(j);
}

fs::path ensure_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// Rolls out, computes metrics, and writes the standard per-run artifacts:
// <stem>_trajectory.json, <stem>_metrics.json, <stem>_timeseries.csv, and —
// when the scenario defines the 2x2 tolerance grid — the type-analysis CSVs.
MetricReport write_run_outputs(const Trajectory& traj, const fs::path& dir,
                               const std::string& stem) {
  MetricReport rep = compute_metrics(traj);
  save_trajectory(traj, (dir / (stem + "_trajectory.json")).string());
  save_metrics(rep, (dir / (stem + "_metrics.json")).string());
  write_timeseries_csv(traj, (dir / (stem + "_timeseries.csv")).string());
  if (rep.types) {
    write_type_series_csv(rep, (dir / (stem + "_type_series.csv")).string());
    write_radar_csv(rep, (dir / (stem + "_radar.csv")).string());
  }
  return rep;
}

void print_headline(const MetricReport& rep) {
  std::printf("steps            : %d\n", rep.steps);
  std::printf("mean_global_reward: %.6g\n", rep.mean_global_reward);
  std::printf("mean_hospitalized: %.6g\n", rep.mean_hospitalized);
  std::printf("max_hospitalized : %.6g\n", rep.max_hospitalized);
  std::printf("mean_action      : %.4f\n", rep.mean_action);
}

struct SimulateArgs {
  std::string scenario, out = ".", policy;
  double p_fix = 0.5, h_th = 1.0, l_th = 168.0;
  unsigned long long seed = 0;
};

int run_simulate(const SimulateArgs& a) {
  Scenario sc = scenario_or_default(a.scenario);
  fs::path dir = ensure_dir(a.out);

  FixedPolicy fixed(a.policy == "fixed" ? a.p_fix : 1.0);
  ThresholdPolicy threshold(a.h_th, a.l_th);
  Policy* policy = nullptr;
  if (a.policy == "fixed") {
    policy = &fixed;
  } else {
    policy = &threshold;
  }

  std::vector<Policy*> agents{policy};
  Trajectory traj = run_episode(agents, sc, a.seed);
  MetricReport rep = write_run_outputs(traj, dir, "simulate");
  std::printf("policy           : %s\n", policy->describe().c_str());
  print_headline(rep);
  return kExitOk;
}

struct TrainArgs {
  std::string scenario, config, out = ".";
  double alpha = -1.0;  // negative = keep the config's value
  int episodes = -1, seeds = -1;
  long long base_seed = -1;
};

int run_train(const TrainArgs& a) {
  Scenario sc = scenario_or_default(a.scenario);
  TrainConfig cfg = config_or_default(a.config);
  if (a.alpha >= 0.0) cfg.mixing_weight = a.alpha;
  if (a.episodes >= 0) cfg.episodes = a.episodes;
  if (a.seeds > 0) cfg.seeds = a.seeds;
  if (a.base_seed >= 0) {
    cfg.base_seed = static_cast<unsigned long long>(a.base_seed);
  }
  cfg.validate();
  fs::path dir = ensure_dir(a.out);

  MixedObjectiveLearner learner(sc, cfg);
  TrainResult result = learner.train();
  save_policy_checkpoint(result, sc, (dir / "checkpoint.json").string());

  {
    std::ofstream curves(dir / "learning_curves.csv");
    curves << "seed,episode,global_return\n";
    char buf[96];
    for (const SeedOutcome& o : result.seeds) {
      for (std::size_t e = 0; e < o.episode_returns.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%d,%zu,%.17g\n", o.seed_index, e,
                      o.episode_returns[e]);
        curves << buf;
      }
    }
  }

  for (const SeedOutcome& o : result.seeds) {
    if (o.diverged) {
      std::printf("seed %d: diverged (%s)\n", o.seed_index,
                  o.diagnostic.c_str());
    } else {
      std::printf("seed %d: eval mean global reward %.6g\n", o.seed_index,
                  o.eval_mean_global_reward);
    }
  }
  std::printf("best seed        : %d\n", result.best_seed_index);

  LearnedPolicy policy(result.actors, sc,
                       "mixed(alpha=" + std::to_string(cfg.mixing_weight) + ")");
  std::vector<Policy*> agents{&policy};
  Trajectory traj =
      run_episode(agents, sc,
                  static_cast<unsigned long long>(result.best_seed_index));
  MetricReport rep = write_run_outputs(traj, dir, "eval");
  print_headline(rep);
  return kExitOk;
}

struct EvaluateArgs {
  std::string checkpoint, out = ".";
  unsigned long long seed = 0;
};

int run_evaluate(const EvaluateArgs& a) {
  LoadedCheckpoint loaded = load_policy_checkpoint(a.checkpoint);
  fs::path dir = ensure_dir(a.out);
  LearnedPolicy policy(loaded.actors, loaded.scenario, "mixed(checkpoint)");
  std::vector<Policy*> agents{&policy};
  Trajectory traj = run_episode(agents, loaded.scenario, a.seed);
  MetricReport rep = write_run_outputs(traj, dir, "eval");
  print_headline(rep);
  return kExitOk;
}

struct SweepArgs {
  std::string scenario, config, out = ".";
  std::vector<double> alphas;
  double p_fix = 0.5, h_th = 1.0, l_th = 168.0;
  unsigned long long seed = 0;
  bool reuse = false;
};

int run_sweep_cmd(const SweepArgs& a) {
  Scenario sc = scenario_or_default(a.scenario);
  TrainConfig cfg = config_or_default(a.config);
  fs::path dir = ensure_dir(a.out);

  // Each cell trains fresh unless --reuse finds its checkpoint on disk; every
  // fresh training run leaves one behind for the next invocation.
  CellTrainer trainer = [&](double alpha, const TrainConfig& cell_cfg) {
    fs::path path =
        dir / ("checkpoint_alpha_" + detail::format_value(alpha) + ".json");
    if (a.reuse && fs::exists(path)) {
      LoadedCheckpoint loaded = load_policy_checkpoint(path.string());
      if (scenario_to_json(loaded.scenario) != scenario_to_json(sc)) {
        throw ConfigError("checkpoint " + path.string() +
                          " was trained on a different scenario");
      }
      TrainResult reused;
      reused.config = loaded.config;
      reused.best_seed_index = loaded.best_seed_index;
      reused.actors = loaded.actors;
      return reused;
    }
    TrainResult fresh = MixedObjectiveLearner(sc, cell_cfg).train();
    save_policy_checkpoint(fresh, sc, path.string());
    return fresh;
  };

  SweepResult result =
      run_sweep(sc, cfg, a.alphas, a.p_fix, a.h_th, a.l_th, a.seed, trainer);

  std::ofstream json_out(dir / "sweep.json");
  json_out << sweep_to_json(result).dump(2) << "\n";
  write_sweep_csv(result, (dir / "sweep.csv").string());
  std::fputs(sweep_table_text(result).c_str(), stdout);

  if (result.any_failed()) {
    for (const SweepRow& r : result.rows) {
      if (r.failed) {
        std::fprintf(stderr, "cell %s %s failed: %s\n", r.model.c_str(),
                     r.parameter.c_str(), r.error.c_str());
      }
    }
    return kExitPartialSweep;
  }
  return kExitOk;
}

int run_oracle_check(int trials) {
  struct Check {
    const char* label;
    double worst;
    double tolerance;
  };
  Rng rng(20250814);
  std::vector<Check> checks;
  {
    Rng r = rng.fork("epidemic");
    checks.push_back({"epidemic step vs per-route reference",
                      verification::epidemic_step_vs_reference(r, trials, 3),
                      1e-12});
  }
  {
    Rng r = rng.fork("ledger");
    checks.push_back({"lockdown ledger vs direct discounted sum",
                      verification::ledger_recursion_vs_reference(r, trials,
                                                                  200),
                      1e-12});
  }
  {
    Rng r = rng.fork("critic");
    checks.push_back({"value-net gradients vs central differences",
                      verification::critic_gradient_vs_difference(r, 3, 12, 8),
                      1e-4});
  }
  {
    Rng r = rng.fork("actor");
    checks.push_back({"policy-net gradients vs central differences",
                      verification::actor_gradient_vs_difference(r, 3, 3, 4, 4,
                                                                 6),
                      1e-4});
  }

  bool all_ok = true;
  for (const Check& c : checks) {
    bool ok = c.worst <= c.tolerance;
    all_ok = all_ok && ok;
    std::printf("[%s] %s (worst %.3g, tolerance %.3g)\n", ok ? "PASS" : "FAIL",
                c.label, c.worst, c.tolerance);
  }
  return all_ok ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Epidemic border-control experiments: simulate baselines, "
               "train and evaluate admission policies, and sweep the reward "
               "mixing weight."};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Roll out a baseline policy");
  simulate->add_option("--scenario", sim.scenario,
                       "Scenario JSON (omit for the built-in outbreak)");
  simulate->add_option("--policy", sim.policy, "fixed or threshold")
      ->required()
      ->check(CLI::IsMember({"fixed", "threshold"}));
  simulate->add_option("--p-fix", sim.p_fix,
                       "Admission fraction for the fixed policy");
  simulate->add_option("--h-th", sim.h_th,
                       "Hospitalization threshold (people)");
  simulate->add_option("--l-th", sim.l_th, "Lockdown-penalty ceiling");
  simulate->add_option("--seed", sim.seed, "Episode seed");
  simulate->add_option("--out", sim.out, "Output directory");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand(
      "train", "Train admission policies and write a checkpoint");
  train->add_option("--scenario", tr.scenario,
                    "Scenario JSON (omit for the built-in outbreak)");
  train->add_option("--config", tr.config, "Training config JSON");
  train->add_option("--alpha", tr.alpha, "Reward mixing weight override");
  train->add_option("--episodes", tr.episodes, "Episode count override");
  train->add_option("--seeds", tr.seeds, "Training seed count override");
  train->add_option("--base-seed", tr.base_seed, "Base RNG seed override");
  train->add_option("--out", tr.out, "Output directory");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Evaluate a saved checkpoint and write metrics");
  evaluate->add_option("--checkpoint", ev.checkpoint, "Checkpoint JSON path")
      ->required();
  evaluate->add_option("--seed", ev.seed, "Episode seed");
  evaluate->add_option("--out", ev.out, "Output directory");

  SweepArgs sw;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Compare baselines against trained models across mixing "
               "weights");
  sweep->add_option("--scenario", sw.scenario,
                    "Scenario JSON (omit for the built-in outbreak)");
  sweep->add_option("--config", sw.config, "Training config JSON");
  sweep->add_option("--alphas", sw.alphas,
                    "Mixing weights to train (comma separated or repeated)")
      ->delimiter(',');
  sweep->add_option("--p-fix", sw.p_fix, "Fixed-baseline admission fraction");
  sweep->add_option("--h-th", sw.h_th,
                    "Threshold-baseline hospitalization threshold");
  sweep->add_option("--l-th", sw.l_th,
                    "Threshold-baseline lockdown-penalty ceiling");
  sweep->add_option("--seed", sw.seed, "Evaluation episode seed");
  sweep->add_flag("--reuse", sw.reuse,
                  "Reuse per-alpha checkpoints found in the output directory");
  sweep->add_option("--out", sw.out, "Output directory");

  int oracle_trials = 200;
  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Run the brute-force equivalence suites");
  oracle->add_option("--trials", oracle_trials,
                     "Random instances per suite")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n"
              << "run '" << argv[0] << " --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*train) return run_train(tr);
    if (*evaluate) return run_evaluate(ev);
    if (*sweep) return run_sweep_cmd(sw);
    if (*oracle) return run_oracle_check(oracle_trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
