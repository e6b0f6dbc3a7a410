#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "epicon/learner.hpp"
#include "epicon/scenario.hpp"
#include "json.hpp"

// End-to-end checks against the installed command-line binary: exit codes,
// emitted files, and run-to-run determinism of the serialized metrics.

namespace {

using namespace epicon;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  std::string log = testing::TempDir() + "cli_log.txt";
  std::string cmd =
      std::string(EPICON_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  EXPECT_TRUE(f.good()) << "missing file: " << path;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Scenario duo_scenario() {
  Scenario sc;
  sc.horizon = 24;
  sc.action_period = 4;
  sc.ledger_discount = 0.9;
  EpidemicRates rates{0.25, 0.25, 0.08, 0.1};
  CostProfile pa{1000.0, 2.0, 1.0, false};
  CostProfile pb{500.0, 1.0, 1.0, false};
  sc.regions.push_back({"a", 100000.0, 200.0, 0.0, 0.0, rates, pa});
  sc.regions.push_back({"b", 100000.0, 0.0, 0.0, 0.0, rates, pb});
  sc.demand = MobilityMatrix::uniform(2, 50.0);
  sc.validate();
  return sc;
}

std::string write_duo_scenario() {
  std::string path = testing::TempDir() + "cli_duo_scenario.json";
  std::ofstream f(path);
  f << scenario_to_json(duo_scenario()).dump(2) << "\n";
  return path;
}

std::string write_tiny_train_config() {
  TrainConfig cfg;
  cfg.episodes = 2;
  cfg.seeds = 1;
  cfg.discount = 0.9;
  cfg.actor_lr = 1e-3;
  cfg.critic_lr = 1e-3;
  cfg.tau = 0.05;
  cfg.batch_size = 8;
  cfg.replay_capacity = 1000;
  cfg.warmup_transitions = 8;
  cfg.encode_dim = 4;
  cfg.head_hidden = 6;
  cfg.critic_hidden = 8;
  cfg.base_seed = 11;
  std::string path = testing::TempDir() + "cli_tiny_config.json";
  std::ofstream f(path);
  f << train_config_to_json(cfg).dump(2) << "\n";
  return path;
}

TEST(Cli, SimulateWritesMetricsAndRecoversTheFixedDial) {
  std::string scenario = write_duo_scenario();
  std::string out = testing::TempDir() + "cli_sim";
  RunResult r = run_cli("simulate --scenario " + scenario +
                        " --policy fixed --p-fix 0.5 --seed 3 --out " + out);
  ASSERT_EQ(r.exit_code, 0) << r.output;

  nlohmann::json metrics =
      nlohmann::json::parse(slurp(out + "/simulate_metrics.json"));
  EXPECT_EQ(metrics.at("kind"), "metrics");
  EXPECT_EQ(metrics.at("mean_action").get<double>(), 0.5);
  EXPECT_TRUE(std::ifstream(out + "/simulate_trajectory.json").good());
  EXPECT_TRUE(std::ifstream(out + "/simulate_timeseries.csv").good());
}

TEST(Cli, UsageErrorsExitWithOne) {
  EXPECT_EQ(run_cli("simulate --policy fixed --no-such-flag").exit_code, 1);
  EXPECT_EQ(run_cli("simulate").exit_code, 1);       // missing --policy
  EXPECT_EQ(run_cli("").exit_code, 1);               // missing subcommand
  EXPECT_EQ(run_cli("--help").exit_code, 0);         // help is not an error
  EXPECT_EQ(run_cli("simulate --policy banana").exit_code, 1);
}

TEST(Cli, RuntimeFailuresExitWithTwo) {
  RunResult r = run_cli("evaluate --checkpoint /no/such/checkpoint.json");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("error:"), std::string::npos);

  RunResult bad = run_cli("simulate --policy fixed --scenario /no/such.json");
  EXPECT_EQ(bad.exit_code, 2);
}

TEST(Cli, TrainEvaluateRoundTripIsDeterministic) {
  std::string scenario = write_duo_scenario();
  std::string config = write_tiny_train_config();
  std::string out_a = testing::TempDir() + "cli_train_a";
  std::string out_b = testing::TempDir() + "cli_train_b";

  std::string args = "train --scenario " + scenario + " --config " + config;
  ASSERT_EQ(run_cli(args + " --out " + out_a).exit_code, 0);
  ASSERT_EQ(run_cli(args + " --out " + out_b).exit_code, 0);

  // Same inputs, same seeds: byte-identical checkpoints and metrics.
  EXPECT_EQ(slurp(out_a + "/checkpoint.json"),
            slurp(out_b + "/checkpoint.json"));
  EXPECT_EQ(slurp(out_a + "/eval_metrics.json"),
            slurp(out_b + "/eval_metrics.json"));
  EXPECT_EQ(slurp(out_a + "/learning_curves.csv"),
            slurp(out_b + "/learning_curves.csv"));

  std::string out_eval = testing::TempDir() + "cli_eval";
  RunResult ev = run_cli("evaluate --checkpoint " + out_a +
                         "/checkpoint.json --seed 0 --out " + out_eval);
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  EXPECT_TRUE(std::ifstream(out_eval + "/eval_metrics.json").good());
}

TEST(Cli, SweepWritesTableJsonAndCsv) {
  std::string scenario = write_duo_scenario();
  std::string out = testing::TempDir() + "cli_sweep";
  RunResult r = run_cli("sweep --scenario " + scenario +
                        " --p-fix 0.5 --h-th 400 --l-th 4 --out " + out);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("fixed"), std::string::npos);
  EXPECT_NE(r.output.find("threshold"), std::string::npos);

  nlohmann::json j = nlohmann::json::parse(slurp(out + "/sweep.json"));
  ASSERT_EQ(j.at("rows").size(), 2u);  // --alphas omitted: baselines only
  EXPECT_TRUE(std::ifstream(out + "/sweep.csv").good());
}

TEST(Cli, OracleCheckPassesItsOwnSuites) {
  RunResult r = run_cli("oracle-check --trials 25");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("[PASS] epidemic step"), std::string::npos);
  EXPECT_NE(r.output.find("[PASS] lockdown ledger"), std::string::npos);
  EXPECT_EQ(r.output.find("[FAIL]"), std::string::npos) << r.output;
}

}  // namespace
