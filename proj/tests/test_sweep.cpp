#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "epicon/metrics.hpp"
#include "epicon/rollout.hpp"
#include "epicon/sweep.hpp"

namespace {

using namespace epicon;

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

TrainConfig tiny_config() {
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
  return cfg;
}

TEST(Sweep, EmptyAlphaListEvaluatesOnlyTheBaselines) {
  Scenario sc = duo_scenario();
  SweepResult result =
      run_sweep(sc, tiny_config(), {}, 0.5, 400.0, 4.0, /*eval_seed=*/7);

  ASSERT_EQ(result.rows.size(), 2u);
  EXPECT_EQ(result.rows[0].model, "fixed");
  EXPECT_EQ(result.rows[0].parameter, "p_fix=0.5");
  EXPECT_EQ(result.rows[1].model, "threshold");
  EXPECT_EQ(result.rows[1].parameter, "H_th=400,L_th=4");
  EXPECT_FALSE(result.any_failed());

  // The fixed row must match a hand-rolled evaluation of the same policy.
  FixedPolicy fixed(0.5);
  std::vector<Policy*> agents{&fixed};
  MetricReport rep = compute_metrics(run_episode(agents, sc, 7));
  EXPECT_EQ(result.rows[0].mean_global_reward, rep.mean_global_reward);
  EXPECT_EQ(result.rows[0].mean_hospitalized, rep.mean_hospitalized);
  EXPECT_EQ(result.rows[0].max_hospitalized, rep.max_hospitalized);
  EXPECT_EQ(result.rows[0].mean_action, rep.mean_action);
}

TEST(Sweep, TrainsOneRowPerMixingWeight) {
  Scenario sc = duo_scenario();
  SweepResult result = run_sweep(sc, tiny_config(), {0.0, 0.05}, 0.5, 400.0,
                                 4.0, /*eval_seed=*/7);

  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_EQ(result.rows[2].model, "mixed");
  EXPECT_EQ(result.rows[2].parameter, "alpha=0");
  EXPECT_EQ(result.rows[2].alpha, 0.0);
  EXPECT_EQ(result.rows[3].parameter, "alpha=0.05");
  EXPECT_EQ(result.rows[3].alpha, 0.05);
  EXPECT_FALSE(result.any_failed());
  for (const SweepRow& row : result.rows) {
    EXPECT_TRUE(std::isfinite(row.mean_global_reward)) << row.parameter;
    EXPECT_GE(row.mean_action, 0.0);
    EXPECT_LE(row.mean_action, 1.0);
  }
}

TEST(Sweep, FailedCellIsReportedWithoutPoisoningTheOthers) {
  Scenario sc = duo_scenario();
  CellTrainer trainer = [&](double alpha, const TrainConfig& cfg) {
    if (alpha > 0.01) throw std::runtime_error("synthetic blow-up");
    return MixedObjectiveLearner(sc, cfg).train();
  };
  SweepResult result = run_sweep(sc, tiny_config(), {0.0, 0.05}, 0.5, 400.0,
                                 4.0, 7, trainer);

  ASSERT_EQ(result.rows.size(), 4u);
  EXPECT_FALSE(result.rows[2].failed);
  EXPECT_TRUE(result.rows[3].failed);
  EXPECT_NE(result.rows[3].error.find("synthetic blow-up"), std::string::npos);
  EXPECT_TRUE(result.any_failed());
}

TEST(Sweep, JsonAndCsvCarryOneEntryPerRow) {
  Scenario sc = duo_scenario();
  SweepResult result = run_sweep(sc, tiny_config(), {}, 0.25, 400.0, 4.0, 3);

  nlohmann::json j = sweep_to_json(result);
  EXPECT_EQ(j.at("kind"), "sweep");
  EXPECT_EQ(j.at("format_version"), 1);
  ASSERT_EQ(j.at("rows").size(), 2u);
  EXPECT_EQ(j.at("rows")[0].at("status"), "ok");
  EXPECT_EQ(j.at("rows")[0].at("model"), "fixed");
  EXPECT_EQ(j.at("rows")[0].at("mean_action").get<double>(),
            result.rows[0].mean_action);

  std::string path = testing::TempDir() + "sweep_rows.csv";
  write_sweep_csv(result, path);
  std::ifstream f(path);
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) ++lines;
  EXPECT_EQ(lines, 3);  // header + one per row

  std::string table = sweep_table_text(result);
  EXPECT_NE(table.find("fixed"), std::string::npos);
  EXPECT_NE(table.find("threshold"), std::string::npos);
}

}  // namespace
