#include "epicon/policy.hpp"

#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "epicon/environment.hpp"
#include "epicon/errors.hpp"
#include "epicon/scenario.hpp"

namespace {

using epicon::ConfigError;
using epicon::ContractError;
using epicon::Environment;
using epicon::FixedPolicy;
using epicon::Observation;
using epicon::Scenario;
using epicon::ThresholdPolicy;

TEST(FixedPolicy, EmitsConstantColumnsEverywhere) {
  Scenario sc = epicon::make_outbreak_scenario();
  Environment env(sc);
  Observation obs = env.reset(0);

  FixedPolicy policy(0.5);
  policy.begin_episode(sc);
  for (int d = 0; d < 3; ++d) {
    std::vector<std::vector<double>> joint(5);
    for (int j = 0; j < 5; ++j) {
      joint[j] = policy.act(obs, j);
      ASSERT_EQ(joint[j].size(), 5u);
      for (double v : joint[j]) EXPECT_EQ(v, 0.5);
    }
    obs = env.step(joint).observation;
  }
  EXPECT_NE(policy.describe().find("fixed"), std::string::npos);
}

TEST(FixedPolicy, RejectsSharesOutsideUnitInterval) {
  EXPECT_THROW(FixedPolicy(-0.01), ConfigError);
  EXPECT_THROW(FixedPolicy(1.01), ConfigError);
  EXPECT_NO_THROW(FixedPolicy(0.0));
  EXPECT_NO_THROW(FixedPolicy(1.0));
}

TEST(ThresholdDecision, ImplementsTheBangBangRule) {
  // Block only when hospitalizations exceed the health threshold AND the
  // accumulated penalty still has room below the economic threshold.
  EXPECT_EQ(epicon::threshold_decision(2.0, 0.0, 1.0, 168.0), 0.0);
  EXPECT_EQ(epicon::threshold_decision(2.0, 200.0, 1.0, 168.0), 1.0);
  EXPECT_EQ(epicon::threshold_decision(0.0, 0.0, 1.0, 168.0), 1.0);
  EXPECT_EQ(epicon::threshold_decision(1.0, 0.0, 1.0, 168.0), 1.0);  // not >
  EXPECT_EQ(epicon::threshold_decision(5.0, 168.0, 1.0, 168.0), 1.0);  // not <
}

TEST(ThresholdDecision, MonotoneInHospitalizations) {
  for (double l : {0.0, 10.0, 167.9}) {
    double prev = 1.0;
    for (double h = 0.0; h < 10.0; h += 0.25) {
      double cur = epicon::threshold_decision(h, l, 1.0, 168.0);
      EXPECT_LE(cur, prev);  // once blocking starts it cannot un-block as H rises
      prev = cur;
    }
  }
}

TEST(ThresholdPolicy, RequiresEpisodeStart) {
  ThresholdPolicy policy(1.0, 168.0);
  Environment env(epicon::make_outbreak_scenario());
  Observation obs = env.reset(0);
  EXPECT_THROW(policy.act(obs, 0), ContractError);
}

TEST(ThresholdPolicy, RejectsNegativeThresholds) {
  EXPECT_THROW(ThresholdPolicy(-1.0, 168.0), ConfigError);
  EXPECT_THROW(ThresholdPolicy(1.0, -5.0), ConfigError);
}

// The policy's self-tracked ledger must agree bitwise with the environment's
// reward ledger: with bang-bang actions both compute identical blocked
// fractions through the identical recursion.
TEST(ThresholdPolicy, SelfTrackedLedgerMatchesEnvironmentExactly) {
  Scenario sc = epicon::make_outbreak_scenario();
  Environment env(sc);
  Observation obs = env.reset(0);
  ThresholdPolicy policy(1.0, 168.0);
  policy.begin_episode(sc);

  bool saw_block = false;
  for (int d = 0; d < sc.n_decisions(); ++d) {
    std::vector<std::vector<double>> joint(5);
    for (int j = 0; j < 5; ++j) {
      joint[j] = policy.act(obs, j);
      for (double v : joint[j]) {
        EXPECT_TRUE(v == 0.0 || v == 1.0);
        if (v == 0.0) saw_block = true;
      }
      // act() has folded all pending steps, so the tracked penalty must now
      // equal the environment's ledger from the end of the last period.
      EXPECT_EQ(policy.tracked_ledger(j).penalty, env.ledgers()[j].penalty)
          << "region " << j << " decision " << d;
    }
    obs = env.step(joint).observation;
  }
  // Under calibrated outbreak rates the health trigger must have fired.
  EXPECT_TRUE(saw_block);
}

TEST(ThresholdPolicy, EconomyOverrideReopensWhenPenaltySaturates) {
  // L_th below the ledger's reachable ceiling (lambda/(1-lambda) = 1 at the
  // calibrated discount): blocking accrues penalty until the override flips
  // the column back open.
  Scenario sc = epicon::make_outbreak_scenario();
  Environment env(sc);
  Observation obs = env.reset(0);
  ThresholdPolicy policy(1.0, 0.8);
  policy.begin_episode(sc);

  bool saw_block = false, saw_reopen_with_high_h = false;
  for (int d = 0; d < sc.n_decisions(); ++d) {
    std::vector<std::vector<double>> joint(5);
    for (int j = 0; j < 5; ++j) joint[j] = policy.act(obs, j);
    double p0 = joint[0][0];
    if (p0 == 0.0) saw_block = true;
    if (p0 == 1.0 && obs.visible_states[0].hospitalized > 1.0 &&
        policy.tracked_ledger(0).penalty >= 0.8) {
      saw_reopen_with_high_h = true;
    }
    obs = env.step(joint).observation;
  }
  EXPECT_TRUE(saw_block);
  EXPECT_TRUE(saw_reopen_with_high_h);
}

}  // namespace
