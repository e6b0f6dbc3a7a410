#include "epicon/reward.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "epicon/errors.hpp"
#include "epicon/oracle.hpp"
#include "epicon/rng.hpp"

namespace {

using epicon::ConfigError;
using epicon::ContractError;
using epicon::CostProfile;
using epicon::LockdownLedger;
using epicon::Rng;

CostProfile profile(double h0, double l0, double kh = 1.0,
                    bool exempt = false) {
  CostProfile p;
  p.pandemic_tolerance = h0;
  p.lockdown_tolerance = l0;
  p.base_pandemic_cost = kh;
  p.exempt_pandemic_cost = exempt;
  return p;
}

TEST(PandemicCost, MatchesClosedForm) {
  CostProfile p = profile(10000.0, 24.0);
  EXPECT_DOUBLE_EQ(epicon::pandemic_cost(0.0, p), 1.0);
  EXPECT_DOUBLE_EQ(epicon::pandemic_cost(10000.0, p), std::exp(1.0));
  EXPECT_DOUBLE_EQ(epicon::pandemic_cost(25000.0, profile(10000.0, 1.0, 2.0)),
                   2.0 * std::exp(2.5));
}

TEST(PandemicCost, ExemptRegionsPayNothing) {
  CostProfile p = profile(10000.0, 0.05, 1.0, true);
  EXPECT_EQ(epicon::pandemic_cost(0.0, p), 0.0);
  EXPECT_EQ(epicon::pandemic_cost(1e7, p), 0.0);
}

TEST(PandemicCost, StrictlyIncreasingInHospitalization) {
  CostProfile p = profile(5000.0, 1.0);
  double prev = epicon::pandemic_cost(0.0, p);
  for (double h = 100.0; h <= 20000.0; h += 100.0) {
    double cur = epicon::pandemic_cost(h, p);
    EXPECT_GT(cur, prev);
    prev = cur;
  }
}

// Halving the tolerance must exactly double the exponent: the quotient is a
// power-of-two rescaling, which floating point performs without extra error.
TEST(PandemicCost, ToleranceScalingIsExact) {
  Rng rng(99);
  for (int k = 0; k < 1000; ++k) {
    double h = rng.uniform(0.0, 1e6);
    double h0 = rng.uniform(1e-3, 1e6);
    EXPECT_EQ(epicon::pandemic_exponent(h, profile(h0, 1.0)),
              2.0 * epicon::pandemic_exponent(h, profile(2.0 * h0, 1.0)));
  }
}

TEST(LockdownLedger, OneStepRecursion) {
  LockdownLedger ledger{0.0, 1000.0, 0.9};
  auto updated = epicon::update_lockdown_penalty(ledger, 1000.0, 0.0);
  EXPECT_DOUBLE_EQ(updated.penalty, 0.9);

  auto unchanged = epicon::update_lockdown_penalty(ledger, 1000.0, 1000.0);
  EXPECT_EQ(unchanged.penalty, 0.0);
}

TEST(LockdownLedger, FullBlockingConvergesToGeometricLimit) {
  LockdownLedger ledger{0.0, 500.0, 0.9};
  for (int t = 1; t <= 50; ++t) {
    ledger = epicon::update_lockdown_penalty(ledger, 500.0, 0.0);
    // Partial geometric sum: lambda (1 - lambda^t) / (1 - lambda).
    double closed = 0.9 * (1.0 - std::pow(0.9, t)) / 0.1;
    EXPECT_NEAR(ledger.penalty, closed, 1e-12 * closed);
  }
  for (int t = 0; t < 1000; ++t) {
    ledger = epicon::update_lockdown_penalty(ledger, 500.0, 0.0);
  }
  EXPECT_NEAR(ledger.penalty, 9.0, 1e-10);
  EXPECT_LE(ledger.penalty, 9.0 + 1e-9);
}

// The incremental recursion must equal the direct discounted sum recomputed
// from the whole history with pow().
TEST(LockdownLedger, RecursionMatchesDirectDiscountedSum) {
  Rng rng(1234);
  for (int history = 0; history < 20; ++history) {
    double lambda = rng.uniform(0.05, 0.99);
    double nominal = rng.uniform(10.0, 1e4);
    LockdownLedger ledger{0.0, nominal, lambda};
    std::vector<double> blocked;
    for (int t = 0; t < 200; ++t) {
      double demand = nominal;
      double allowed = rng.uniform() * demand;
      blocked.push_back((demand - allowed) / nominal);
      ledger = epicon::update_lockdown_penalty(ledger, demand, allowed);
      double direct =
          epicon::oracle::reference_lockdown_penalty(blocked, lambda);
      double scale = std::max(std::abs(direct), 1e-30);
      EXPECT_LE(std::abs(ledger.penalty - direct), 1e-12 * scale);
    }
  }
}

TEST(LockdownLedger, RejectsImpossibleTravelCounts) {
  LockdownLedger ledger{0.0, 100.0, 0.9};
  EXPECT_THROW(epicon::update_lockdown_penalty(ledger, 50.0, 60.0),
               ContractError);
  EXPECT_THROW(epicon::blocked_fraction(ledger, -1.0, -2.0), ContractError);
}

TEST(LockdownLedger, IsolatedRegionNeverAccruesPenalty) {
  LockdownLedger ledger{0.0, 0.0, 0.9};  // no inbound routes at all
  EXPECT_EQ(epicon::blocked_fraction(ledger, 0.0, 0.0), 0.0);
  auto updated = epicon::update_lockdown_penalty(ledger, 0.0, 0.0);
  EXPECT_EQ(updated.penalty, 0.0);
}

TEST(MobilityCost, MatchesClosedForm) {
  CostProfile p = profile(1.0, 24.0);

  LockdownLedger quiet{17.0, 1000.0, 0.9};
  EXPECT_EQ(epicon::mobility_cost(quiet, 1000.0, 1000.0, p), 0.0);

  LockdownLedger fresh{0.0, 1000.0, 0.9};
  EXPECT_DOUBLE_EQ(epicon::mobility_cost(fresh, 1000.0, 500.0, p), 0.5);

  LockdownLedger at_tolerance{24.0, 1000.0, 0.9};
  EXPECT_DOUBLE_EQ(epicon::mobility_cost(at_tolerance, 1000.0, 0.0, p),
                   std::exp(1.0));
}

TEST(MobilityCost, StrictlyIncreasingInLedger) {
  CostProfile p = profile(1.0, 10.0);
  double prev = -1.0;
  for (double l = 0.0; l <= 50.0; l += 0.5) {
    LockdownLedger ledger{l, 100.0, 0.9};
    double cost = epicon::mobility_cost(ledger, 100.0, 50.0, p);
    EXPECT_GT(cost, prev);
    prev = cost;
  }
}

TEST(Rewards, ComposeAsNegativeCostSums) {
  EXPECT_EQ(epicon::local_reward(0.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(epicon::local_reward(1.0, 0.5), -1.5);
  EXPECT_LE(epicon::local_reward(3.7, 0.0), 0.0);

  EXPECT_EQ(epicon::global_reward({}), 0.0);
  EXPECT_DOUBLE_EQ(epicon::global_reward({-1.0, -2.0, -3.0}), -6.0);

  EXPECT_DOUBLE_EQ(epicon::mixed_reward(-1.0, -10.0, 0.0), -1.0);
  EXPECT_NEAR(epicon::mixed_reward(-1.0, -10.0, 0.40), -5.0, 1e-12);
  EXPECT_NEAR(epicon::mixed_reward(-1.0, -10.0, 10.0), -101.0, 1e-12);
}

TEST(CostProfile, ValidatesTolerances) {
  EXPECT_THROW(profile(0.0, 1.0).validate("r"), ConfigError);
  EXPECT_THROW(profile(-5.0, 1.0).validate("r"), ConfigError);
  EXPECT_THROW(profile(1.0, 0.0).validate("r"), ConfigError);
  EXPECT_THROW(profile(1.0, 1.0, -1.0).validate("r"), ConfigError);
  EXPECT_NO_THROW(profile(30000.0, 0.05).validate("r"));
}

}  // namespace
