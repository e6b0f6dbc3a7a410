#pragma once

#include <string>
#include <vector>

#include "epicon/environment.hpp"
#include "epicon/errors.hpp"
#include "epicon/reward.hpp"
#include "epicon/scenario.hpp"

namespace epicon {

// A controller for one region (or, when reused across indices, for all of
// them).  act() returns the admission column region `region` will hold for
// the next action period: entry i is the fraction granted to origin i.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void begin_episode(const Scenario& /*scenario*/) {}

  virtual std::vector<double> act(const Observation& obs, int region) = 0;

  // Human-readable identity recorded in trajectory files.
  virtual std::string describe() const = 0;
};

// Admits the same fixed share of every route at every step.
class FixedPolicy : public Policy {
 public:
  explicit FixedPolicy(double p_fix) : p_fix_(p_fix) {
    if (!(p_fix >= 0.0 && p_fix <= 1.0)) {
      throw ConfigError("fixed policy share must lie in [0, 1]");
    }
  }

  std::vector<double> act(const Observation& obs, int /*region*/) override {
    return std::vector<double>(obs.n_regions(), p_fix_);
  }

  std::string describe() const override {
    return "fixed(p=" + std::to_string(p_fix_) + ")";
  }

 private:
  double p_fix_;
};

// The bang-bang rule shared by every threshold controller: block everything
// while hospitalizations exceed the health threshold, unless the accumulated
// lockdown penalty has grown past the economic threshold, in which case
// reopen regardless.
inline double threshold_decision(double hospitalized, double penalty,
                                 double h_threshold, double l_threshold) {
  return (hospitalized > h_threshold && penalty < l_threshold) ? 0.0 : 1.0;
}

// Reactive baseline: applies threshold_decision to its own region's observed
// hospitalizations.  The penalty it consults is self-tracked with the same
// ledger recursion the reward model uses, fed by the policy's own decisions
// and the demand forecast, so it needs nothing the observation doesn't offer.
class ThresholdPolicy : public Policy {
 public:
  ThresholdPolicy(double h_threshold, double l_threshold)
      : h_threshold_(h_threshold), l_threshold_(l_threshold) {
    if (h_threshold < 0.0 || l_threshold < 0.0) {
      throw ConfigError("threshold policy thresholds must be >= 0");
    }
  }

  void begin_episode(const Scenario& scenario) override {
    int n = scenario.n_regions();
    ledgers_.clear();
    for (int j = 0; j < n; ++j) ledgers_.push_back(scenario.make_ledger(j));
    pending_.assign(n, {});
    last_time_.assign(n, -1);
  }

  std::vector<double> act(const Observation& obs, int region) override {
    if (ledgers_.empty()) {
      throw ContractError("threshold policy used without begin_episode");
    }
    // Fold in the steps taken since this region's previous decision.
    if (obs.time != last_time_[region]) {
      for (const auto& [demand_in, allowed_in] : pending_[region]) {
        ledgers_[region] =
            update_lockdown_penalty(ledgers_[region], demand_in, allowed_in);
      }
      pending_[region].clear();
      last_time_[region] = obs.time;
    }

    double p = threshold_decision(obs.visible_states[region].hospitalized,
                                  ledgers_[region].penalty, h_threshold_,
                                  l_threshold_);
    // Pre-compute the ledger feed for the period this decision governs.
    for (const MobilityMatrix& demand : obs.demand_forecast) {
      double demand_in = demand.column_sum(region);
      pending_[region].push_back({demand_in, p * demand_in});
    }
    return std::vector<double>(obs.n_regions(), p);
  }

  std::string describe() const override {
    return "threshold(H_th=" + std::to_string(h_threshold_) +
           ", L_th=" + std::to_string(l_threshold_) + ")";
  }

  const LockdownLedger& tracked_ledger(int region) const {
    return ledgers_[region];
  }

 private:
  double h_threshold_;
  double l_threshold_;
  std::vector<LockdownLedger> ledgers_;
  std::vector<std::vector<std::pair<double, double>>> pending_;
  std::vector<int> last_time_;
};

}  // namespace epicon
