#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "epicon/epidemic.hpp"
#include "epicon/errors.hpp"
#include "epicon/reward.hpp"
#include "epicon/scenario.hpp"

namespace epicon {

// What policies are allowed to see at a decision point: visible states of all
// regions, how those changed since the previous decision point, and the
// demand schedule for the upcoming action period.  Susceptible and infected
// are never exposed separately.
struct Observation {
  int time = 0;  // epidemic step index at which this observation was taken
  std::vector<VisiblePandemicState> visible_states;
  std::vector<VisiblePandemicState> visible_deltas;
  std::vector<MobilityMatrix> demand_forecast;

  int n_regions() const { return static_cast<int>(visible_states.size()); }
};

// Full record of one epidemic step, the unit of trajectory logging.
struct StepRecord {
  int t = 0;
  std::vector<PandemicState> states;  // post-step compartments
  std::vector<double> action;         // held admission matrix, row-major n*n
  std::vector<double> demand_in;      // per region, people requested inbound
  std::vector<double> allowed_in;     // per region, people admitted
  std::vector<double> blocked;        // per region, blocked fraction of nominal
  std::vector<double> ledger;         // per region, lockdown penalty after update
  std::vector<double> pandemic_costs;
  std::vector<double> mobility_costs;
  std::vector<double> local_rewards;
  double global_reward = 0.0;
};

// Result of one decision-point step: the next observation, rewards summed
// over the action period, and the per-step records for logging.
struct StepOutcome {
  Observation observation;
  std::vector<double> local_rewards;
  double global_reward = 0.0;
  bool done = false;
  std::vector<StepRecord> info;
};

// Episode orchestrator.  Holds the epidemic state and the per-region
// lockdown ledgers; advances in decision-point strides of `action_period`
// epidemic steps during which the joint action is held constant.
class Environment {
 public:
  explicit Environment(Scenario scenario) : scenario_(std::move(scenario)) {
    scenario_.validate();
    reset(0);
  }

  // Start a new episode.  The dynamics are deterministic, so the seed's only
  // job is provenance: it is carried into every record written about the
  // episode.
  const Observation& reset(std::uint64_t seed) {
    seed_ = seed;
    t_ = 0;
    done_ = false;
    clipped_entries_ = 0;
    states_ = scenario_.initial_states();
    rates_ = scenario_.rates();
    ledgers_.clear();
    for (int j = 0; j < scenario_.n_regions(); ++j) {
      ledgers_.push_back(scenario_.make_ledger(j));
    }
    deltas_.assign(scenario_.n_regions(), VisiblePandemicState{});
    previous_visible_ = snapshot_visible();
    rebuild_observation();
    return observation_;
  }

  // Apply one joint action for a full action period.  joint_action[j] is
  // region j's admission column: entry i is the fraction of origin i's
  // demand that region j admits.
  StepOutcome step(const std::vector<std::vector<double>>& joint_action) {
    if (done_) {
      throw ContractError("episode is done; reset before stepping again");
    }
    ActionMatrix action = sanitize(joint_action);

    StepOutcome outcome;
    int n = scenario_.n_regions();
    outcome.local_rewards.assign(n, 0.0);
    for (int k = 0; k < scenario_.action_period; ++k) {
      StepRecord record = advance_one_step(action);
      for (int j = 0; j < n; ++j) {
        outcome.local_rewards[j] += record.local_rewards[j];
      }
      outcome.global_reward += record.global_reward;
      outcome.info.push_back(std::move(record));
    }

    done_ = t_ >= scenario_.horizon;
    std::vector<VisiblePandemicState> now = snapshot_visible();
    for (int j = 0; j < n; ++j) {
      deltas_[j].asymptomatic_pool =
          now[j].asymptomatic_pool - previous_visible_[j].asymptomatic_pool;
      deltas_[j].hospitalized =
          now[j].hospitalized - previous_visible_[j].hospitalized;
      deltas_[j].recovered = now[j].recovered - previous_visible_[j].recovered;
    }
    previous_visible_ = std::move(now);
    rebuild_observation();

    outcome.observation = observation_;
    outcome.done = done_;
    return outcome;
  }

  bool done() const { return done_; }
  int time() const { return t_; }
  int decision_index() const { return t_ / scenario_.action_period; }
  std::uint64_t seed() const { return seed_; }
  const Scenario& scenario() const { return scenario_; }
  const Observation& observation() const { return observation_; }
  const std::vector<PandemicState>& states() const { return states_; }
  const std::vector<LockdownLedger>& ledgers() const { return ledgers_; }

  double population(int region) const { return states_[region].population(); }
  double movable_population(int region) const {
    return states_[region].movable();
  }

  // Out-of-range admission fractions are clipped rather than rejected so a
  // noisy learner cannot crash an episode; every clip is counted and
  // reported through the warning sink.
  int clipped_entries() const { return clipped_entries_; }
  void set_warning_sink(std::function<void(const std::string&)> sink) {
    warning_sink_ = std::move(sink);
  }

 private:
  std::vector<VisiblePandemicState> snapshot_visible() const {
    std::vector<VisiblePandemicState> v(states_.size());
    for (std::size_t j = 0; j < states_.size(); ++j) v[j] = visible(states_[j]);
    return v;
  }

  ActionMatrix sanitize(const std::vector<std::vector<double>>& joint) {
    int n = scenario_.n_regions();
    if (static_cast<int>(joint.size()) != n) {
      throw ContractError("joint action needs one column per region");
    }
    ActionMatrix action(n);
    int clipped = 0;
    for (int j = 0; j < n; ++j) {
      if (static_cast<int>(joint[j].size()) != n) {
        throw ContractError("action column of region " + std::to_string(j) +
                            " has wrong length");
      }
      for (int i = 0; i < n; ++i) {
        double v = joint[j][i];
        if (!std::isfinite(v)) {
          throw ContractError("action entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") is not finite");
        }
        if (v < 0.0) {
          v = 0.0;
          ++clipped;
        } else if (v > 1.0) {
          v = 1.0;
          ++clipped;
        }
        action.set(i, j, v);
      }
    }
    if (clipped > 0) {
      clipped_entries_ += clipped;
      warn("clipped " + std::to_string(clipped) +
           " admission entries to [0, 1] at step " + std::to_string(t_));
    }
    return action;
  }

  StepRecord advance_one_step(const ActionMatrix& action) {
    int n = scenario_.n_regions();
    const MobilityMatrix& demand = scenario_.demand_at(t_);
    MobilityMatrix allowed = actual_mobility(demand, action);
    states_ = epidemic_step(states_, demand, action, rates_, t_);

    StepRecord record;
    record.t = t_;
    record.states = states_;
    record.action.reserve(n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) record.action.push_back(action(i, j));
    }
    record.local_rewards.resize(n);
    for (int j = 0; j < n; ++j) {
      double demand_in = demand.column_sum(j);
      double allowed_in = allowed.column_sum(j);
      ledgers_[j] = update_lockdown_penalty(ledgers_[j], demand_in, allowed_in);
      const CostProfile& profile = scenario_.regions[j].profile;
      double c_p = pandemic_cost(states_[j].hospitalized, profile);
      double c_m = mobility_cost(ledgers_[j], demand_in, allowed_in, profile);
      record.demand_in.push_back(demand_in);
      record.allowed_in.push_back(allowed_in);
      record.blocked.push_back(blocked_fraction(ledgers_[j], demand_in,
                                                allowed_in));
      record.ledger.push_back(ledgers_[j].penalty);
      record.pandemic_costs.push_back(c_p);
      record.mobility_costs.push_back(c_m);
      record.local_rewards[j] = local_reward(c_p, c_m);
    }
    record.global_reward = global_reward(record.local_rewards);
    ++t_;
    return record;
  }

  void rebuild_observation() {
    int n = scenario_.n_regions();
    observation_.time = t_;
    observation_.visible_states = snapshot_visible();
    if (static_cast<int>(deltas_.size()) != n) {
      deltas_.assign(n, VisiblePandemicState{});
    }
    observation_.visible_deltas = deltas_;
    observation_.demand_forecast.clear();
    if (!done_) {
      for (int k = 0; k < scenario_.action_period; ++k) {
        observation_.demand_forecast.push_back(scenario_.demand_at(t_ + k));
      }
    }
  }

  void warn(const std::string& message) {
    if (warning_sink_) {
      warning_sink_(message);
    } else {
      std::cerr << "[environment] " << message << "\n";
    }
  }

  Scenario scenario_;
  std::vector<PandemicState> states_;
  std::vector<EpidemicRates> rates_;
  std::vector<LockdownLedger> ledgers_;
  std::vector<VisiblePandemicState> previous_visible_;
  std::vector<VisiblePandemicState> deltas_;
  Observation observation_;
  std::uint64_t seed_ = 0;
  int t_ = 0;
  bool done_ = false;
  int clipped_entries_ = 0;
  std::function<void(const std::string&)> warning_sink_;
};

}  // namespace epicon
