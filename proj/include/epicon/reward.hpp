#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "epicon/epidemic.hpp"
#include "epicon/errors.hpp"

namespace epicon {

// Per-region appetite for the two kinds of pain a controller can cause.
// `pandemic_tolerance` (H0) is in people: how much hospitalization a region
// shrugs off.  `lockdown_tolerance` (L0) is in accumulated-penalty units: how
// much throttling history it shrugs off.  Small values mean touchy regions.
struct CostProfile {
  double pandemic_tolerance = 1.0;   // H0 > 0, people
  double lockdown_tolerance = 1.0;   // L0 > 0
  double base_pandemic_cost = 1.0;   // k_h >= 0, scales the pandemic cost
  bool exempt_pandemic_cost = false; // outbreak source pays no pandemic cost

  void validate(const std::string& where) const {
    if (!(pandemic_tolerance > 0.0) || !std::isfinite(pandemic_tolerance)) {
      throw ConfigError(where + ": pandemic_tolerance must be positive");
    }
    if (!(lockdown_tolerance > 0.0) || !std::isfinite(lockdown_tolerance)) {
      throw ConfigError(where + ": lockdown_tolerance must be positive");
    }
    if (!(base_pandemic_cost >= 0.0) || !std::isfinite(base_pandemic_cost)) {
      throw ConfigError(where + ": base_pandemic_cost must be non-negative");
    }
  }
};

// Exponent of the pandemic cost.  Exposed separately because its scaling law
// (halving the tolerance doubles the exponent exactly) is part of the
// contract and worth asserting on its own.
inline double pandemic_exponent(double hospitalized, const CostProfile& p) {
  return hospitalized / p.pandemic_tolerance;
}

// C_p = k_h * exp(H / H0); exempt regions pay nothing regardless of H.
inline double pandemic_cost(double hospitalized, const CostProfile& p) {
  if (p.exempt_pandemic_cost) return 0.0;
  return p.base_pandemic_cost * std::exp(pandemic_exponent(hospitalized, p));
}

// Exponentially-discounted memory of how much inbound travel a region has
// been blocking.  `nominal_demand` is the region's per-step inbound demand
// under the scenario's schedule, fixed once at episode start; it normalizes
// blocked counts into fractions.
struct LockdownLedger {
  double penalty = 0.0;         // L, the discounted blocked-fraction sum
  double nominal_demand = 0.0;  // people per step; 0 only for isolated regions
  double discount = 0.9;        // lambda in (0, 1)
};

// Share of nominal inbound demand that was turned away this step.
// Regions with no inbound routes never block anyone.
inline double blocked_fraction(const LockdownLedger& ledger, double demand_in,
                               double allowed_in) {
  if (allowed_in > demand_in) {
    throw ContractError("allowed inbound travel exceeds inbound demand");
  }
  if (!(demand_in >= 0.0) || !(allowed_in >= 0.0)) {
    throw ContractError("inbound demand and allowed travel must be >= 0");
  }
  if (ledger.nominal_demand <= 0.0) return 0.0;
  return (demand_in - allowed_in) / ledger.nominal_demand;
}

// One step of the ledger recursion: L <- lambda * (L + blocked).  Equivalent
// to the discounted sum sum_k lambda^{t-k+1} blocked_k.
inline LockdownLedger update_lockdown_penalty(LockdownLedger ledger,
                                              double demand_in,
                                              double allowed_in) {
  double blocked = blocked_fraction(ledger, demand_in, allowed_in);
  ledger.penalty = ledger.discount * (ledger.penalty + blocked);
  return ledger;
}

// C_m = exp(L / L0) * blocked: the sting of blocking grows with how much the
// region has already been blocking.  Evaluate *after* updating the ledger for
// the step being costed.
inline double mobility_cost(const LockdownLedger& ledger, double demand_in,
                            double allowed_in, const CostProfile& p) {
  double blocked = blocked_fraction(ledger, demand_in, allowed_in);
  return std::exp(ledger.penalty / p.lockdown_tolerance) * blocked;
}

// Local reward: regions feel costs, never gains.
inline double local_reward(double pandemic_c, double mobility_c) {
  return -pandemic_c - mobility_c;
}

inline double global_reward(const std::vector<double>& local_rewards) {
  double total = 0.0;
  for (double r : local_rewards) total += r;
  return total;
}

// Mixed objective: own reward plus alpha times everyone's.  alpha = 0 is a
// selfish agent, large alpha an almost fully cooperative one.
inline double mixed_reward(double local, double global_r, double alpha) {
  return local + alpha * global_r;
}

}  // namespace epicon
