#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epicon/environment.hpp"
#include "epicon/errors.hpp"
#include "epicon/policy.hpp"
#include "epicon/scenario.hpp"
#include "epicon/trajectory.hpp"

namespace epicon {

// Deterministic evaluation rollout: every region queries its policy at each
// decision point, the environment advances one action period, and every
// epidemic step is recorded.  Pass one policy to control all regions or one
// per region.
inline Trajectory run_episode(const std::vector<Policy*>& policies,
                              const Scenario& scenario, std::uint64_t seed) {
  int n = scenario.n_regions();
  if (policies.empty() ||
      (static_cast<int>(policies.size()) != 1 &&
       static_cast<int>(policies.size()) != n)) {
    throw ContractError("need one shared policy or one policy per region");
  }
  auto policy_for = [&](int region) -> Policy& {
    return policies.size() == 1 ? *policies[0] : *policies[region];
  };

  Environment env(scenario);
  Observation obs = env.reset(seed);
  for (Policy* p : policies) p->begin_episode(scenario);

  Trajectory traj;
  traj.scenario_doc = scenario_to_json(scenario);
  traj.seed = seed;
  traj.action_period = scenario.action_period;
  for (const RegionSpec& r : scenario.regions) {
    traj.region_names.push_back(r.name);
  }
  if (policies.size() == 1) {
    traj.policy_desc = policies[0]->describe();
  } else {
    for (int j = 0; j < n; ++j) {
      if (j > 0) traj.policy_desc += " | ";
      traj.policy_desc += policies[j]->describe();
    }
  }

  while (!env.done()) {
    std::vector<std::vector<double>> joint(n);
    for (int j = 0; j < n; ++j) joint[j] = policy_for(j).act(obs, j);
    StepOutcome outcome = env.step(joint);
    for (StepRecord& rec : outcome.info) traj.steps.push_back(std::move(rec));
    obs = outcome.observation;
  }
  return traj;
}

}  // namespace epicon
