#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "epicon/environment.hpp"
#include "epicon/errors.hpp"
#include "epicon/scenario.hpp"

namespace epicon {

// Everything one episode produced, plus enough provenance (resolved
// scenario, policy identity, seed) to reproduce or re-analyze it later
// without the original configuration files.
struct Trajectory {
  nlohmann::json scenario_doc;
  std::string policy_desc;
  std::uint64_t seed = 0;
  int action_period = 1;
  std::vector<std::string> region_names;
  std::vector<StepRecord> steps;

  int n_regions() const { return static_cast<int>(region_names.size()); }
};

inline nlohmann::json trajectory_to_json(const Trajectory& traj) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord& rec : traj.steps) {
    nlohmann::json states = nlohmann::json::array();
    for (const PandemicState& s : rec.states) {
      states.push_back({s.susceptible, s.infected, s.hospitalized,
                        s.recovered});
    }
    steps.push_back({{"t", rec.t},
                     {"states", std::move(states)},
                     {"action", rec.action},
                     {"demand_in", rec.demand_in},
                     {"allowed_in", rec.allowed_in},
                     {"blocked", rec.blocked},
                     {"ledger", rec.ledger},
                     {"pandemic_costs", rec.pandemic_costs},
                     {"mobility_costs", rec.mobility_costs},
                     {"local_rewards", rec.local_rewards},
                     {"global_reward", rec.global_reward}});
  }
  return nlohmann::json{{"format_version", 1},
                        {"kind", "trajectory"},
                        {"scenario", traj.scenario_doc},
                        {"policy", traj.policy_desc},
                        {"seed", traj.seed},
                        {"action_period", traj.action_period},
                        {"region_names", traj.region_names},
                        {"steps", std::move(steps)}};
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("kind", "") != "trajectory" ||
      j.value("format_version", 0) != 1) {
    throw ConfigError("not a version-1 trajectory document");
  }
  Trajectory traj;
  traj.scenario_doc = j.at("scenario");
  traj.policy_desc = j.at("policy").get<std::string>();
  traj.seed = j.at("seed").get<std::uint64_t>();
  traj.action_period = j.at("action_period").get<int>();
  traj.region_names = j.at("region_names").get<std::vector<std::string>>();
  for (const nlohmann::json& sj : j.at("steps")) {
    StepRecord rec;
    rec.t = sj.at("t").get<int>();
    for (const nlohmann::json& st : sj.at("states")) {
      rec.states.push_back(
          {st.at(0).get<double>(), st.at(1).get<double>(),
           st.at(2).get<double>(), st.at(3).get<double>()});
    }
    rec.action = sj.at("action").get<std::vector<double>>();
    rec.demand_in = sj.at("demand_in").get<std::vector<double>>();
    rec.allowed_in = sj.at("allowed_in").get<std::vector<double>>();
    rec.blocked = sj.at("blocked").get<std::vector<double>>();
    rec.ledger = sj.at("ledger").get<std::vector<double>>();
    rec.pandemic_costs = sj.at("pandemic_costs").get<std::vector<double>>();
    rec.mobility_costs = sj.at("mobility_costs").get<std::vector<double>>();
    rec.local_rewards = sj.at("local_rewards").get<std::vector<double>>();
    rec.global_reward = sj.at("global_reward").get<double>();
    traj.steps.push_back(std::move(rec));
  }
  return traj;
}

inline void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write trajectory file: " + path);
  out << trajectory_to_json(traj).dump(2) << "\n";
}

inline Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trajectory file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("trajectory file " + path + " is not valid JSON: " +
                      e.what());
  }
  return trajectory_from_json(j);
}

// Long-format per-step, per-region time series, one row per (step, region):
// ready for any plotting tool without reshaping.
inline void write_timeseries_csv(const Trajectory& traj,
                                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write time-series file: " + path);
  out << "t,region,name,susceptible,infected,hospitalized,recovered,"
         "demand_in,allowed_in,blocked,ledger,pandemic_cost,mobility_cost,"
         "local_reward,global_reward\n";
  char buf[512];
  for (const StepRecord& rec : traj.steps) {
    for (int j = 0; j < traj.n_regions(); ++j) {
      const PandemicState& s = rec.states[j];
      std::snprintf(buf, sizeof(buf),
                    "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    rec.t, j, traj.region_names[j].c_str(), s.susceptible,
                    s.infected, s.hospitalized, s.recovered, rec.demand_in[j],
                    rec.allowed_in[j], rec.blocked[j], rec.ledger[j],
                    rec.pandemic_costs[j], rec.mobility_costs[j],
                    rec.local_rewards[j], rec.global_reward);
      out << buf;
    }
  }
}

}  // namespace epicon
