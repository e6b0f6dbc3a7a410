#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "epicon/learner.hpp"
#include "epicon/metrics.hpp"
#include "epicon/policy.hpp"
#include "epicon/rollout.hpp"
#include "epicon/scenario.hpp"

namespace epicon {

// One row of the model-comparison table: a policy family, the parameter that
// identifies the member, and the headline episode metrics.
struct SweepRow {
  std::string model;
  std::string parameter;
  bool failed = false;
  std::string error;
  double mean_global_reward = std::numeric_limits<double>::quiet_NaN();
  double mean_hospitalized = std::numeric_limits<double>::quiet_NaN();
  double max_hospitalized = std::numeric_limits<double>::quiet_NaN();
  double mean_action = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  int best_seed = -1;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool any_failed() const {
    for (const SweepRow& r : rows) {
      if (r.failed) return true;
    }
    return false;
  }
};

// Produces the networks for one mixing-weight cell.  The default trains from
// scratch; the CLI substitutes a loader that reuses saved checkpoints.
using CellTrainer =
    std::function<TrainResult(double alpha, const TrainConfig& config)>;

namespace detail {

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline void fill_row_from_policy(SweepRow& row, Policy& policy,
                                 const Scenario& scenario,
                                 unsigned long long seed) {
  std::vector<Policy*> agents{&policy};
  Trajectory traj = run_episode(agents, scenario, seed);
  MetricReport rep = compute_metrics(traj);
  row.mean_global_reward = rep.mean_global_reward;
  row.mean_hospitalized = rep.mean_hospitalized;
  row.max_hospitalized = rep.max_hospitalized;
  row.mean_action = rep.mean_action;
}

}  // namespace detail

// Evaluates the two baselines plus one trained model per mixing weight and
// assembles the comparison table.  Training cells run concurrently, one
// thread per cell; each owns its environment and learner, and every cell
// writes only its own pre-assigned row.
inline SweepResult run_sweep(const Scenario& scenario,
                             const TrainConfig& base_config,
                             const std::vector<double>& alphas, double p_fix,
                             double h_threshold, double l_threshold,
                             unsigned long long eval_seed,
                             const CellTrainer& trainer = nullptr) {
  SweepResult result;
  result.rows.resize(2 + alphas.size());

  {
    SweepRow& row = result.rows[0];
    row.model = "fixed";
    row.parameter = "p_fix=" + detail::format_value(p_fix);
    try {
      FixedPolicy policy(p_fix);
      detail::fill_row_from_policy(row, policy, scenario, eval_seed);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  }
  {
    SweepRow& row = result.rows[1];
    row.model = "threshold";
    row.parameter = "H_th=" + detail::format_value(h_threshold) +
                    ",L_th=" + detail::format_value(l_threshold);
    try {
      ThresholdPolicy policy(h_threshold, l_threshold);
      detail::fill_row_from_policy(row, policy, scenario, eval_seed);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  }

  CellTrainer train_cell = trainer;
  if (!train_cell) {
    train_cell = [&scenario](double alpha, const TrainConfig& cfg) {
      TrainConfig cell_cfg = cfg;
      cell_cfg.mixing_weight = alpha;
      return MixedObjectiveLearner(scenario, cell_cfg).train();
    };
  }

  auto run_cell = [&](std::size_t cell) {
    SweepRow& row = result.rows[2 + cell];
    double alpha = alphas[cell];
    row.model = "mixed";
    row.alpha = alpha;
    row.parameter = "alpha=" + detail::format_value(alpha);
    try {
      TrainConfig cfg = base_config;
      cfg.mixing_weight = alpha;
      TrainResult trained = train_cell(alpha, cfg);
      row.best_seed = trained.best_seed_index;
      LearnedPolicy policy(trained.actors, scenario,
                           "mixed(alpha=" + detail::format_value(alpha) + ")");
      detail::fill_row_from_policy(row, policy, scenario, eval_seed);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(alphas.size());
  for (std::size_t cell = 0; cell < alphas.size(); ++cell) {
    workers.emplace_back(run_cell, cell);
  }
  for (std::thread& w : workers) w.join();
  return result;
}

inline nlohmann::json sweep_to_json(const SweepResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& r : result.rows) {
    nlohmann::json row{{"model", r.model},
                       {"parameter", r.parameter},
                       {"status", r.failed ? "failed" : "ok"},
                       {"mean_global_reward", r.mean_global_reward},
                       {"mean_hospitalized", r.mean_hospitalized},
                       {"max_hospitalized", r.max_hospitalized},
                       {"mean_action", r.mean_action}};
    if (r.failed) row["error"] = r.error;
    if (r.model == "mixed") {
      row["alpha"] = r.alpha;
      row["best_seed"] = r.best_seed;
    }
    rows.push_back(std::move(row));
  }
  return {{"format_version", 1}, {"kind", "sweep"}, {"rows", std::move(rows)}};
}

inline void write_sweep_csv(const SweepResult& result,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write sweep table: " + path);
  out << "model,parameter,status,mean_global_reward,mean_hospitalized,"
         "max_hospitalized,mean_action\n";
  char buf[256];
  for (const SweepRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf), "%s,\"%s\",%s,%.17g,%.17g,%.17g,%.17g\n",
                  r.model.c_str(), r.parameter.c_str(),
                  r.failed ? "failed" : "ok", r.mean_global_reward,
                  r.mean_hospitalized, r.max_hospitalized, r.mean_action);
    out << buf;
  }
}

inline std::string sweep_table_text(const SweepResult& result) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %-22s %-7s %14s %14s %14s %10s\n",
                "model", "parameter", "status", "R_g", "H_mean", "H_max",
                "p_mean");
  out << buf;
  for (const SweepRow& r : result.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%-10s %-22s %-7s %14.6g %14.6g %14.6g %10.4f\n",
                  r.model.c_str(), r.parameter.c_str(),
                  r.failed ? "failed" : "ok", r.mean_global_reward,
                  r.mean_hospitalized, r.max_hospitalized, r.mean_action);
    out << buf;
  }
  return out.str();
}

}  // namespace epicon
