#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "epicon/errors.hpp"
#include "epicon/scenario.hpp"
#include "epicon/trajectory.hpp"

namespace epicon {

struct RegionMetrics {
  std::string name;
  double mean_hospitalized = 0.0;  // time-mean of this region's H
  double max_hospitalized = 0.0;
  double total_demand_in = 0.0;
  double total_allowed_in = 0.0;
  double mean_action = 1.0;  // total allowed / total demanded (1 if no demand)
  double mean_local_reward = 0.0;
};

// One cell of the 2x2 tolerance-type grid.  Cells are ordered
// (H+,L+), (H+,L-), (H-,L+), (H-,L-) where + is the larger tolerance.
struct TypeCell {
  std::string label;
  double pandemic_tolerance = 0.0;
  double lockdown_tolerance = 0.0;
  std::vector<int> regions;
  double mean_action = 1.0;
  double mean_hospitalized = 0.0;  // time-mean of the cell's summed H
};

struct TypeAnalysis {
  std::array<TypeCell, 4> cells;
  std::vector<int> excluded_regions;  // cost-exempt regions (the source)
  double excluded_mean_action = 1.0;
  // Per-step admission ratio of each cell, for the temporal curves.
  std::vector<std::vector<double>> action_series;
};

struct MetricReport {
  int steps = 0;
  double mean_global_reward = 0.0;
  double mean_hospitalized = 0.0;  // time-mean of the cross-region H total
  double max_hospitalized = 0.0;   // max over steps of that total
  double mean_action = 1.0;        // episode-wide allowed/demanded ratio
  std::vector<RegionMetrics> per_region;
  std::optional<TypeAnalysis> types;
  // Plot-ready series, one entry per epidemic step.
  std::vector<double> global_reward_series;
  std::vector<double> total_hospitalized_series;
  std::vector<std::vector<double>> hospitalized_series;  // [region][t]
  std::vector<std::vector<double>> action_series;        // [region][t]
};

namespace detail {

inline double ratio_or_open(double allowed, double demand) {
  return demand > 0.0 ? allowed / demand : 1.0;
}

// Classify non-exempt regions into the 2x2 tolerance grid.  Requires exactly
// two distinct pandemic tolerances and two distinct lockdown tolerances.
inline std::optional<std::array<TypeCell, 4>> classify_types(
    const Scenario& sc, std::vector<int>& excluded) {
  std::set<double> h_levels, l_levels;
  for (int i = 0; i < sc.n_regions(); ++i) {
    if (sc.regions[i].profile.exempt_pandemic_cost) {
      excluded.push_back(i);
      continue;
    }
    h_levels.insert(sc.regions[i].profile.pandemic_tolerance);
    l_levels.insert(sc.regions[i].profile.lockdown_tolerance);
  }
  if (h_levels.size() != 2 || l_levels.size() != 2) return std::nullopt;

  double h_minus = *h_levels.begin(), h_plus = *h_levels.rbegin();
  double l_minus = *l_levels.begin(), l_plus = *l_levels.rbegin();
  std::array<TypeCell, 4> cells;
  cells[0] = {"H+L+", h_plus, l_plus, {}, 1.0, 0.0};
  cells[1] = {"H+L-", h_plus, l_minus, {}, 1.0, 0.0};
  cells[2] = {"H-L+", h_minus, l_plus, {}, 1.0, 0.0};
  cells[3] = {"H-L-", h_minus, l_minus, {}, 1.0, 0.0};
  for (int i = 0; i < sc.n_regions(); ++i) {
    const CostProfile& p = sc.regions[i].profile;
    if (p.exempt_pandemic_cost) continue;
    for (TypeCell& cell : cells) {
      if (p.pandemic_tolerance == cell.pandemic_tolerance &&
          p.lockdown_tolerance == cell.lockdown_tolerance) {
        cell.regions.push_back(i);
        break;
      }
    }
  }
  return cells;
}

}  // namespace detail

// Pure function of the trajectory document: the same saved trajectory always
// produces the identical report.
inline MetricReport compute_metrics(const Trajectory& traj) {
  if (traj.steps.empty()) {
    throw ContractError("cannot compute metrics of an empty trajectory");
  }
  int n = traj.n_regions();
  int steps = static_cast<int>(traj.steps.size());

  MetricReport report;
  report.steps = steps;
  report.per_region.resize(n);
  report.hospitalized_series.assign(n, {});
  report.action_series.assign(n, {});
  for (int j = 0; j < n; ++j) {
    report.per_region[j].name = traj.region_names[j];
    report.hospitalized_series[j].reserve(steps);
    report.action_series[j].reserve(steps);
  }

  double reward_sum = 0.0, h_total_sum = 0.0, h_total_max = 0.0;
  double demand_sum = 0.0, allowed_sum = 0.0;
  for (const StepRecord& rec : traj.steps) {
    double h_total = 0.0;
    for (int j = 0; j < n; ++j) {
      const double h = rec.states[j].hospitalized;
      h_total += h;
      RegionMetrics& rm = report.per_region[j];
      rm.mean_hospitalized += h;
      rm.max_hospitalized = std::max(rm.max_hospitalized, h);
      rm.total_demand_in += rec.demand_in[j];
      rm.total_allowed_in += rec.allowed_in[j];
      rm.mean_local_reward += rec.local_rewards[j];
      report.hospitalized_series[j].push_back(h);
      report.action_series[j].push_back(
          detail::ratio_or_open(rec.allowed_in[j], rec.demand_in[j]));
    }
    reward_sum += rec.global_reward;
    h_total_sum += h_total;
    h_total_max = std::max(h_total_max, h_total);
    report.global_reward_series.push_back(rec.global_reward);
    report.total_hospitalized_series.push_back(h_total);
  }
  for (int j = 0; j < n; ++j) {
    RegionMetrics& rm = report.per_region[j];
    rm.mean_hospitalized /= steps;
    rm.mean_local_reward /= steps;
    rm.mean_action = detail::ratio_or_open(rm.total_allowed_in,
                                           rm.total_demand_in);
    demand_sum += rm.total_demand_in;
    allowed_sum += rm.total_allowed_in;
  }
  report.mean_global_reward = reward_sum / steps;
  report.mean_hospitalized = h_total_sum / steps;
  report.max_hospitalized = h_total_max;
  report.mean_action = detail::ratio_or_open(allowed_sum, demand_sum);

  // Type-wise view, when the embedded scenario defines a 2x2 grid.
  Scenario sc = scenario_from_json(traj.scenario_doc);
  TypeAnalysis analysis;
  auto cells = detail::classify_types(sc, analysis.excluded_regions);
  if (cells) {
    analysis.cells = *cells;
    analysis.action_series.assign(4, {});
    for (int c = 0; c < 4; ++c) {
      TypeCell& cell = analysis.cells[c];
      double cell_demand = 0.0, cell_allowed = 0.0, cell_h_sum = 0.0;
      analysis.action_series[c].reserve(steps);
      for (const StepRecord& rec : traj.steps) {
        double step_demand = 0.0, step_allowed = 0.0;
        for (int r : cell.regions) {
          step_demand += rec.demand_in[r];
          step_allowed += rec.allowed_in[r];
          cell_h_sum += rec.states[r].hospitalized;
        }
        cell_demand += step_demand;
        cell_allowed += step_allowed;
        analysis.action_series[c].push_back(
            detail::ratio_or_open(step_allowed, step_demand));
      }
      cell.mean_action = detail::ratio_or_open(cell_allowed, cell_demand);
      cell.mean_hospitalized = cell_h_sum / steps;
    }
    double excluded_demand = 0.0, excluded_allowed = 0.0;
    for (int r : analysis.excluded_regions) {
      excluded_demand += report.per_region[r].total_demand_in;
      excluded_allowed += report.per_region[r].total_allowed_in;
    }
    analysis.excluded_mean_action =
        detail::ratio_or_open(excluded_allowed, excluded_demand);
    report.types = std::move(analysis);
  }
  return report;
}

inline nlohmann::json metrics_to_json(const MetricReport& report) {
  nlohmann::json per_region = nlohmann::json::array();
  for (const RegionMetrics& rm : report.per_region) {
    per_region.push_back({{"name", rm.name},
                          {"mean_hospitalized", rm.mean_hospitalized},
                          {"max_hospitalized", rm.max_hospitalized},
                          {"total_demand_in", rm.total_demand_in},
                          {"total_allowed_in", rm.total_allowed_in},
                          {"mean_action", rm.mean_action},
                          {"mean_local_reward", rm.mean_local_reward}});
  }
  nlohmann::json j{{"format_version", 1},
                   {"kind", "metrics"},
                   {"steps", report.steps},
                   {"mean_global_reward", report.mean_global_reward},
                   {"mean_hospitalized", report.mean_hospitalized},
                   {"max_hospitalized", report.max_hospitalized},
                   {"mean_action", report.mean_action},
                   {"per_region", std::move(per_region)},
                   {"series",
                    {{"global_reward", report.global_reward_series},
                     {"total_hospitalized", report.total_hospitalized_series},
                     {"hospitalized", report.hospitalized_series},
                     {"action", report.action_series}}}};
  if (report.types) {
    nlohmann::json cells = nlohmann::json::array();
    nlohmann::json radar = nlohmann::json::array();
    for (const TypeCell& cell : report.types->cells) {
      cells.push_back({{"label", cell.label},
                       {"pandemic_tolerance", cell.pandemic_tolerance},
                       {"lockdown_tolerance", cell.lockdown_tolerance},
                       {"regions", cell.regions},
                       {"mean_action", cell.mean_action},
                       {"mean_hospitalized", cell.mean_hospitalized}});
      radar.push_back({{"axis", cell.label}, {"value", cell.mean_action}});
    }
    j["types"] = {{"cells", std::move(cells)},
                  {"radar", std::move(radar)},
                  {"excluded_regions", report.types->excluded_regions},
                  {"excluded_mean_action", report.types->excluded_mean_action},
                  {"action_series", report.types->action_series}};
  }
  return j;
}

inline void save_metrics(const MetricReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write metrics file: " + path);
  out << metrics_to_json(report).dump(2) << "\n";
}

// Temporal admission-ratio curves per tolerance type, one row per step.
inline void write_type_series_csv(const MetricReport& report,
                                  const std::string& path) {
  if (!report.types) {
    throw ContractError("trajectory's scenario has no 2x2 tolerance grid");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write type-series file: " + path);
  out << "t";
  for (const TypeCell& cell : report.types->cells) {
    out << ",p_" << cell.label;
  }
  out << "\n";
  char buf[64];
  for (int t = 0; t < report.steps; ++t) {
    out << t;
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), ",%.17g",
                    report.types->action_series[c][t]);
      out << buf;
    }
    out << "\n";
  }
}

// Radar-plot vertices: one axis per tolerance type, value = episode p-bar.
inline void write_radar_csv(const MetricReport& report,
                            const std::string& path) {
  if (!report.types) {
    throw ContractError("trajectory's scenario has no 2x2 tolerance grid");
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write radar file: " + path);
  out << "axis,mean_action\n";
  char buf[64];
  for (const TypeCell& cell : report.types->cells) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g\n", cell.label.c_str(),
                  cell.mean_action);
    out << buf;
  }
}

}  // namespace epicon
