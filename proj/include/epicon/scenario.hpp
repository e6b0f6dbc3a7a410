#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "epicon/epidemic.hpp"
#include "epicon/errors.hpp"
#include "epicon/reward.hpp"

namespace epicon {

// Everything scenario-specific about one region: how many people live there,
// how sick it starts out, how the disease progresses locally, and how it
// prices pandemic versus lockdown pain.
struct RegionSpec {
  std::string name;
  double population = 0.0;
  double initial_infected = 0.0;
  double initial_hospitalized = 0.0;
  double initial_recovered = 0.0;
  EpidemicRates rates;
  CostProfile profile;
};

// A complete, self-contained episode description.  The demand schedule is
// constant over time: the same matrix of desired trips applies every step.
struct Scenario {
  std::vector<RegionSpec> regions;
  MobilityMatrix demand;
  int horizon = 360;        // epidemic steps per episode
  int action_period = 4;    // steps each admission decision stays in force
  double ledger_discount = 0.9;  // lambda of the lockdown ledger

  int n_regions() const { return static_cast<int>(regions.size()); }

  int n_decisions() const { return horizon / action_period; }

  const MobilityMatrix& demand_at(int /*t*/) const { return demand; }

  std::vector<PandemicState> initial_states() const {
    std::vector<PandemicState> states(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const RegionSpec& r = regions[i];
      states[i].infected = r.initial_infected;
      states[i].hospitalized = r.initial_hospitalized;
      states[i].recovered = r.initial_recovered;
      states[i].susceptible = r.population - r.initial_infected -
                              r.initial_hospitalized - r.initial_recovered;
    }
    return states;
  }

  std::vector<EpidemicRates> rates() const {
    std::vector<EpidemicRates> out(regions.size());
    for (std::size_t i = 0; i < regions.size(); ++i) out[i] = regions[i].rates;
    return out;
  }

  // Nominal per-step inbound demand of region j, the normalizer of its
  // blocked fractions.  Fixed by the schedule, not by any policy.
  double nominal_inbound(int j) const { return demand.column_sum(j); }

  LockdownLedger make_ledger(int j) const {
    return {0.0, nominal_inbound(j), ledger_discount};
  }

  void validate() const {
    if (regions.empty()) throw ConfigError("scenario: needs at least one region");
    if (demand.size() != n_regions()) {
      throw ConfigError("scenario: demand matrix size must match region count");
    }
    if (horizon < 1) throw ConfigError("scenario: horizon must be >= 1");
    if (action_period < 1) {
      throw ConfigError("scenario: action_period must be >= 1");
    }
    if (horizon % action_period != 0) {
      throw ConfigError(
          "scenario: horizon must be a whole number of action periods");
    }
    if (!(ledger_discount > 0.0 && ledger_discount <= 1.0)) {
      throw ConfigError("scenario: ledger_discount must lie in (0, 1]");
    }
    for (int i = 0; i < n_regions(); ++i) {
      const RegionSpec& r = regions[i];
      std::string where = "region '" + r.name + "'";
      if (r.name.empty()) {
        throw ConfigError("scenario: region " + std::to_string(i) +
                          " needs a name");
      }
      if (!(r.population > 0.0) || !std::isfinite(r.population)) {
        throw ConfigError(where + ": population must be positive");
      }
      double seeded =
          r.initial_infected + r.initial_hospitalized + r.initial_recovered;
      if (r.initial_infected < 0.0 || r.initial_hospitalized < 0.0 ||
          r.initial_recovered < 0.0 || seeded > r.population) {
        throw ConfigError(where +
                          ": initial compartments must be >= 0 and sum to at "
                          "most the population");
      }
      r.rates.validate(where);
      r.profile.validate(where);
      // The schedule must at least be feasible from a full population; the
      // dynamics re-check every step as compartments drain.
      if (demand.row_sum(i) > r.population - r.initial_hospitalized) {
        throw ConfigError(where +
                          ": outbound demand exceeds the movable population");
      }
    }
  }
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const char* key,
                                           const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(where + ": missing required field '" + key + "'");
  }
  return *it;
}

inline double require_number(const nlohmann::json& j, const char* key,
                             const std::string& where) {
  const nlohmann::json& v = require_field(j, key, where);
  if (!v.is_number()) {
    throw ConfigError(where + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

inline double number_or(const nlohmann::json& j, const char* key,
                        double fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) {
    throw ConfigError(where + ": field '" + key + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
  using detail::number_or;
  using detail::require_field;
  using detail::require_number;

  if (!j.is_object()) throw ConfigError("scenario: root must be a JSON object");
  if (j.contains("schema_version") && j["schema_version"] != 1) {
    throw ConfigError("scenario: unsupported schema_version");
  }

  Scenario sc;
  sc.horizon = static_cast<int>(require_number(j, "horizon", "scenario"));
  sc.action_period =
      static_cast<int>(number_or(j, "action_period", 1.0, "scenario"));
  sc.ledger_discount = number_or(j, "ledger_discount", 0.9, "scenario");
  double default_kh =
      number_or(j, "default_base_pandemic_cost", 1.0, "scenario");

  const nlohmann::json& regions = require_field(j, "regions", "scenario");
  if (!regions.is_array() || regions.empty()) {
    throw ConfigError("scenario: 'regions' must be a non-empty array");
  }
  int n = static_cast<int>(regions.size());

  for (int i = 0; i < n; ++i) {
    const nlohmann::json& rj = regions[i];
    std::string where = "region[" + std::to_string(i) + "]";
    RegionSpec r;
    r.name = require_field(rj, "name", where).get<std::string>();
    where = "region '" + r.name + "'";
    r.population = require_number(rj, "population", where);
    r.initial_infected = number_or(rj, "initial_infected", 0.0, where);
    r.initial_hospitalized = number_or(rj, "initial_hospitalized", 0.0, where);
    r.initial_recovered = number_or(rj, "initial_recovered", 0.0, where);

    const nlohmann::json& rates = require_field(rj, "rates", where);
    if (rates.contains("beta")) {
      r.rates.beta_stay = require_number(rates, "beta", where + ".rates");
      r.rates.beta_move = r.rates.beta_stay;
    } else {
      r.rates.beta_stay = require_number(rates, "beta_stay", where + ".rates");
      r.rates.beta_move = require_number(rates, "beta_move", where + ".rates");
    }
    r.rates.gamma = require_number(rates, "gamma", where + ".rates");
    r.rates.theta = require_number(rates, "theta", where + ".rates");

    // Pandemic tolerance can be given in people or as a fraction of the
    // region's population; exactly one of the two spellings is required.
    bool has_abs = rj.contains("pandemic_tolerance");
    bool has_frac = rj.contains("pandemic_tolerance_fraction");
    if (has_abs == has_frac) {
      throw ConfigError(where +
                        ": give exactly one of 'pandemic_tolerance' (people) "
                        "or 'pandemic_tolerance_fraction'");
    }
    r.profile.pandemic_tolerance =
        has_abs ? require_number(rj, "pandemic_tolerance", where)
                : require_number(rj, "pandemic_tolerance_fraction", where) *
                      r.population;
    r.profile.lockdown_tolerance =
        require_number(rj, "lockdown_tolerance", where);
    r.profile.base_pandemic_cost =
        number_or(rj, "base_pandemic_cost", default_kh, where);
    r.profile.exempt_pandemic_cost =
        rj.value("exempt_pandemic_cost", false);
    sc.regions.push_back(std::move(r));
  }

  const nlohmann::json& demand = require_field(j, "demand", "scenario");
  if (demand.contains("uniform_route")) {
    sc.demand = MobilityMatrix::uniform(
        n, require_number(demand, "uniform_route", "demand"));
  } else if (demand.contains("matrix")) {
    const nlohmann::json& m = demand["matrix"];
    if (!m.is_array() || static_cast<int>(m.size()) != n) {
      throw ConfigError("demand.matrix must be an n x n array of numbers");
    }
    sc.demand = MobilityMatrix(n);
    for (int a = 0; a < n; ++a) {
      if (!m[a].is_array() || static_cast<int>(m[a].size()) != n) {
        throw ConfigError("demand.matrix must be an n x n array of numbers");
      }
      for (int b = 0; b < n; ++b) {
        double v = m[a][b].get<double>();
        if (a == b && v != 0.0) {
          throw ConfigError("demand.matrix diagonal must be zero");
        }
        if (a != b) sc.demand.set(a, b, v);
      }
    }
  } else {
    throw ConfigError("demand needs either 'uniform_route' or 'matrix'");
  }

  sc.validate();
  return sc;
}

// Canonical JSON form with everything resolved (tolerances in people, both
// transmission rates explicit).  Round-trips through scenario_from_json.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["horizon"] = sc.horizon;
  j["action_period"] = sc.action_period;
  j["ledger_discount"] = sc.ledger_discount;
  nlohmann::json regions = nlohmann::json::array();
  for (const RegionSpec& r : sc.regions) {
    nlohmann::json rj;
    rj["name"] = r.name;
    rj["population"] = r.population;
    rj["initial_infected"] = r.initial_infected;
    rj["initial_hospitalized"] = r.initial_hospitalized;
    rj["initial_recovered"] = r.initial_recovered;
    rj["rates"] = {{"beta_stay", r.rates.beta_stay},
                   {"beta_move", r.rates.beta_move},
                   {"gamma", r.rates.gamma},
                   {"theta", r.rates.theta}};
    rj["pandemic_tolerance"] = r.profile.pandemic_tolerance;
    rj["lockdown_tolerance"] = r.profile.lockdown_tolerance;
    rj["base_pandemic_cost"] = r.profile.base_pandemic_cost;
    rj["exempt_pandemic_cost"] = r.profile.exempt_pandemic_cost;
    regions.push_back(std::move(rj));
  }
  j["regions"] = std::move(regions);
  nlohmann::json matrix = nlohmann::json::array();
  for (int a = 0; a < sc.n_regions(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (int b = 0; b < sc.n_regions(); ++b) row.push_back(sc.demand(a, b));
    matrix.push_back(std::move(row));
  }
  j["demand"] = {{"matrix", std::move(matrix)}};
  return j;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario file " + path + " is not valid JSON: " +
                      e.what());
  }
  return scenario_from_json(j);
}

// The five-region outbreak benchmark: one high-transmission source region
// that is exempt from pandemic cost but extremely touchy about lockdowns,
// plus a 2x2 grid of receiver regions crossing high/low pandemic tolerance
// with high/low lockdown tolerance.
//
// Calibration targets (measured with fixed-dial rollouts):
//   - the source epidemic is self-sustaining (beta/gamma = 3) and peaks well
//     inside the horizon, so exported infections rise and then fade;
//   - receivers are subcritical on their own (beta/gamma = 0.7) — their
//     hospital load is driven by admitted travellers, which is the lever the
//     agents control;
//   - a fully open fragile receiver peaks near 6.5x its tolerance (a steep
//     but finite cost), a resilient one near 2.2x, so the pandemic axis
//     separates the type grid;
//   - the ledger discount keeps the worst-case lockdown cost of the source
//     region (tolerance 0.05) around e^20 per step: ruinous, as intended,
//     yet small enough that value estimates stay inside useful float range.
inline Scenario make_outbreak_scenario() {
  constexpr double kPopulation = 1.0e7;
  constexpr double kRoute = 5000.0;

  auto receiver = [&](const std::string& name, double h0_fraction,
                      double l0) {
    RegionSpec r;
    r.name = name;
    r.population = kPopulation;
    r.rates = {0.021, 0.021, 0.03, 0.03};
    r.profile.pandemic_tolerance = h0_fraction * kPopulation;
    r.profile.lockdown_tolerance = l0;
    r.profile.base_pandemic_cost = 1.0;
    return r;
  };

  Scenario sc;
  RegionSpec source;
  source.name = "source";
  source.population = kPopulation;
  source.initial_infected = 2000.0;
  source.rates = {0.12, 0.12, 0.04, 0.1};
  source.profile.pandemic_tolerance = 0.003 * kPopulation;
  source.profile.lockdown_tolerance = 0.05;
  source.profile.base_pandemic_cost = 1.0;
  source.profile.exempt_pandemic_cost = true;
  sc.regions.push_back(std::move(source));

  sc.regions.push_back(receiver("resilient-patient", 0.003, 72.0));
  sc.regions.push_back(receiver("resilient-restless", 0.003, 24.0));
  sc.regions.push_back(receiver("fragile-patient", 0.001, 72.0));
  sc.regions.push_back(receiver("fragile-restless", 0.001, 24.0));

  sc.demand = MobilityMatrix::uniform(5, kRoute);
  sc.horizon = 360;
  sc.action_period = 4;
  sc.ledger_discount = 0.5;
  sc.validate();
  return sc;
}

}  // namespace epicon
