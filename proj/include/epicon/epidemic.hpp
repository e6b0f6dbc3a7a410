#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "epicon/errors.hpp"

namespace epicon {

// One region's epidemic compartments.  Values are real-valued population
// masses (people), not integers: the dynamics are deterministic mean-field
// difference equations.
struct PandemicState {
  double susceptible = 0.0;
  double infected = 0.0;      // asymptomatic/undetected: travels freely
  double hospitalized = 0.0;  // detected: never travels
  double recovered = 0.0;

  double population() const {
    return susceptible + infected + hospitalized + recovered;
  }

  // Share of the population allowed to travel.  Hospitalized people stay put.
  double movable() const { return susceptible + infected + recovered; }
};

// What an outside observer (and therefore a policy) can see of a region:
// susceptible and undetected-infected people are indistinguishable.
struct VisiblePandemicState {
  double asymptomatic_pool = 0.0;  // S + I
  double hospitalized = 0.0;
  double recovered = 0.0;
};

inline VisiblePandemicState visible(const PandemicState& s) {
  return {s.susceptible + s.infected, s.hospitalized, s.recovered};
}

// Per-region disease progression rates, constant over an episode.
// `beta_stay` applies to people who stayed home, `beta_move` to the mixing
// pool of arrivals; both use the *destination* region's value.
struct EpidemicRates {
  double beta_stay = 0.0;
  double beta_move = 0.0;
  double gamma = 0.0;  // infected -> hospitalized
  double theta = 0.0;  // hospitalized -> recovered

  void validate(const std::string& where) const {
    auto check = [&](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError(where + ": rate '" + name +
                          "' must be finite and non-negative");
      }
    };
    check(beta_stay, "beta_stay");
    check(beta_move, "beta_move");
    check(gamma, "gamma");
    check(theta, "theta");
    if (gamma > 1.0) throw ConfigError(where + ": gamma must be <= 1");
    if (theta > 1.0) throw ConfigError(where + ": theta must be <= 1");
  }
};

// Square matrix of people moving from region i (row) to region j (column)
// in one step.  The diagonal is identically zero: staying home is not travel.
class MobilityMatrix {
 public:
  MobilityMatrix() : n_(0) {}

  explicit MobilityMatrix(int n) : n_(n), cells_(n * n, 0.0) {
    if (n <= 0) throw ConfigError("mobility matrix needs at least one region");
  }

  // All off-diagonal routes carry the same demand.
  static MobilityMatrix uniform(int n, double per_route) {
    MobilityMatrix m(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) m.set(i, j, per_route);
      }
    }
    return m;
  }

  int size() const { return n_; }

  double operator()(int i, int j) const { return cells_[i * n_ + j]; }

  void set(int i, int j, double value) {
    if (i == j && value != 0.0) {
      throw ConfigError("mobility matrix diagonal must stay zero");
    }
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ConfigError("mobility entries must be finite and non-negative");
    }
    cells_[i * n_ + j] = value;
  }

  // Total inbound traffic of region j.
  double column_sum(int j) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += (*this)(i, j);
    return s;
  }

  // Total outbound traffic of region i.
  double row_sum(int i) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j);
    return s;
  }

  bool operator==(const MobilityMatrix& other) const {
    return n_ == other.n_ && cells_ == other.cells_;
  }

 private:
  int n_;
  std::vector<double> cells_;  // row-major
};

// Admission fractions in [0, 1].  Column j belongs to region j: a region
// controls what share of each inbound route it admits.
class ActionMatrix {
 public:
  ActionMatrix() : n_(0) {}

  explicit ActionMatrix(int n) : n_(n), cells_(n * n, 1.0) {
    if (n <= 0) throw ConfigError("action matrix needs at least one region");
  }

  static ActionMatrix constant(int n, double p) {
    ActionMatrix a(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a.set(i, j, p);
    }
    return a;
  }

  int size() const { return n_; }

  double operator()(int i, int j) const { return cells_[i * n_ + j]; }

  void set(int i, int j, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw ContractError("admission fractions must lie in [0, 1]");
    }
    cells_[i * n_ + j] = value;
  }

  // Install region j's admission decisions for all inbound routes.
  void set_column(int j, const std::vector<double>& fractions) {
    if (static_cast<int>(fractions.size()) != n_) {
      throw ContractError("admission column has wrong length");
    }
    for (int i = 0; i < n_; ++i) set(i, j, fractions[i]);
  }

 private:
  int n_;
  std::vector<double> cells_;  // row-major
};

// Element-wise product of demand and admission: the travel that actually
// happens once each destination has throttled its inbound routes.
inline MobilityMatrix actual_mobility(const MobilityMatrix& demand,
                                      const ActionMatrix& action) {
  if (demand.size() != action.size()) {
    throw ConfigError("demand and action matrices disagree on region count");
  }
  int n = demand.size();
  MobilityMatrix actual(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) actual.set(i, j, demand(i, j) * action(i, j));
    }
  }
  return actual;
}

// A region's population after the travel phase, split into the residents who
// stayed and the visitors who arrived.  The two groups mix in separate
// transmission pools until the spread phase merges them.
struct MixedState {
  double stay_s = 0.0, stay_i = 0.0, stay_r = 0.0;
  double move_s = 0.0, move_i = 0.0, move_r = 0.0;
  double hospitalized = 0.0;

  double stay_total() const { return stay_s + stay_i + stay_r; }
  double move_total() const { return move_s + move_i + move_r; }

  PandemicState combined() const {
    return {stay_s + move_s, stay_i + move_i, hospitalized, stay_r + move_r};
  }
};

// Travel phase: move people along the admitted routes.  Each outbound flow is
// drawn proportionally from the origin's movable compartments (S, I, R); the
// hospitalized never leave.  Throws if a region is asked to send out more
// movable people than it has.
inline std::vector<MixedState> apply_mobility(
    const std::vector<PandemicState>& states, const MobilityMatrix& allowed,
    int step_index = -1) {
  int n = allowed.size();
  if (static_cast<int>(states.size()) != n) {
    throw ConfigError("state vector and mobility matrix disagree on regions");
  }

  std::vector<double> movable(n), out_fraction(n);
  for (int i = 0; i < n; ++i) {
    movable[i] = states[i].movable();
    double out = allowed.row_sum(i);
    if (out > movable[i]) {
      std::string when =
          step_index >= 0 ? " at step " + std::to_string(step_index) : "";
      throw InfeasibleError(
          "region " + std::to_string(i) + when + " has outbound demand " +
          std::to_string(out) + " exceeding its movable population " +
          std::to_string(movable[i]));
    }
    out_fraction[i] = movable[i] > 0.0 ? out / movable[i] : 0.0;
  }

  std::vector<MixedState> mixed(n);
  for (int i = 0; i < n; ++i) {
    double keep = 1.0 - out_fraction[i];
    mixed[i].stay_s = states[i].susceptible * keep;
    mixed[i].stay_i = states[i].infected * keep;
    mixed[i].stay_r = states[i].recovered * keep;
    mixed[i].hospitalized = states[i].hospitalized;
    for (int j = 0; j < n; ++j) {
      if (j == i || movable[j] <= 0.0) continue;
      double w = allowed(j, i) / movable[j];
      mixed[i].move_s += w * states[j].susceptible;
      mixed[i].move_i += w * states[j].infected;
      mixed[i].move_r += w * states[j].recovered;
    }
  }
  return mixed;
}

// Spread phase: transmission within the stayer and visitor pools separately,
// then hospitalization and recovery on the merged totals.  Flows are capped
// so no compartment can be driven negative; the expressions are arranged so
// every output is a sum of non-negative terms.
inline PandemicState spread_within(const MixedState& m,
                                   const EpidemicRates& rates) {
  double stay_n = m.stay_total();
  double move_n = m.move_total();

  double inf_stay =
      stay_n > 0.0 ? rates.beta_stay * m.stay_s * m.stay_i / stay_n : 0.0;
  inf_stay = std::min(inf_stay, m.stay_s);
  double inf_move =
      move_n > 0.0 ? rates.beta_move * m.move_s * m.move_i / move_n : 0.0;
  inf_move = std::min(inf_move, m.move_s);

  double infected_total = m.stay_i + m.move_i;
  double hospitalizations = std::min(rates.gamma * infected_total,
                                     infected_total);
  double recoveries = std::min(rates.theta * m.hospitalized, m.hospitalized);

  PandemicState next;
  next.susceptible = (m.stay_s - inf_stay) + (m.move_s - inf_move);
  next.infected = (infected_total - hospitalizations) + inf_stay + inf_move;
  next.hospitalized = (m.hospitalized - recoveries) + hospitalizations;
  next.recovered = (m.stay_r + m.move_r) + recoveries;
  return next;
}

// One full epidemic step: throttle demand by the admission matrix, move
// people, then run within-region transmission everywhere.
inline std::vector<PandemicState> epidemic_step(
    const std::vector<PandemicState>& states, const MobilityMatrix& demand,
    const ActionMatrix& action, const std::vector<EpidemicRates>& rates,
    int step_index = -1) {
  int n = demand.size();
  if (static_cast<int>(rates.size()) != n) {
    throw ConfigError("rates vector and mobility matrix disagree on regions");
  }
  MobilityMatrix allowed = actual_mobility(demand, action);
  std::vector<MixedState> mixed = apply_mobility(states, allowed, step_index);
  std::vector<PandemicState> next(n);
  for (int i = 0; i < n; ++i) next[i] = spread_within(mixed[i], rates[i]);
  return next;
}

}  // namespace epicon
