#pragma once

#include <vector>

#include <Eigen/Dense>

#include "epicon/environment.hpp"
#include "epicon/errors.hpp"
#include "epicon/scenario.hpp"

namespace epicon {

// Turns an observation into one fixed-width slice per region, scaled so the
// interesting dynamic range sits near the unit interval:
//   [0] asymptomatic pool / initial population
//   [1] pool delta since the last decision / initial population
//   [2] hospitalized / the region's pandemic tolerance
//   [3] hospitalized delta / pandemic tolerance
//   [4] recovered / initial population
//   [5] recovered delta / initial population
//   [6] elapsed time / horizon
//   [7] forecast inbound demand / nominal inbound demand
class FeatureExtractor {
 public:
  static constexpr int kSliceDim = 8;

  explicit FeatureExtractor(const Scenario& scenario)
      : n_(scenario.n_regions()), horizon_(scenario.horizon) {
    for (int j = 0; j < n_; ++j) {
      populations_.push_back(scenario.regions[j].population);
      tolerances_.push_back(scenario.regions[j].profile.pandemic_tolerance);
      nominal_inbound_.push_back(scenario.nominal_inbound(j));
    }
  }

  int n_regions() const { return n_; }
  int feature_dim() const { return n_ * kSliceDim; }

  Eigen::VectorXd features(const Observation& obs) const {
    if (obs.n_regions() != n_) {
      throw ContractError("observation does not match the scenario");
    }
    Eigen::VectorXd out(feature_dim());
    double t_frac = static_cast<double>(obs.time) / horizon_;
    for (int j = 0; j < n_; ++j) {
      const VisiblePandemicState& v = obs.visible_states[j];
      const VisiblePandemicState& d = obs.visible_deltas[j];
      double pop = populations_[j];
      double tol = tolerances_[j];
      double demand = 0.0;
      for (const MobilityMatrix& m : obs.demand_forecast) {
        demand += m.column_sum(j);
      }
      demand /= obs.demand_forecast.empty()
                    ? 1.0
                    : static_cast<double>(obs.demand_forecast.size());
      double* s = out.data() + j * kSliceDim;
      s[0] = v.asymptomatic_pool / pop;
      s[1] = d.asymptomatic_pool / pop;
      s[2] = v.hospitalized / tol;
      s[3] = d.hospitalized / tol;
      s[4] = v.recovered / pop;
      s[5] = d.recovered / pop;
      s[6] = t_frac;
      s[7] = nominal_inbound_[j] > 0.0 ? demand / nominal_inbound_[j] : 1.0;
    }
    return out;
  }

 private:
  int n_;
  int horizon_;
  std::vector<double> populations_;
  std::vector<double> tolerances_;
  std::vector<double> nominal_inbound_;
};

}  // namespace epicon
