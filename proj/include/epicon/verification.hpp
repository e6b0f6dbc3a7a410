#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "epicon/epidemic.hpp"
#include "epicon/net.hpp"
#include "epicon/oracle.hpp"
#include "epicon/reward.hpp"
#include "epicon/rng.hpp"

namespace epicon::verification {

// Randomized equivalence suites shared by the `oracle-check` command and the
// acceptance tests.  Each runner drives the production code and the naive
// reference over the same random instances and reports the worst relative
// disagreement it saw.

inline double relative_gap(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-30});
}

struct EpidemicInstance {
  std::vector<PandemicState> states;
  MobilityMatrix demand;
  ActionMatrix action;
  std::vector<EpidemicRates> rates;
};

inline EpidemicInstance random_epidemic_instance(Rng& rng, int n) {
  EpidemicInstance inst;
  inst.demand = MobilityMatrix(n);
  inst.action = ActionMatrix(n);
  for (int i = 0; i < n; ++i) {
    PandemicState s;
    s.susceptible = rng.uniform(1e3, 1e6);
    s.infected = rng.uniform(0.0, 1e4);
    s.hospitalized = rng.uniform(0.0, 1e4);
    s.recovered = rng.uniform(0.0, 1e5);
    inst.states.push_back(s);
    EpidemicRates r;
    r.beta_stay = rng.uniform(0.0, 1.2);
    r.beta_move = rng.uniform(0.0, 1.2);
    r.gamma = rng.uniform(0.0, 1.0);
    r.theta = rng.uniform(0.0, 1.0);
    inst.rates.push_back(r);
  }
  for (int i = 0; i < n; ++i) {
    double cap = inst.states[i].movable() / (2.0 * n);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      inst.demand.set(i, j, rng.uniform(0.0, cap));
      inst.action.set(i, j, rng.uniform());
    }
  }
  return inst;
}

inline double epidemic_step_vs_reference(Rng& rng, int trials, int n) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    EpidemicInstance inst = random_epidemic_instance(rng, n);
    std::vector<PandemicState> got =
        epidemic_step(inst.states, inst.demand, inst.action, inst.rates);

    std::vector<oracle::RawState> raw;
    oracle::RawMatrix demand(n, std::vector<double>(n, 0.0));
    oracle::RawMatrix action(n, std::vector<double>(n, 0.0));
    std::vector<oracle::RawRates> rates;
    for (int i = 0; i < n; ++i) {
      raw.push_back({inst.states[i].susceptible, inst.states[i].infected,
                     inst.states[i].hospitalized, inst.states[i].recovered});
      rates.push_back({inst.rates[i].beta_stay, inst.rates[i].beta_move,
                       inst.rates[i].gamma, inst.rates[i].theta});
      for (int j = 0; j < n; ++j) {
        demand[i][j] = inst.demand(i, j);
        action[i][j] = inst.action(i, j);
      }
    }
    std::vector<oracle::RawState> want =
        oracle::reference_epidemic_step(raw, demand, action, rates);
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, relative_gap(got[i].susceptible, want[i][0]));
      worst = std::max(worst, relative_gap(got[i].infected, want[i][1]));
      worst = std::max(worst, relative_gap(got[i].hospitalized, want[i][2]));
      worst = std::max(worst, relative_gap(got[i].recovered, want[i][3]));
    }
  }
  return worst;
}

inline double ledger_recursion_vs_reference(Rng& rng, int trials, int steps) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    double lambda = rng.uniform(0.05, 1.0);
    LockdownLedger ledger{0.0, 1.0, lambda};
    std::vector<double> blocked_history;
    for (int t = 0; t < steps; ++t) {
      double blocked = rng.uniform();
      blocked_history.push_back(blocked);
      ledger = update_lockdown_penalty(ledger, 1.0, 1.0 - blocked);
      double direct =
          oracle::reference_lockdown_penalty(blocked_history, lambda);
      worst = std::max(worst, relative_gap(ledger.penalty, direct));
    }
  }
  return worst;
}

namespace detail {

template <typename Forward, typename Params, typename Grads>
double worst_param_gap(Forward&& loss, Params& params, const Grads& grads) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    double saved = params[i];
    double fd = oracle::central_difference(
        [&](double v) {
          params[i] = v;
          double out = loss();
          params[i] = saved;
          return out;
        },
        saved, 1e-5);
    double scale = std::max({std::fabs(grads[i]), std::fabs(fd), 1e-6});
    worst = std::max(worst, std::fabs(grads[i] - fd) / scale);
  }
  return worst;
}

}  // namespace detail

// Reverse-mode gradients of the value network against central differences,
// across `trials` random initializations.  Returns the worst per-coordinate
// relative error.
inline double critic_gradient_vs_difference(Rng& rng, int trials,
                                            int input_dim, int hidden) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    FeedForward critic(
        {input_dim, hidden, hidden, 1},
        {Activation::tanh, Activation::tanh, Activation::identity});
    Rng init = rng.fork("critic", trial);
    critic.init_glorot(init);
    Eigen::VectorXd x(input_dim);
    for (int i = 0; i < input_dim; ++i) x[i] = init.uniform(-1.0, 1.0);

    FeedForward::Workspace ws;
    critic.forward(x, ws);
    critic.zero_grads();
    critic.backward(ws, Eigen::VectorXd::Ones(1));
    auto loss = [&]() { return critic.forward(x)[0]; };
    worst = std::max(
        worst, detail::worst_param_gap(loss, critic.params(), critic.grads()));
  }
  return worst;
}

// Same check for the policy network, including the shared-encoder path.
inline double actor_gradient_vs_difference(Rng& rng, int trials, int n_regions,
                                           int slice_dim, int encode_dim,
                                           int head_hidden) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    EncoderActor actor(n_regions, slice_dim, encode_dim, head_hidden,
                       n_regions);
    Rng init = rng.fork("actor", trial);
    actor.init_glorot(init);
    Eigen::VectorXd f(n_regions * slice_dim), cot(n_regions);
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = init.uniform(-1.0, 1.0);
    for (int i = 0; i < n_regions; ++i) cot[i] = init.uniform(-1.0, 1.0);
    int target = static_cast<int>(init.uniform_index(n_regions));

    EncoderActor::Workspace ws;
    actor.forward(f, target, ws);
    actor.zero_grads();
    actor.backward(ws, target, cot);
    auto loss = [&]() { return actor.forward(f, target).dot(cot); };
    for (FeedForward* part : {&actor.encoder(), &actor.head()}) {
      worst = std::max(worst, detail::worst_param_gap(loss, part->params(),
                                                      part->grads()));
    }
  }
  return worst;
}

}  // namespace epicon::verification
