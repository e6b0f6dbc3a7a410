#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace epicon::oracle {

// Deliberately naive reference implementations used only by tests and the
// `oracle-check` command.  They re-derive the dynamics from the definitions
// with plain loops over raw arrays, sharing no helpers with the production
// code, so agreement between the two is meaningful evidence rather than a
// tautology.

// Compartments as a raw array: [S, I, H, R].
using RawState = std::array<double, 4>;
using RawMatrix = std::vector<std::vector<double>>;

struct RawRates {
  double beta_stay, beta_move, gamma, theta;
};

// One epidemic step computed straight from the update equations:
//   allowed(i,j) = demand(i,j) * action(i,j)
//   stay_c(i)    = c(i) - sum_j allowed(i,j)/movable(i) * c(i)   (c in S,I,R)
//   move_c(i)    = sum_j allowed(j,i)/movable(j) * c(j)
//   infections within each pool: beta * S * I / (S + I + R), capped by S
//   hospitalization gamma*I capped by I, recovery theta*H capped by H.
inline std::vector<RawState> reference_epidemic_step(
    const std::vector<RawState>& states, const RawMatrix& demand,
    const RawMatrix& action, const std::vector<RawRates>& rates) {
  std::size_t n = states.size();

  RawMatrix allowed(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) allowed[i][j] = demand[i][j] * action[i][j];
    }
  }

  std::vector<double> movable(n);
  for (std::size_t i = 0; i < n; ++i) {
    movable[i] = states[i][0] + states[i][1] + states[i][3];
  }

  // Travel: subtract each outbound route individually, then add arrivals.
  std::vector<std::array<double, 3>> stay(n), move(n);
  for (std::size_t i = 0; i < n; ++i) {
    stay[i] = {states[i][0], states[i][1], states[i][3]};
    move[i] = {0.0, 0.0, 0.0};
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || movable[i] <= 0.0) continue;
      double f = allowed[i][j] / movable[i];
      stay[i][0] -= f * states[i][0];
      stay[i][1] -= f * states[i][1];
      stay[i][2] -= f * states[i][3];
      move[j][0] += f * states[i][0];
      move[j][1] += f * states[i][1];
      move[j][2] += f * states[i][3];
    }
  }

  std::vector<RawState> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    double ns = stay[i][0] + stay[i][1] + stay[i][2];
    double nm = move[i][0] + move[i][1] + move[i][2];
    double inf_s = ns > 0.0
                       ? rates[i].beta_stay * stay[i][0] * stay[i][1] / ns
                       : 0.0;
    if (inf_s > stay[i][0]) inf_s = stay[i][0];
    double inf_m = nm > 0.0
                       ? rates[i].beta_move * move[i][0] * move[i][1] / nm
                       : 0.0;
    if (inf_m > move[i][0]) inf_m = move[i][0];

    double s_hat = stay[i][0] + move[i][0];
    double i_hat = stay[i][1] + move[i][1];
    double r_hat = stay[i][2] + move[i][2];
    double h = states[i][2];

    double hosp = rates[i].gamma * i_hat;
    if (hosp > i_hat) hosp = i_hat;
    double rec = rates[i].theta * h;
    if (rec > h) rec = h;

    next[i][0] = s_hat - inf_s - inf_m;
    next[i][1] = i_hat + inf_s + inf_m - hosp;
    next[i][2] = h + hosp - rec;
    next[i][3] = r_hat + rec;
  }
  return next;
}

// Lockdown penalty evaluated from its closed form: the discounted sum
//   L_t = sum_{k=1..t} lambda^{t-k+1} * blocked[k-1]
// computed directly with pow, instead of the incremental recursion the
// production ledger uses.
inline double reference_lockdown_penalty(const std::vector<double>& blocked,
                                         double lambda) {
  double total = 0.0;
  std::size_t t = blocked.size();
  for (std::size_t k = 1; k <= t; ++k) {
    total += std::pow(lambda, static_cast<double>(t - k + 1)) * blocked[k - 1];
  }
  return total;
}

// Central finite difference of a scalar function, used to cross-check
// analytic gradients coordinate by coordinate.
template <typename F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace epicon::oracle
