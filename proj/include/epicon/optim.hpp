#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "epicon/errors.hpp"

namespace epicon {

// Adam with bias correction over a fixed set of parameter blocks.  The block
// shapes are locked in on the first step; every block shares one time index.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(epsilon) {
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
      throw ConfigError("Adam decay rates must lie in [0,1)");
    }
  }

  long steps_taken() const { return t_; }

  void step(const std::vector<Eigen::VectorXd*>& params,
            const std::vector<Eigen::VectorXd*>& grads) {
    if (params.size() != grads.size()) {
      throw ContractError("parameter and gradient block counts differ");
    }
    if (m_.empty()) {
      for (const Eigen::VectorXd* p : params) {
        m_.push_back(Eigen::VectorXd::Zero(p->size()));
        v_.push_back(Eigen::VectorXd::Zero(p->size()));
      }
    }
    if (params.size() != m_.size()) {
      throw ContractError("block count changed between Adam steps");
    }
    ++t_;
    double m_scale = 1.0 / (1.0 - std::pow(b1_, t_));
    double v_scale = 1.0 / (1.0 - std::pow(b2_, t_));
    for (std::size_t b = 0; b < params.size(); ++b) {
      Eigen::VectorXd& p = *params[b];
      const Eigen::VectorXd& g = *grads[b];
      if (p.size() != m_[b].size() || g.size() != m_[b].size()) {
        throw ContractError("block shape changed between Adam steps");
      }
      m_[b] = b1_ * m_[b] + (1.0 - b1_) * g;
      v_[b] =
          (b2_ * v_[b].array() + (1.0 - b2_) * g.array().square()).matrix();
      p.array() -= lr_ * (m_[b].array() * m_scale) /
                   ((v_[b].array() * v_scale).sqrt() + eps_);
    }
  }

  void step(Eigen::VectorXd& params, Eigen::VectorXd& grads) {
    step(std::vector<Eigen::VectorXd*>{&params},
         std::vector<Eigen::VectorXd*>{&grads});
  }

 private:
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<Eigen::VectorXd> m_, v_;
};

inline double global_grad_norm(const std::vector<Eigen::VectorXd*>& grads) {
  double sq = 0.0;
  for (const Eigen::VectorXd* g : grads) sq += g->squaredNorm();
  return std::sqrt(sq);
}

// Rescales the blocks in place when their joint norm exceeds `max_norm`.
// Returns the norm before clipping.
inline double clip_global_norm(const std::vector<Eigen::VectorXd*>& grads,
                               double max_norm) {
  if (max_norm <= 0.0) throw ConfigError("gradient clip must be positive");
  double norm = global_grad_norm(grads);
  if (norm > max_norm) {
    double scale = max_norm / norm;
    for (Eigen::VectorXd* g : grads) *g *= scale;
  }
  return norm;
}

// Polyak averaging: target <- (1 - tau) * target + tau * online.
inline void soft_update(const std::vector<Eigen::VectorXd*>& target,
                        const std::vector<const Eigen::VectorXd*>& online,
                        double tau) {
  if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must lie in [0,1]");
  if (target.size() != online.size()) {
    throw ContractError("target and online block counts differ");
  }
  for (std::size_t b = 0; b < target.size(); ++b) {
    if (target[b]->size() != online[b]->size()) {
      throw ContractError("target and online block shapes differ");
    }
    *target[b] = (1.0 - tau) * (*target[b]) + tau * (*online[b]);
  }
}

inline void soft_update(Eigen::VectorXd& target, const Eigen::VectorXd& online,
                        double tau) {
  soft_update(std::vector<Eigen::VectorXd*>{&target},
              std::vector<const Eigen::VectorXd*>{&online}, tau);
}

}  // namespace epicon
