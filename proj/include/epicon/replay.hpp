#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "epicon/errors.hpp"
#include "epicon/rng.hpp"

namespace epicon {

// One decision-period transition.  The joint action is flattened column by
// column: entry j * n + i is the admission fraction destination j grants to
// travellers from origin i.
struct Transition {
  Eigen::VectorXd features;
  Eigen::VectorXd joint_action;
  Eigen::VectorXd local_rewards;
  double global_reward = 0.0;
  Eigen::VectorXd next_features;
  bool terminal = false;
};

// Fixed-capacity ring buffer with uniform sampling.  Inserts verify the
// reward bookkeeping so a buggy caller cannot poison thousands of updates
// before anyone notices.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return store_.size(); }

  void insert(Transition t) {
    double sum = t.local_rewards.sum();
    double scale = std::max(1.0, std::fabs(t.global_reward));
    if (!(std::fabs(sum - t.global_reward) <= 1e-9 * scale)) {
      throw ContractError(
          "transition rewards are inconsistent: locals do not sum to global");
    }
    if (store_.size() < capacity_) {
      store_.push_back(std::move(t));
    } else {
      store_[write_] = std::move(t);
    }
    write_ = (write_ + 1) % capacity_;
  }

  const Transition& sample(Rng& rng) const {
    if (store_.empty()) throw ContractError("cannot sample an empty buffer");
    return store_[rng.uniform_index(store_.size())];
  }

  std::vector<const Transition*> sample_batch(Rng& rng, int batch) const {
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (int b = 0; b < batch; ++b) out.push_back(&sample(rng));
    return out;
  }

  const Transition& operator[](std::size_t i) const { return store_[i]; }

 private:
  std::size_t capacity_;
  std::size_t write_ = 0;
  std::vector<Transition> store_;
};

}  // namespace epicon
