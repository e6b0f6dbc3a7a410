#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epicon/errors.hpp"
#include "epicon/rng.hpp"

namespace epicon {

enum class Activation { identity, tanh, logistic };

inline double activate(Activation act, double x) {
  switch (act) {
    case Activation::identity: return x;
    case Activation::tanh: return std::tanh(x);
    case Activation::logistic: return 1.0 / (1.0 + std::exp(-x));
  }
  throw ContractError("unknown activation");
}

// Derivative written in terms of the post-activation value y, which is what
// the forward pass stores.
inline double activation_slope(Activation act, double y) {
  switch (act) {
    case Activation::identity: return 1.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::logistic: return y * (1.0 - y);
  }
  throw ContractError("unknown activation");
}

inline std::string activation_name(Activation act) {
  switch (act) {
    case Activation::identity: return "identity";
    case Activation::tanh: return "tanh";
    case Activation::logistic: return "logistic";
  }
  throw ContractError("unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "tanh") return Activation::tanh;
  if (name == "logistic") return Activation::logistic;
  throw ConfigError("unknown activation name: " + name);
}

// Dense multilayer perceptron over a single flat parameter vector.  Layer k
// maps widths[k] -> widths[k+1]; its weight matrix (column-major) and bias
// live contiguously in params(), so optimizers can treat the whole network
// as one block.  Gradients accumulate into grads() until zero_grads().
class FeedForward {
 public:
  struct Workspace {
    Eigen::VectorXd input;
    std::vector<Eigen::VectorXd> post;  // post-activation per layer
  };

  FeedForward() = default;

  FeedForward(std::vector<int> widths, std::vector<Activation> activations)
      : widths_(std::move(widths)), acts_(std::move(activations)) {
    if (widths_.size() < 2) {
      throw ConfigError("network needs at least an input and an output layer");
    }
    if (acts_.size() + 1 != widths_.size()) {
      throw ConfigError("network needs one activation per layer");
    }
    Eigen::Index total = 0;
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
      if (widths_[k] <= 0 || widths_[k + 1] <= 0) {
        throw ConfigError("network layer widths must be positive");
      }
      offsets_.push_back(total);
      total += static_cast<Eigen::Index>(widths_[k]) * widths_[k + 1] +
               widths_[k + 1];
    }
    params_ = Eigen::VectorXd::Zero(total);
    grads_ = Eigen::VectorXd::Zero(total);
  }

  int n_layers() const { return static_cast<int>(acts_.size()); }
  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  const std::vector<int>& widths() const { return widths_; }
  const std::vector<Activation>& activations() const { return acts_; }

  Eigen::Index n_params() const { return params_.size(); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& grads() { return grads_; }
  const Eigen::VectorXd& grads() const { return grads_; }
  void zero_grads() { grads_.setZero(); }

  Eigen::Map<Eigen::MatrixXd> weight(int k) {
    check_layer(k);
    return {params_.data() + offsets_[k], widths_[k + 1], widths_[k]};
  }
  Eigen::Map<const Eigen::MatrixXd> weight(int k) const {
    check_layer(k);
    return {params_.data() + offsets_[k], widths_[k + 1], widths_[k]};
  }
  Eigen::Map<Eigen::VectorXd> bias(int k) {
    check_layer(k);
    return {params_.data() + bias_offset(k), widths_[k + 1]};
  }
  Eigen::Map<const Eigen::VectorXd> bias(int k) const {
    check_layer(k);
    return {params_.data() + bias_offset(k), widths_[k + 1]};
  }

  Eigen::Map<Eigen::MatrixXd> weight_grad(int k) {
    check_layer(k);
    return {grads_.data() + offsets_[k], widths_[k + 1], widths_[k]};
  }
  Eigen::Map<Eigen::VectorXd> bias_grad(int k) {
    check_layer(k);
    return {grads_.data() + bias_offset(k), widths_[k + 1]};
  }

  // Glorot-uniform weights, zero biases, drawn layer by layer in storage
  // order so initialization is a pure function of the generator state.  The
  // optional output bias shifts the final layer's pre-activation, letting
  // callers start a squashed output away from its midpoint.
  void init_glorot(Rng& rng, double output_bias = 0.0) {
    for (int k = 0; k < n_layers(); ++k) {
      double limit = std::sqrt(6.0 / (widths_[k] + widths_[k + 1]));
      auto w = weight(k);
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        w.data()[i] = rng.uniform(-limit, limit);
      }
      bias(k).setZero();
    }
    bias(n_layers() - 1).setConstant(output_bias);
  }

  const Eigen::VectorXd& forward(const Eigen::VectorXd& x,
                                 Workspace& ws) const {
    if (x.size() != input_dim()) {
      throw ContractError("network input has wrong dimension");
    }
    ws.input = x;
    ws.post.resize(acts_.size());
    const Eigen::VectorXd* prev = &ws.input;
    for (int k = 0; k < n_layers(); ++k) {
      ws.post[k].noalias() = weight(k) * (*prev) + bias(k);
      for (Eigen::Index i = 0; i < ws.post[k].size(); ++i) {
        ws.post[k][i] = activate(acts_[k], ws.post[k][i]);
      }
      prev = &ws.post[k];
    }
    return ws.post.back();
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    Workspace ws;
    return forward(x, ws);
  }

  // Reverse pass for the run recorded in `ws`.  Adds parameter gradients to
  // grads() and returns the loss gradient with respect to the input.
  Eigen::VectorXd backward(const Workspace& ws, const Eigen::VectorXd& d_out) {
    if (ws.post.size() != acts_.size() || ws.input.size() != input_dim()) {
      throw ContractError("backward needs the workspace of a forward run");
    }
    if (d_out.size() != output_dim()) {
      throw ContractError("output gradient has wrong dimension");
    }
    Eigen::VectorXd delta = d_out;
    for (int k = n_layers() - 1; k >= 0; --k) {
      for (Eigen::Index i = 0; i < delta.size(); ++i) {
        delta[i] *= activation_slope(acts_[k], ws.post[k][i]);
      }
      const Eigen::VectorXd& below = k == 0 ? ws.input : ws.post[k - 1];
      weight_grad(k).noalias() += delta * below.transpose();
      bias_grad(k) += delta;
      Eigen::VectorXd d_below = weight(k).transpose() * delta;
      delta = std::move(d_below);
    }
    return delta;
  }

 private:
  void check_layer(int k) const {
    if (k < 0 || k >= n_layers()) throw ContractError("layer index out of range");
  }
  Eigen::Index bias_offset(int k) const {
    return offsets_[k] + static_cast<Eigen::Index>(widths_[k]) * widths_[k + 1];
  }

  std::vector<int> widths_;
  std::vector<Activation> acts_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
  Eigen::VectorXd grads_;
};

// Permutation-tolerant policy head.  One shared encoder embeds each region's
// feature slice; the head sees the target region's own embedding next to the
// mean embedding of all regions, so reordering the other regions cannot
// change the output.  Admission fractions come out of a logistic layer and
// therefore always lie in (0,1).
class EncoderActor {
 public:
  struct Workspace {
    std::vector<FeedForward::Workspace> enc;
    Eigen::VectorXd head_in;
    FeedForward::Workspace head;
  };

  EncoderActor() = default;

  EncoderActor(int n_regions, int slice_dim, int encode_dim, int head_hidden,
               int n_out)
      : n_regions_(n_regions),
        slice_dim_(slice_dim),
        encoder_({slice_dim, encode_dim}, {Activation::tanh}),
        head_({2 * encode_dim, head_hidden, n_out},
              {Activation::tanh, Activation::logistic}) {
    if (n_regions <= 0) throw ConfigError("actor needs at least one region");
  }

  int n_regions() const { return n_regions_; }
  int slice_dim() const { return slice_dim_; }
  int encode_dim() const { return encoder_.output_dim(); }
  int output_dim() const { return head_.output_dim(); }
  int feature_dim() const { return n_regions_ * slice_dim_; }

  FeedForward& encoder() { return encoder_; }
  const FeedForward& encoder() const { return encoder_; }
  FeedForward& head() { return head_; }
  const FeedForward& head() const { return head_; }

  Eigen::Index n_params() const {
    return encoder_.n_params() + head_.n_params();
  }
  std::vector<Eigen::VectorXd*> param_blocks() {
    return {&encoder_.params(), &head_.params()};
  }
  std::vector<Eigen::VectorXd*> grad_blocks() {
    return {&encoder_.grads(), &head_.grads()};
  }
  void zero_grads() {
    encoder_.zero_grads();
    head_.zero_grads();
  }

  void init_glorot(Rng& rng, double output_bias = 0.0) {
    encoder_.init_glorot(rng);
    head_.init_glorot(rng, output_bias);
  }

  const Eigen::VectorXd& forward(const Eigen::VectorXd& features, int target,
                                 Workspace& ws) const {
    check_input(features, target);
    ws.enc.resize(n_regions_);
    int ed = encode_dim();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(ed);
    for (int r = 0; r < n_regions_; ++r) {
      mean += encoder_.forward(features.segment(r * slice_dim_, slice_dim_),
                               ws.enc[r]);
    }
    mean /= n_regions_;
    ws.head_in.resize(2 * ed);
    ws.head_in.head(ed) = ws.enc[target].post.back();
    ws.head_in.tail(ed) = mean;
    return head_.forward(ws.head_in, ws.head);
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& features, int target) const {
    Workspace ws;
    return forward(features, target, ws);
  }

  // Adds gradients for both sub-networks (the encoder accumulates one
  // contribution per region) and returns the gradient on the feature vector.
  Eigen::VectorXd backward(const Workspace& ws, int target,
                           const Eigen::VectorXd& d_out) {
    if (static_cast<int>(ws.enc.size()) != n_regions_) {
      throw ContractError("backward needs the workspace of a forward run");
    }
    int ed = encode_dim();
    Eigen::VectorXd d_head_in = head_.backward(ws.head, d_out);
    Eigen::VectorXd d_mean_share = d_head_in.tail(ed) / n_regions_;
    Eigen::VectorXd d_features(feature_dim());
    for (int r = 0; r < n_regions_; ++r) {
      Eigen::VectorXd d_enc = d_mean_share;
      if (r == target) d_enc += d_head_in.head(ed);
      d_features.segment(r * slice_dim_, slice_dim_) =
          encoder_.backward(ws.enc[r], d_enc);
    }
    return d_features;
  }

 private:
  void check_input(const Eigen::VectorXd& features, int target) const {
    if (features.size() != feature_dim()) {
      throw ContractError("actor features have wrong dimension");
    }
    if (target < 0 || target >= n_regions_) {
      throw ContractError("actor target region out of range");
    }
  }

  int n_regions_ = 0;
  int slice_dim_ = 0;
  FeedForward encoder_;
  FeedForward head_;
};

}  // namespace epicon
