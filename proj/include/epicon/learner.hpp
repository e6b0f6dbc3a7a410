#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "epicon/checkpoint.hpp"
#include "epicon/environment.hpp"
#include "epicon/errors.hpp"
#include "epicon/features.hpp"
#include "epicon/metrics.hpp"
#include "epicon/net.hpp"
#include "epicon/optim.hpp"
#include "epicon/policy.hpp"
#include "epicon/replay.hpp"
#include "epicon/rng.hpp"
#include "epicon/rollout.hpp"
#include "epicon/scenario.hpp"

namespace epicon {

struct TrainConfig {
  int episodes = 500;
  int seeds = 5;
  double mixing_weight = 0.01;  // weight on the global critic in actor ascent
  double discount = 0.97;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;  // target-network tracking rate
  int batch_size = 128;
  std::size_t replay_capacity = 100000;
  int warmup_transitions = 500;  // buffer size before updates begin
  int update_every = 1;          // decisions between gradient updates
  double exploration_start = 0.3;
  double exploration_end = 0.02;
  // Initial logistic-head bias: positive values start policies close to open
  // borders (the pre-intervention status quo), so early exploration does not
  // begin from a half-lockdown everywhere.
  double init_action_bias = 2.0;
  double grad_clip = 10.0;
  int encode_dim = 16;
  int head_hidden = 32;
  int critic_hidden = 64;
  double divergence_limit = 1e9;  // abort a seed past this value scale
  unsigned long long base_seed = 1;

  void validate() const {
    if (episodes < 0) throw ConfigError("episodes must be non-negative");
    if (seeds < 1) throw ConfigError("need at least one training seed");
    if (mixing_weight < 0.0 || !std::isfinite(mixing_weight)) {
      throw ConfigError("mixing weight must be finite and non-negative");
    }
    if (discount < 0.0 || discount >= 1.0) {
      throw ConfigError("discount must lie in [0,1)");
    }
    if (actor_lr <= 0.0 || critic_lr <= 0.0) {
      throw ConfigError("learning rates must be positive");
    }
    if (tau <= 0.0 || tau > 1.0) throw ConfigError("tau must lie in (0,1]");
    if (batch_size < 1) throw ConfigError("batch size must be positive");
    if (replay_capacity < static_cast<std::size_t>(batch_size)) {
      throw ConfigError("replay capacity must hold at least one batch");
    }
    if (warmup_transitions < batch_size) {
      throw ConfigError("warmup must cover at least one batch");
    }
    if (update_every < 1) throw ConfigError("update period must be positive");
    if (exploration_start < 0.0 || exploration_end < 0.0) {
      throw ConfigError("exploration scales must be non-negative");
    }
    if (!std::isfinite(init_action_bias)) {
      throw ConfigError("initial action bias must be finite");
    }
    if (grad_clip <= 0.0) throw ConfigError("gradient clip must be positive");
    if (encode_dim < 1 || head_hidden < 1 || critic_hidden < 1) {
      throw ConfigError("network widths must be positive");
    }
    if (divergence_limit <= 0.0) {
      throw ConfigError("divergence limit must be positive");
    }
  }
};

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {{"episodes", c.episodes},
          {"seeds", c.seeds},
          {"mixing_weight", c.mixing_weight},
          {"discount", c.discount},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"tau", c.tau},
          {"batch_size", c.batch_size},
          {"replay_capacity", c.replay_capacity},
          {"warmup_transitions", c.warmup_transitions},
          {"update_every", c.update_every},
          {"exploration_start", c.exploration_start},
          {"exploration_end", c.exploration_end},
          {"init_action_bias", c.init_action_bias},
          {"grad_clip", c.grad_clip},
          {"encode_dim", c.encode_dim},
          {"head_hidden", c.head_hidden},
          {"critic_hidden", c.critic_hidden},
          {"divergence_limit", c.divergence_limit},
          {"base_seed", c.base_seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("training config must be an object");
  TrainConfig c;
  nlohmann::json known = train_config_to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown training config key: " + key);
    }
  }
  c.episodes = j.value("episodes", c.episodes);
  c.seeds = j.value("seeds", c.seeds);
  c.mixing_weight = j.value("mixing_weight", c.mixing_weight);
  c.discount = j.value("discount", c.discount);
  c.actor_lr = j.value("actor_lr", c.actor_lr);
  c.critic_lr = j.value("critic_lr", c.critic_lr);
  c.tau = j.value("tau", c.tau);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  c.warmup_transitions = j.value("warmup_transitions", c.warmup_transitions);
  c.update_every = j.value("update_every", c.update_every);
  c.exploration_start = j.value("exploration_start", c.exploration_start);
  c.exploration_end = j.value("exploration_end", c.exploration_end);
  c.init_action_bias = j.value("init_action_bias", c.init_action_bias);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.encode_dim = j.value("encode_dim", c.encode_dim);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.critic_hidden = j.value("critic_hidden", c.critic_hidden);
  c.divergence_limit = j.value("divergence_limit", c.divergence_limit);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.validate();
  return c;
}

// Greedy wrapper around a set of trained actors; usable wherever the
// hand-written baselines are.
class LearnedPolicy : public Policy {
 public:
  LearnedPolicy(std::vector<EncoderActor> actors, const Scenario& scenario,
                std::string description)
      : actors_(std::move(actors)),
        extractor_(scenario),
        description_(std::move(description)) {
    if (static_cast<int>(actors_.size()) != scenario.n_regions()) {
      throw ContractError("need exactly one actor per region");
    }
  }

  void begin_episode(const Scenario&) override {}

  std::vector<double> act(const Observation& obs, int region) override {
    Eigen::VectorXd f = extractor_.features(obs);
    Eigen::VectorXd a = actors_.at(region).forward(f, region);
    return {a.data(), a.data() + a.size()};
  }

  std::string describe() const override { return description_; }

  const std::vector<EncoderActor>& actors() const { return actors_; }

 private:
  std::vector<EncoderActor> actors_;
  FeatureExtractor extractor_;
  std::string description_;
};

struct SeedOutcome {
  int seed_index = 0;
  bool diverged = false;
  std::string diagnostic;
  int episodes_run = 0;
  std::vector<double> episode_returns;  // summed global reward per episode
  double eval_mean_global_reward = std::numeric_limits<double>::quiet_NaN();
  double eval_mean_hospitalized = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  TrainConfig config;
  std::vector<SeedOutcome> seeds;
  int best_seed_index = -1;
  std::vector<EncoderActor> actors;  // networks of the best seed
  std::vector<FeedForward> local_critics;
  FeedForward global_critic;
};

namespace detail {

inline Eigen::VectorXd critic_input(const Eigen::VectorXd& features,
                                    const Eigen::VectorXd& joint) {
  Eigen::VectorXd x(features.size() + joint.size());
  x.head(features.size()) = features;
  x.tail(joint.size()) = joint;
  return x;
}

}  // namespace detail

// Multi-agent actor-critic trainer.  Each region owns an actor and a local
// critic of its own reward; one shared global critic estimates the summed
// reward, and actors ascend Q_local + mixing_weight * Q_global.  All
// randomness flows through labelled substreams of the per-seed generator, so
// runs are reproducible and do not depend on how sibling components consume
// their own streams.
class MixedObjectiveLearner {
 public:
  struct Nets {
    std::vector<EncoderActor> actors, target_actors;
    std::vector<FeedForward> local_critics, target_local_critics;
    FeedForward global_critic, target_global_critic;
  };

  MixedObjectiveLearner(Scenario scenario, TrainConfig config)
      : scenario_(std::move(scenario)), cfg_(config) {
    scenario_.validate();
    cfg_.validate();
  }

  const Scenario& scenario() const { return scenario_; }
  const TrainConfig& config() const { return cfg_; }

  Nets init_networks(int seed_index) const {
    int n = scenario_.n_regions();
    int feat = n * FeatureExtractor::kSliceDim;
    Rng seed_rng = seed_root(seed_index);
    Nets nets;
    for (int i = 0; i < n; ++i) {
      EncoderActor actor(n, FeatureExtractor::kSliceDim, cfg_.encode_dim,
                         cfg_.head_hidden, n);
      Rng r = seed_rng.fork("init/actor", i);
      actor.init_glorot(r, cfg_.init_action_bias);
      nets.actors.push_back(std::move(actor));
    }
    for (int i = 0; i < n; ++i) {
      FeedForward critic = make_critic(feat, n);
      Rng r = seed_rng.fork("init/critic_local", i);
      critic.init_glorot(r);
      nets.local_critics.push_back(std::move(critic));
    }
    nets.global_critic = make_critic(feat, n);
    Rng r = seed_rng.fork("init/critic_global");
    nets.global_critic.init_glorot(r);
    nets.target_actors = nets.actors;
    nets.target_local_critics = nets.local_critics;
    nets.target_global_critic = nets.global_critic;
    return nets;
  }

  // d(Q_local + alpha * Q_global)/d(agent's own action column), evaluated at
  // the given state and joint action.  Leaves gradient residue in the
  // critics; callers zero them before their next critic update.
  static Eigen::VectorXd mixed_action_gradient(FeedForward& local_critic,
                                               FeedForward* global_critic,
                                               double alpha,
                                               const Eigen::VectorXd& features,
                                               const Eigen::VectorXd& joint,
                                               int agent, int n) {
    Eigen::VectorXd x = detail::critic_input(features, joint);
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    FeedForward::Workspace ws;
    local_critic.forward(x, ws);
    Eigen::VectorXd dx = local_critic.backward(ws, one);
    Eigen::VectorXd da = dx.segment(features.size() + agent * n, n);
    if (global_critic != nullptr && alpha != 0.0) {
      FeedForward::Workspace gws;
      global_critic->forward(x, gws);
      Eigen::VectorXd gdx = global_critic->backward(gws, one);
      da += alpha * gdx.segment(features.size() + agent * n, n);
    }
    return da;
  }

  TrainResult train() const {
    TrainResult result;
    result.config = cfg_;
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < cfg_.seeds; ++s) {
      SeedOutcome out;
      out.seed_index = s;
      Nets nets = init_networks(s);
      run_seed(s, nets, out);
      if (!out.diverged) {
        LearnedPolicy greedy(nets.actors, scenario_, "mixed-eval");
        std::vector<Policy*> agents{&greedy};
        Trajectory traj = run_episode(agents, scenario_, s);
        MetricReport rep = compute_metrics(traj);
        out.eval_mean_global_reward = rep.mean_global_reward;
        out.eval_mean_hospitalized = rep.mean_hospitalized;
        if (out.eval_mean_global_reward > best) {
          best = out.eval_mean_global_reward;
          result.best_seed_index = s;
          result.actors = nets.actors;
          result.local_critics = nets.local_critics;
          result.global_critic = nets.global_critic;
        }
      }
      result.seeds.push_back(std::move(out));
    }
    if (result.best_seed_index < 0) {
      std::string detail;
      for (const SeedOutcome& o : result.seeds) {
        detail += "\n  " + o.diagnostic;
      }
      throw InfeasibleError("every training seed diverged:" + detail);
    }
    return result;
  }

 private:
  FeedForward make_critic(int feat_dim, int n) const {
    return FeedForward(
        {feat_dim + n * n, cfg_.critic_hidden, cfg_.critic_hidden, 1},
        {Activation::tanh, Activation::tanh, Activation::identity});
  }

  Rng seed_root(int seed_index) const {
    Rng root(cfg_.base_seed);
    return root.fork("seed", static_cast<std::uint64_t>(seed_index));
  }

  double noise_scale(int episode) const {
    if (cfg_.episodes <= 1) return cfg_.exploration_start;
    double frac = static_cast<double>(episode) / (cfg_.episodes - 1);
    return cfg_.exploration_start +
           (cfg_.exploration_end - cfg_.exploration_start) * frac;
  }

  void run_seed(int seed_index, Nets& nets, SeedOutcome& out) const {
    int n = scenario_.n_regions();
    Rng seed_rng = seed_root(seed_index);
    std::vector<Rng> explore;
    for (int i = 0; i < n; ++i) explore.push_back(seed_rng.fork("explore", i));
    Rng replay_rng = seed_rng.fork("replay");

    ReplayBuffer buffer(cfg_.replay_capacity);
    Environment env(scenario_);
    FeatureExtractor extractor(scenario_);

    std::vector<Adam> actor_opt, critic_opt;
    for (int i = 0; i < n; ++i) {
      actor_opt.emplace_back(cfg_.actor_lr);
      critic_opt.emplace_back(cfg_.critic_lr);
    }
    Adam global_opt(cfg_.critic_lr);

    long decisions = 0;
    for (int e = 0; e < cfg_.episodes; ++e) {
      double sigma = noise_scale(e);
      env.reset(static_cast<unsigned long long>(seed_index));
      Eigen::VectorXd feat = extractor.features(env.observation());
      double episode_return = 0.0;
      while (!env.done()) {
        std::vector<std::vector<double>> joint(n);
        Eigen::VectorXd flat(n * n);
        for (int i = 0; i < n; ++i) {
          Eigen::VectorXd a = nets.actors[i].forward(feat, i);
          for (int k = 0; k < n; ++k) {
            a[k] = std::clamp(a[k] + explore[i].normal(0.0, sigma), 0.0, 1.0);
          }
          joint[i].assign(a.data(), a.data() + n);
          flat.segment(i * n, n) = a;
        }
        StepOutcome outcome = env.step(joint);
        Eigen::VectorXd next_feat = extractor.features(outcome.observation);
        Transition tr;
        tr.features = feat;
        tr.joint_action = flat;
        tr.local_rewards = Eigen::Map<const Eigen::VectorXd>(
            outcome.local_rewards.data(), n);
        tr.global_reward = outcome.global_reward;
        tr.next_features = next_feat;
        tr.terminal = outcome.done;
        buffer.insert(std::move(tr));
        episode_return += outcome.global_reward;
        feat = std::move(next_feat);
        ++decisions;
        if (buffer.size() >=
                static_cast<std::size_t>(cfg_.warmup_transitions) &&
            decisions % cfg_.update_every == 0) {
          std::string diag;
          if (!update_once(nets, buffer, replay_rng, actor_opt, critic_opt,
                           global_opt, diag)) {
            out.diverged = true;
            std::ostringstream msg;
            msg << "seed " << seed_index << " diverged in episode " << e
                << ": " << diag;
            out.diagnostic = msg.str();
            return;
          }
        }
      }
      out.episode_returns.push_back(episode_return);
      out.episodes_run = e + 1;
      if (!std::isfinite(episode_return)) {
        out.diverged = true;
        std::ostringstream msg;
        msg << "seed " << seed_index << " produced a non-finite return in "
            << "episode " << e;
        out.diagnostic = msg.str();
        return;
      }
    }
  }

  bool update_once(Nets& nets, const ReplayBuffer& buffer, Rng& replay_rng,
                   std::vector<Adam>& actor_opt, std::vector<Adam>& critic_opt,
                   Adam& global_opt, std::string& diag) const {
    int n = scenario_.n_regions();
    int B = cfg_.batch_size;
    auto batch = buffer.sample_batch(replay_rng, B);

    // Joint next action under the target policies, shared by every critic.
    std::vector<Eigen::VectorXd> next_joint(B);
    for (int b = 0; b < B; ++b) {
      Eigen::VectorXd flat(n * n);
      for (int j = 0; j < n; ++j) {
        flat.segment(j * n, n) =
            nets.target_actors[j].forward(batch[b]->next_features, j);
      }
      next_joint[b] = std::move(flat);
    }

    double worst_prediction = 0.0;
    auto critic_phase = [&](FeedForward& critic, FeedForward& target,
                            Adam& opt, auto reward_of) {
      critic.zero_grads();
      for (int b = 0; b < B; ++b) {
        const Transition& tr = *batch[b];
        Eigen::VectorXd x = detail::critic_input(tr.features, tr.joint_action);
        FeedForward::Workspace ws;
        double q = critic.forward(x, ws)[0];
        double q_next = target.forward(
            detail::critic_input(tr.next_features, next_joint[b]))[0];
        double y = reward_of(tr) +
                   cfg_.discount * (tr.terminal ? 0.0 : 1.0) * q_next;
        Eigen::VectorXd d_out(1);
        d_out << 2.0 * (q - y) / B;
        critic.backward(ws, d_out);
        worst_prediction = std::max(worst_prediction, std::fabs(q));
      }
      std::vector<Eigen::VectorXd*> params{&critic.params()};
      std::vector<Eigen::VectorXd*> grads{&critic.grads()};
      clip_global_norm(grads, cfg_.grad_clip);
      opt.step(params, grads);
    };

    for (int i = 0; i < n; ++i) {
      critic_phase(nets.local_critics[i], nets.target_local_critics[i],
                   critic_opt[i],
                   [i](const Transition& tr) { return tr.local_rewards[i]; });
    }
    critic_phase(nets.global_critic, nets.target_global_critic, global_opt,
                 [](const Transition& tr) { return tr.global_reward; });

    // Actors ascend the mixed critic value with their own column replaced by
    // the current policy.  The backward passes leave junk gradients in the
    // critics; the next critic phase zeroes them before accumulating.
    for (int i = 0; i < n; ++i) {
      nets.actors[i].zero_grads();
      for (int b = 0; b < B; ++b) {
        const Transition& tr = *batch[b];
        EncoderActor::Workspace ws;
        Eigen::VectorXd own = nets.actors[i].forward(tr.features, i, ws);
        Eigen::VectorXd joint = tr.joint_action;
        joint.segment(i * n, n) = own;
        Eigen::VectorXd da = mixed_action_gradient(
            nets.local_critics[i],
            cfg_.mixing_weight != 0.0 ? &nets.global_critic : nullptr,
            cfg_.mixing_weight, tr.features, joint, i, n);
        Eigen::VectorXd d_own = -da / B;  // minimize the negated objective
        nets.actors[i].backward(ws, i, d_own);
      }
      auto params = nets.actors[i].param_blocks();
      auto grads = nets.actors[i].grad_blocks();
      clip_global_norm(grads, cfg_.grad_clip);
      actor_opt[i].step(params, grads);
    }

    for (int i = 0; i < n; ++i) {
      soft_update(nets.target_actors[i].encoder().params(),
                  nets.actors[i].encoder().params(), cfg_.tau);
      soft_update(nets.target_actors[i].head().params(),
                  nets.actors[i].head().params(), cfg_.tau);
      soft_update(nets.target_local_critics[i].params(),
                  nets.local_critics[i].params(), cfg_.tau);
    }
    soft_update(nets.target_global_critic.params(),
                nets.global_critic.params(), cfg_.tau);

    if (worst_prediction > cfg_.divergence_limit) {
      std::ostringstream msg;
      msg << "critic prediction " << worst_prediction << " exceeds limit "
          << cfg_.divergence_limit;
      diag = msg.str();
      return false;
    }
    for (int i = 0; i < n; ++i) {
      if (!nets.actors[i].encoder().params().allFinite() ||
          !nets.actors[i].head().params().allFinite() ||
          !nets.local_critics[i].params().allFinite()) {
        diag = "network parameters became non-finite";
        return false;
      }
    }
    if (!nets.global_critic.params().allFinite()) {
      diag = "global critic parameters became non-finite";
      return false;
    }
    return true;
  }

  Scenario scenario_;
  TrainConfig cfg_;
};

// Plain single-agent actor-critic on a one-region scenario, written
// independently of the multi-agent trainer.  With one region and a zero
// mixing weight the two must walk in lockstep, which the tests check bit for
// bit; this class is the yardstick for that comparison.
class SingleAgentDdpg {
 public:
  SingleAgentDdpg(Scenario scenario, TrainConfig config)
      : scenario_(std::move(scenario)), cfg_(config) {
    scenario_.validate();
    cfg_.validate();
    if (scenario_.n_regions() != 1) {
      throw ConfigError("the single-agent trainer needs exactly one region");
    }
  }

  TrainResult train() const {
    TrainResult result;
    result.config = cfg_;
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < cfg_.seeds; ++s) {
      SeedOutcome out;
      out.seed_index = s;
      EncoderActor actor = make_actor();
      EncoderActor target_actor = actor;
      FeedForward critic = make_critic();
      FeedForward target_critic = critic;
      {
        Rng seed_rng = seed_root(s);
        Rng ra = seed_rng.fork("init/actor", 0);
        actor.init_glorot(ra, cfg_.init_action_bias);
        Rng rc = seed_rng.fork("init/critic_local", 0);
        critic.init_glorot(rc);
        target_actor = actor;
        target_critic = critic;
      }
      run_seed(s, actor, target_actor, critic, target_critic, out);
      if (!out.diverged) {
        LearnedPolicy greedy({actor}, scenario_, "ddpg-eval");
        std::vector<Policy*> agents{&greedy};
        Trajectory traj = run_episode(agents, scenario_, s);
        MetricReport rep = compute_metrics(traj);
        out.eval_mean_global_reward = rep.mean_global_reward;
        out.eval_mean_hospitalized = rep.mean_hospitalized;
        if (out.eval_mean_global_reward > best) {
          best = out.eval_mean_global_reward;
          result.best_seed_index = s;
          result.actors = {actor};
          result.local_critics = {critic};
        }
      }
      result.seeds.push_back(std::move(out));
    }
    if (result.best_seed_index < 0) {
      throw InfeasibleError("every training seed diverged");
    }
    return result;
  }

 private:
  EncoderActor make_actor() const {
    return EncoderActor(1, FeatureExtractor::kSliceDim, cfg_.encode_dim,
                        cfg_.head_hidden, 1);
  }
  FeedForward make_critic() const {
    int feat = FeatureExtractor::kSliceDim;
    return FeedForward({feat + 1, cfg_.critic_hidden, cfg_.critic_hidden, 1},
                       {Activation::tanh, Activation::tanh,
                        Activation::identity});
  }
  Rng seed_root(int seed_index) const {
    Rng root(cfg_.base_seed);
    return root.fork("seed", static_cast<std::uint64_t>(seed_index));
  }
  double noise_scale(int episode) const {
    if (cfg_.episodes <= 1) return cfg_.exploration_start;
    double frac = static_cast<double>(episode) / (cfg_.episodes - 1);
    return cfg_.exploration_start +
           (cfg_.exploration_end - cfg_.exploration_start) * frac;
  }

  void run_seed(int seed_index, EncoderActor& actor, EncoderActor& target_actor,
                FeedForward& critic, FeedForward& target_critic,
                SeedOutcome& out) const {
    Rng seed_rng = seed_root(seed_index);
    Rng explore = seed_rng.fork("explore", 0);
    Rng replay_rng = seed_rng.fork("replay");

    ReplayBuffer buffer(cfg_.replay_capacity);
    Environment env(scenario_);
    FeatureExtractor extractor(scenario_);
    Adam actor_opt(cfg_.actor_lr);
    Adam critic_opt(cfg_.critic_lr);

    long decisions = 0;
    for (int e = 0; e < cfg_.episodes; ++e) {
      double sigma = noise_scale(e);
      env.reset(static_cast<unsigned long long>(seed_index));
      Eigen::VectorXd feat = extractor.features(env.observation());
      double episode_return = 0.0;
      while (!env.done()) {
        Eigen::VectorXd a = actor.forward(feat, 0);
        a[0] = std::clamp(a[0] + explore.normal(0.0, sigma), 0.0, 1.0);
        StepOutcome outcome = env.step({{a[0]}});
        Eigen::VectorXd next_feat = extractor.features(outcome.observation);
        Transition tr;
        tr.features = feat;
        tr.joint_action = a;
        tr.local_rewards = Eigen::Map<const Eigen::VectorXd>(
            outcome.local_rewards.data(), 1);
        tr.global_reward = outcome.global_reward;
        tr.next_features = next_feat;
        tr.terminal = outcome.done;
        buffer.insert(std::move(tr));
        episode_return += outcome.global_reward;
        feat = std::move(next_feat);
        ++decisions;
        if (buffer.size() >=
                static_cast<std::size_t>(cfg_.warmup_transitions) &&
            decisions % cfg_.update_every == 0) {
          if (!update_once(actor, target_actor, critic, target_critic,
                           buffer, replay_rng, actor_opt, critic_opt)) {
            out.diverged = true;
            out.diagnostic = "single-agent seed diverged";
            return;
          }
        }
      }
      out.episode_returns.push_back(episode_return);
      out.episodes_run = e + 1;
    }
  }

  bool update_once(EncoderActor& actor, EncoderActor& target_actor,
                   FeedForward& critic, FeedForward& target_critic,
                   const ReplayBuffer& buffer, Rng& replay_rng,
                   Adam& actor_opt, Adam& critic_opt) const {
    int B = cfg_.batch_size;
    auto batch = buffer.sample_batch(replay_rng, B);

    std::vector<Eigen::VectorXd> next_action(B);
    for (int b = 0; b < B; ++b) {
      next_action[b] = target_actor.forward(batch[b]->next_features, 0);
    }

    double worst = 0.0;
    critic.zero_grads();
    for (int b = 0; b < B; ++b) {
      const Transition& tr = *batch[b];
      Eigen::VectorXd x = detail::critic_input(tr.features, tr.joint_action);
      FeedForward::Workspace ws;
      double q = critic.forward(x, ws)[0];
      double q_next = target_critic.forward(
          detail::critic_input(tr.next_features, next_action[b]))[0];
      double y = tr.local_rewards[0] +
                 cfg_.discount * (tr.terminal ? 0.0 : 1.0) * q_next;
      Eigen::VectorXd d_out(1);
      d_out << 2.0 * (q - y) / B;
      critic.backward(ws, d_out);
      worst = std::max(worst, std::fabs(q));
    }
    std::vector<Eigen::VectorXd*> cparams{&critic.params()};
    std::vector<Eigen::VectorXd*> cgrads{&critic.grads()};
    clip_global_norm(cgrads, cfg_.grad_clip);
    critic_opt.step(cparams, cgrads);

    actor.zero_grads();
    for (int b = 0; b < B; ++b) {
      const Transition& tr = *batch[b];
      EncoderActor::Workspace ws;
      Eigen::VectorXd own = actor.forward(tr.features, 0, ws);
      Eigen::VectorXd x = detail::critic_input(tr.features, own);
      FeedForward::Workspace cws;
      critic.forward(x, cws);
      Eigen::VectorXd dx = critic.backward(cws, Eigen::VectorXd::Ones(1));
      Eigen::VectorXd d_own = -dx.tail(1) / B;
      actor.backward(ws, 0, d_own);
    }
    auto aparams = actor.param_blocks();
    auto agrads = actor.grad_blocks();
    clip_global_norm(agrads, cfg_.grad_clip);
    actor_opt.step(aparams, agrads);

    soft_update(target_actor.encoder().params(), actor.encoder().params(),
                cfg_.tau);
    soft_update(target_actor.head().params(), actor.head().params(),
                cfg_.tau);
    soft_update(target_critic.params(), critic.params(), cfg_.tau);

    return worst <= cfg_.divergence_limit &&
           actor.encoder().params().allFinite() &&
           actor.head().params().allFinite() && critic.params().allFinite();
  }

  Scenario scenario_;
  TrainConfig cfg_;
};

// ---- trained-policy checkpoints ----

inline nlohmann::json policy_checkpoint_to_json(const TrainResult& result,
                                                const Scenario& scenario) {
  nlohmann::json actors = nlohmann::json::array();
  for (const EncoderActor& a : result.actors) actors.push_back(actor_to_json(a));
  nlohmann::json critics = nlohmann::json::array();
  for (const FeedForward& c : result.local_critics) {
    critics.push_back(net_to_json(c));
  }
  nlohmann::json seeds = nlohmann::json::array();
  for (const SeedOutcome& o : result.seeds) {
    seeds.push_back({{"seed_index", o.seed_index},
                     {"diverged", o.diverged},
                     {"diagnostic", o.diagnostic},
                     {"episodes_run", o.episodes_run},
                     {"episode_returns", o.episode_returns},
                     {"eval_mean_global_reward", o.eval_mean_global_reward},
                     {"eval_mean_hospitalized", o.eval_mean_hospitalized}});
  }
  return {{"format_version", 1},
          {"kind", "policy_checkpoint"},
          {"config", train_config_to_json(result.config)},
          {"scenario", scenario_to_json(scenario)},
          {"best_seed_index", result.best_seed_index},
          {"seeds", std::move(seeds)},
          {"actors", std::move(actors)},
          {"local_critics", std::move(critics)},
          {"global_critic", result.global_critic.n_params() > 0
                                ? net_to_json(result.global_critic)
                                : nlohmann::json()}};
}

struct LoadedCheckpoint {
  Scenario scenario;
  TrainConfig config;
  std::vector<EncoderActor> actors;
  int best_seed_index = -1;
};

inline LoadedCheckpoint policy_checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("kind", "") != "policy_checkpoint") {
    throw ConfigError("not a policy checkpoint document");
  }
  if (j.value("format_version", 0) != 1) {
    throw ConfigError("unsupported policy checkpoint version");
  }
  LoadedCheckpoint out;
  out.scenario = scenario_from_json(j.at("scenario"));
  out.config = train_config_from_json(j.at("config"));
  out.best_seed_index = j.value("best_seed_index", -1);
  for (const auto& doc : j.at("actors")) {
    out.actors.push_back(actor_from_json(doc));
  }
  if (static_cast<int>(out.actors.size()) != out.scenario.n_regions()) {
    throw ConfigError("checkpoint actor count does not match the scenario");
  }
  return out;
}

inline void save_policy_checkpoint(const TrainResult& result,
                                   const Scenario& scenario,
                                   const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write checkpoint file: " + path);
  f << policy_checkpoint_to_json(result, scenario).dump(2) << "\n";
}

inline LoadedCheckpoint load_policy_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open checkpoint file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("checkpoint file " + path + " is not valid JSON: " +
                      e.what());
  }
  return policy_checkpoint_from_json(j);
}

}  // namespace epicon
