// Copyright 2026 The wasabi-planar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WASABI_RL_HPP_
#define WASABI_RL_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/discriminator.hpp"
#include "wasabi/error.hpp"
#include "wasabi/nn.hpp"
#include "wasabi/reward.hpp"
#include "wasabi/sim.hpp"

namespace wasabi {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  double entropy_coef = 0.01;
  double value_coef = 1.0;
  double max_grad_norm = 1.0;
  std::size_t epochs = 5;
  std::size_t minibatches = 4;
  double kl_target = 0.01;
  bool adaptive_lr = true;
  double learning_rate = 1e-3;
  std::size_t steps_per_iter = 24;
  std::size_t num_envs = 16;
  double init_log_std = 0.0;
  double action_scale = 0.5;  // joint-target offset (rad) per unit action
  std::vector<std::size_t> hidden{64, 64};

  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(clip > 0.0)) v.push_back("ppo.clip must be > 0");
    if (!(kl_target > 0.0)) v.push_back("ppo.kl_target must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0)) v.push_back("ppo.gamma must lie in (0, 1)");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) v.push_back("ppo.gae_lambda must lie in [0, 1]");
    if (epochs < 1) v.push_back("ppo.epochs must be >= 1");
    if (minibatches < 1) v.push_back("ppo.minibatches must be >= 1");
    if (steps_per_iter < 1) v.push_back("ppo.steps_per_iter must be >= 1");
    if (num_envs < 1) v.push_back("ppo.num_envs must be >= 1");
    if (!(learning_rate >= 0.0)) v.push_back("ppo.learning_rate must be >= 0");
    if (hidden.empty()) v.push_back("ppo.hidden must list at least one layer");
    return v;
  }
};

// ---------------------------------------------------------------------------
// Advantage estimation
// ---------------------------------------------------------------------------

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Single trajectory stream. dones[t] = 1 cuts bootstrapping after step t;
// `bootstrap` is V(s_T) for the state following the last step.
inline GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                std::span<const double> dones, double bootstrap, double gamma,
                                double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "gae: rewards/values/dones lengths differ");
  }
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double next_value = bootstrap;
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double not_done = 1.0 - dones[t];
    const double delta = rewards[t] + gamma * next_value * not_done - values[t];
    running = delta + gamma * lambda * not_done * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
    next_value = values[t];
  }
  return out;
}

inline double adaptive_lr(double current_lr, double measured_kl, double kl_target) {
  if (!(current_lr > 0.0)) throw Error(ErrorCode::kInvalidArgument, "adaptive_lr: lr must be > 0");
  double lr = current_lr;
  if (measured_kl > 2.0 * kl_target) {
    lr /= 1.5;
  } else if (measured_kl < 0.5 * kl_target) {
    lr *= 1.5;
  }
  return std::clamp(lr, 1e-7, 1e-2);
}

// Clipped surrogate for one sample: loss = max(-A r, -A clip(r)) and its
// derivative with respect to the ratio.
struct SurrogateTerm {
  double loss = 0.0;
  double d_ratio = 0.0;
  bool clipped = false;
};

inline SurrogateTerm ppo_surrogate(double ratio, double advantage, double clip) {
  const double clipped_ratio = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  const double a = -advantage * ratio;
  const double b = -advantage * clipped_ratio;
  SurrogateTerm t;
  t.clipped = std::abs(ratio - 1.0) > clip;
  if (a >= b) {
    t.loss = a;
    t.d_ratio = -advantage;
  } else {
    t.loss = b;
    t.d_ratio = t.clipped ? 0.0 : -advantage;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Policy and value function
// ---------------------------------------------------------------------------

inline constexpr std::size_t kPolicyFrameDim = 18;
inline constexpr std::size_t kPolicyObsDim = 2 * kPolicyFrameDim;

// Policy features of one control step: base twist, gravity, height, joint
// offsets from nominal, scaled joint velocities and the last joint targets.
inline std::array<double, kPolicyFrameDim> policy_frame(const SimState& s,
                                                        const std::array<double, kNumJoints>& last_target,
                                                        const SimParams& p) {
  const Observation o = phi_extract(s);
  std::array<double, kPolicyFrameDim> f{};
  f[0] = o.vx_body;
  f[1] = o.vz_body;
  f[2] = 0.25 * o.pitch_rate;
  f[3] = o.grav_x_body;
  f[4] = o.grav_z_body;
  f[5] = 4.0 * (o.height - 0.2);
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    f[6 + j] = s.joint_pos[j] - p.nominal_joint_pos[j];
    f[10 + j] = 0.05 * s.joint_vel[j];
    f[14 + j] = last_target[j] - p.nominal_joint_pos[j];
  }
  return f;
}

struct ActorCritic {
  MlpNet actor;
  Eigen::VectorXd log_std;
  MlpNet critic;
  OptimizerState actor_opt;
  OptimizerState log_std_opt;
  OptimizerState critic_opt;
  double learning_rate = 1e-3;

  ActorCritic() = default;
  ActorCritic(const PpoConfig& cfg, std::mt19937_64& rng) : learning_rate(cfg.learning_rate) {
    std::vector<std::size_t> sizes{kPolicyObsDim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    auto actor_sizes = sizes;
    actor_sizes.push_back(kNumJoints);
    auto critic_sizes = sizes;
    critic_sizes.push_back(1);
    actor = MlpNet(actor_sizes, Activation::kElu);
    critic = MlpNet(critic_sizes, Activation::kElu);
    actor.init_orthogonal(rng, std::sqrt(2.0), 0.01);
    critic.init_orthogonal(rng, std::sqrt(2.0), 1.0);
    log_std = Eigen::VectorXd::Constant(kNumJoints, cfg.init_log_std);
    OptimizerConfig oc;
    oc.kind = OptimizerKind::kAdam;
    oc.learning_rate = cfg.learning_rate;
    actor_opt = OptimizerState(oc, actor.num_params());
    log_std_opt = OptimizerState(oc, kNumJoints);
    critic_opt = OptimizerState(oc, critic.num_params());
  }

  void set_learning_rate(double lr) {
    learning_rate = lr;
    actor_opt.config.learning_rate = lr;
    log_std_opt.config.learning_rate = lr;
    critic_opt.config.learning_rate = lr;
  }
};

inline double gaussian_log_prob(const Eigen::VectorXd& action, const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& log_std) {
  const Eigen::ArrayXd z = (action - mean).array() / log_std.array().exp();
  return (-0.5 * z.square() - log_std.array() - 0.5 * std::log(2.0 * std::numbers::pi)).sum();
}

inline double gaussian_entropy(const Eigen::VectorXd& log_std) {
  return (0.5 + 0.5 * std::log(2.0 * std::numbers::pi) + log_std.array()).sum();
}

// ---------------------------------------------------------------------------
// Rollout storage and collection
// ---------------------------------------------------------------------------

// Transitions stored step-major: column t * num_envs + e.
struct RolloutBuffer {
  std::size_t steps = 0;
  std::size_t num_envs = 0;
  Eigen::MatrixXd obs;      // policy observations
  Eigen::MatrixXd actions;  // unscaled Gaussian samples
  Eigen::MatrixXd means;    // policy means at collection time
  Eigen::VectorXd old_log_std;
  Eigen::VectorXd log_probs;
  Eigen::VectorXd values;
  Eigen::VectorXd rewards;
  Eigen::VectorXd dones;     // early termination or time-out
  Eigen::MatrixXd windows;   // Phi(s^H) of the state reached by each transition
  Eigen::VectorXd scores;    // raw discriminator output
  Eigen::VectorXd r_imitation;
  Eigen::VectorXd r_termination;
  Eigen::VectorXd r_regularization;
  Eigen::VectorXd terminated;  // early termination only
  Eigen::VectorXd bootstrap;   // V(s_N) per env
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;

  std::size_t size() const { return steps * num_envs; }

  void allocate(std::size_t n_steps, std::size_t n_envs, std::size_t window_dim) {
    steps = n_steps;
    num_envs = n_envs;
    const auto n = static_cast<Eigen::Index>(n_steps * n_envs);
    obs.setZero(kPolicyObsDim, n);
    actions.setZero(kNumJoints, n);
    means.setZero(kNumJoints, n);
    log_probs.setZero(n);
    values.setZero(n);
    rewards.setZero(n);
    dones.setZero(n);
    windows.setZero(static_cast<Eigen::Index>(window_dim), n);
    scores.setZero(n);
    r_imitation.setZero(n);
    r_termination.setZero(n);
    r_regularization.setZero(n);
    terminated.setZero(n);
    bootstrap.setZero(static_cast<Eigen::Index>(n_envs));
    advantages.setZero(n);
    returns.setZero(n);
  }
};

// One environment instance with everything needed to continue an episode.
struct EnvSlot {
  EnvState state;
  WindowBuffer window;
  std::array<double, kNumJoints> last_target{};
  std::array<double, kNumJoints> prev_joint_vel{};
  std::array<double, kPolicyFrameDim> prev_frame{};
  std::mt19937_64 rng;
  std::size_t episode_steps = 0;
  // Episode statistics, reset with the episode.
  double episode_return = 0.0;
};

struct RolloutContext {
  SimParams sim;
  bool full_state = false;
  bool reset_noise = true;
  EnvState settled;  // settle_nominal(sim, 0), filled by make()

  static RolloutContext make(const SimParams& p, bool full_state, bool reset_noise = true) {
    return {p, full_state, reset_noise, sim_detail::settle_nominal(p, 0.0)};
  }
};

inline void reset_slot(EnvSlot& slot, const RolloutContext& ctx) {
  slot.state = reset_env(ctx.sim, slot.rng, ctx.reset_noise, &ctx.settled);
  slot.last_target = ctx.sim.nominal_joint_pos;
  slot.prev_joint_vel = slot.state.sim.joint_vel;
  slot.prev_frame = policy_frame(slot.state.sim, slot.last_target, ctx.sim);
  slot.window.reset(state_features(slot.state.sim, ctx.full_state));
  slot.episode_steps = 0;
  slot.episode_return = 0.0;
}

inline Eigen::VectorXd policy_observation(const EnvSlot& slot, const SimParams& p) {
  const auto cur = policy_frame(slot.state.sim, slot.last_target, p);
  Eigen::VectorXd o(static_cast<Eigen::Index>(kPolicyObsDim));
  for (std::size_t k = 0; k < kPolicyFrameDim; ++k) {
    o(static_cast<Eigen::Index>(k)) = slot.prev_frame[k];
    o(static_cast<Eigen::Index>(kPolicyFrameDim + k)) = cur[k];
  }
  return o;
}

inline std::array<double, kNumJoints> action_to_target(const Eigen::VectorXd& action,
                                                       const SimParams& p, double scale) {
  std::array<double, kNumJoints> t{};
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    t[j] = p.nominal_joint_pos[j] + scale * action(static_cast<Eigen::Index>(j));
  }
  return t;
}

// Imitation signal from a raw discriminator score: the normalized score for
// Wasserstein critics, the bounded mapping for least-squares ones.
inline double imitation_signal(double score, LossKind kind, const RunningStats& stats) {
  return kind == LossKind::kWgan ? imitation_reward(score, stats) : lsgan_imitation_reward(score);
}

struct CollectStats {
  std::size_t episodes_finished = 0;
  std::size_t terminations = 0;
  double episode_length_sum = 0.0;
};

// Runs every environment `buffer.steps` control steps under the stochastic
// policy and assembles rewards. Simulation fans out over `num_workers`
// threads; everything else runs on the calling thread, so the result does not
// depend on the worker count.
inline CollectStats collect_rollout(std::vector<EnvSlot>& envs, const ActorCritic& ac,
                                    const Discriminator& disc, RunningStats& stats,
                                    const RewardWeights& weights, const PpoConfig& ppo,
                                    const RolloutContext& ctx, RolloutBuffer& buffer,
                                    std::size_t num_workers = 1) {
  const std::size_t ne = envs.size();
  const std::size_t steps = ppo.steps_per_iter;
  buffer.allocate(steps, ne, disc.config.input_dim());
  buffer.old_log_std = ac.log_std;
  const Eigen::ArrayXd stdv = ac.log_std.array().exp();
  const double max_steps = std::round(ctx.sim.max_episode_time / ctx.sim.control_dt());
  CollectStats cs;

  Eigen::MatrixXd obs(kPolicyObsDim, static_cast<Eigen::Index>(ne));
  std::vector<StepResult> results(ne);
  std::vector<EnvState> next_states(ne);
  std::vector<std::array<double, kNumJoints>> targets(ne);
  std::vector<double> all_scores;
  all_scores.reserve(steps * ne);

  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t e = 0; e < ne; ++e) {
      obs.col(static_cast<Eigen::Index>(e)) = policy_observation(envs[e], ctx.sim);
    }
    const Eigen::MatrixXd means = ac.actor.forward(obs);
    const Eigen::MatrixXd values = ac.critic.forward(obs);
    for (std::size_t e = 0; e < ne; ++e) {
      const auto col = static_cast<Eigen::Index>(t * ne + e);
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::VectorXd a(static_cast<Eigen::Index>(kNumJoints));
      for (Eigen::Index j = 0; j < a.size(); ++j) {
        a(j) = means(j, static_cast<Eigen::Index>(e)) + stdv(j) * normal(envs[e].rng);
      }
      buffer.obs.col(col) = obs.col(static_cast<Eigen::Index>(e));
      buffer.actions.col(col) = a;
      buffer.means.col(col) = means.col(static_cast<Eigen::Index>(e));
      buffer.log_probs(col) = gaussian_log_prob(a, means.col(static_cast<Eigen::Index>(e)), ac.log_std);
      buffer.values(col) = values(0, static_cast<Eigen::Index>(e));
      targets[e] = action_to_target(a, ctx.sim, ppo.action_scale);
    }

    auto simulate = [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) {
        const auto clipped = clip_to_limits(targets[e], ctx.sim);
        results[e] = step(envs[e].state, clipped, ctx.sim, &next_states[e]);
      }
    };
    const std::size_t workers = std::clamp<std::size_t>(num_workers, 1, ne);
    if (workers == 1) {
      simulate(0, ne);
    } else {
      std::vector<std::thread> pool;
      const std::size_t chunk = (ne + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk, en = std::min(ne, b + chunk);
        if (b < en) pool.emplace_back(simulate, b, en);
      }
      for (auto& th : pool) th.join();
    }

    // Windows of the reached states, then discriminator scores in one batch.
    for (std::size_t e = 0; e < ne; ++e) {
      const auto col = static_cast<Eigen::Index>(t * ne + e);
      const auto win = envs[e].window.push(state_features(next_states[e].sim, ctx.full_state));
      buffer.windows.col(col) =
          Eigen::Map<const Eigen::VectorXd>(win.data.data(), static_cast<Eigen::Index>(win.data.size()));
    }
    const auto cols = Eigen::seqN(static_cast<Eigen::Index>(t * ne), static_cast<Eigen::Index>(ne));
    const Eigen::VectorXd scores = disc.scores(buffer.windows(Eigen::all, cols));

    std::vector<std::size_t> timed_out;
    Eigen::MatrixXd timeout_obs(kPolicyObsDim, 0);
    for (std::size_t e = 0; e < ne; ++e) {
      auto& slot = envs[e];
      const auto col = static_cast<Eigen::Index>(t * ne + e);
      const StepResult& res = results[e];
      const double score = scores(static_cast<Eigen::Index>(e));
      all_scores.push_back(score);

      RegularizationInputs ri;
      ri.action = targets[e];
      ri.prev_action = slot.last_target;
      ri.joint_vel = next_states[e].sim.joint_vel;
      ri.prev_joint_vel = slot.state.sim.joint_vel;
      ri.joint_torque = res.joint_torques;
      ri.pitch_rate = next_states[e].sim.pitch_rate;
      ri.dt = ctx.sim.control_dt();
      const bool terminal = res.next_state.terminal;
      const double r_i = imitation_signal(score, disc.config.loss_kind, stats);
      const double r_t = termination_penalty(terminal, weights.gamma);
      const double r_r = regularization_reward(ri, weights);
      buffer.scores(col) = score;
      buffer.r_imitation(col) = r_i;
      buffer.r_termination(col) = r_t;
      buffer.r_regularization(col) = r_r;
      buffer.rewards(col) = total_reward(r_i, r_t, r_r, weights.w_imitation);
      buffer.terminated(col) = terminal ? 1.0 : 0.0;

      slot.prev_frame = policy_frame(slot.state.sim, slot.last_target, ctx.sim);
      slot.prev_joint_vel = slot.state.sim.joint_vel;
      slot.state = next_states[e];
      slot.last_target = targets[e];
      ++slot.episode_steps;
      slot.episode_return += buffer.rewards(col);

      const bool timeout = !terminal && static_cast<double>(slot.episode_steps) >= max_steps;
      if (terminal || timeout) {
        buffer.dones(col) = 1.0;
        if (timeout) {
          timed_out.push_back(e);
          timeout_obs.conservativeResize(Eigen::NoChange, timeout_obs.cols() + 1);
          timeout_obs.col(timeout_obs.cols() - 1) = policy_observation(slot, ctx.sim);
        }
        ++cs.episodes_finished;
        cs.terminations += terminal ? 1 : 0;
        cs.episode_length_sum += static_cast<double>(slot.episode_steps);
      }
    }
    // Time-outs are not failures: bootstrap from the value of the cut state.
    if (!timed_out.empty()) {
      const Eigen::MatrixXd v = ac.critic.forward(timeout_obs);
      for (std::size_t k = 0; k < timed_out.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(t * ne + timed_out[k]);
        buffer.rewards(col) += ppo.gamma * v(0, static_cast<Eigen::Index>(k));
      }
    }
    for (std::size_t e = 0; e < ne; ++e) {
      if (buffer.dones(static_cast<Eigen::Index>(t * ne + e)) > 0.5) reset_slot(envs[e], ctx);
    }
  }

  for (std::size_t e = 0; e < ne; ++e) {
    obs.col(static_cast<Eigen::Index>(e)) = policy_observation(envs[e], ctx.sim);
  }
  buffer.bootstrap = ac.critic.forward(obs).row(0).transpose();

  // Rewards above used the statistics from before this batch.
  for (double s : all_scores) stats = stats_update(stats, s);
  return cs;
}

inline void compute_advantages(RolloutBuffer& buf, double gamma, double lambda) {
  const std::size_t ne = buf.num_envs, n = buf.steps;
  std::vector<double> r(n), v(n), d(n);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t t = 0; t < n; ++t) {
      const auto col = static_cast<Eigen::Index>(t * ne + e);
      r[t] = buf.rewards(col);
      v[t] = buf.values(col);
      d[t] = buf.dones(col);
    }
    const auto g = gae_advantages(r, v, d, buf.bootstrap(static_cast<Eigen::Index>(e)), gamma, lambda);
    for (std::size_t t = 0; t < n; ++t) {
      const auto col = static_cast<Eigen::Index>(t * ne + e);
      buf.advantages(col) = g.advantages[t];
      buf.returns(col) = g.returns[t];
    }
  }
}

// ---------------------------------------------------------------------------
// PPO update
// ---------------------------------------------------------------------------

struct PpoStats {
  double kl = 0.0;
  double clip_fraction = 0.0;
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double learning_rate = 0.0;
  bool aborted = false;
};

// Loss and gradients of one minibatch. Exposed for testing.
struct PpoMinibatchResult {
  double surrogate = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  double total = 0.0;
  Eigen::VectorXd actor_grad;
  Eigen::VectorXd log_std_grad;
  Eigen::VectorXd critic_grad;
};

inline PpoMinibatchResult ppo_minibatch(const ActorCritic& ac, const RolloutBuffer& buf,
                                        std::span<const Eigen::Index> idx,
                                        const Eigen::VectorXd& norm_adv, const PpoConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  const Eigen::MatrixXd obs = buf.obs(Eigen::all, idx);
  ForwardCache acache, ccache;
  const Eigen::MatrixXd mu = ac.actor.forward(obs, &acache);
  const Eigen::MatrixXd v = ac.critic.forward(obs, &ccache);
  const Eigen::ArrayXd inv_var = (-2.0 * ac.log_std.array()).exp();
  const Eigen::ArrayXd old_std = buf.old_log_std.array().exp();
  const Eigen::ArrayXd new_std = ac.log_std.array().exp();

  PpoMinibatchResult out;
  Eigen::MatrixXd d_mu(kNumJoints, n);
  Eigen::VectorXd d_log_std = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kNumJoints));
  Eigen::MatrixXd d_v(1, n);
  double clipped = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index c = idx[static_cast<std::size_t>(k)];
    const Eigen::VectorXd a = buf.actions.col(c);
    const double logp = gaussian_log_prob(a, mu.col(k), ac.log_std);
    const double ratio = std::exp(logp - buf.log_probs(c));
    const auto term = ppo_surrogate(ratio, norm_adv(c), cfg.clip);
    out.surrogate += term.loss / static_cast<double>(n);
    clipped += term.clipped ? 1.0 : 0.0;
    // d logp / d mu = (a - mu) / var, d logp / d log_std = z^2 - 1.
    const double g = term.d_ratio * ratio / static_cast<double>(n);
    const Eigen::ArrayXd diff = (a - mu.col(k)).array();
    d_mu.col(k) = (g * diff * inv_var).matrix();
    d_log_std += (g * (diff.square() * inv_var - 1.0)).matrix();

    const double err = v(0, k) - buf.returns(c);
    out.value_loss += err * err / static_cast<double>(n);
    d_v(0, k) = 2.0 * cfg.value_coef * err / static_cast<double>(n);

    // KL(old || new) for diagonal Gaussians.
    const Eigen::ArrayXd mdiff = (buf.means.col(c) - mu.col(k)).array();
    out.kl += ((new_std / old_std).log() + (old_std.square() + mdiff.square()) / (2.0 * new_std.square()) - 0.5)
                  .sum() /
              static_cast<double>(n);
  }
  out.entropy = gaussian_entropy(ac.log_std);
  d_log_std.array() -= cfg.entropy_coef;
  out.clip_fraction = clipped / static_cast<double>(n);
  out.total = out.surrogate + cfg.value_coef * out.value_loss - cfg.entropy_coef * out.entropy;
  out.actor_grad = ac.actor.backward(acache, d_mu);
  out.log_std_grad = d_log_std;
  out.critic_grad = ac.critic.backward(ccache, d_v);
  return out;
}

inline PpoStats ppo_update(ActorCritic& ac, RolloutBuffer& buf, const PpoConfig& cfg,
                           std::mt19937_64& rng) {
  const auto total = static_cast<Eigen::Index>(buf.size());
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "ppo_update: empty buffer");
  Eigen::VectorXd adv = buf.advantages;
  const double mean = adv.mean();
  const double sd = std::sqrt((adv.array() - mean).square().mean());
  adv = (adv.array() - mean) / (sd + 1e-8);

  const ActorCritic backup = ac;
  PpoStats st;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t mb = std::min<std::size_t>(cfg.minibatches, static_cast<std::size_t>(total));
  const std::size_t mb_size = static_cast<std::size_t>(total) / mb;
  std::size_t updates = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t m = 0; m < mb; ++m) {
      const std::span<const Eigen::Index> idx(order.data() + m * mb_size, mb_size);
      auto r = ppo_minibatch(ac, buf, idx, adv, cfg);
      if (!std::isfinite(r.total) || !r.actor_grad.allFinite() || !r.critic_grad.allFinite() ||
          !r.log_std_grad.allFinite()) {
        ac = backup;
        st.aborted = true;
        st.learning_rate = ac.learning_rate;
        return st;
      }
      if (cfg.adaptive_lr && ac.learning_rate > 0.0) {
        ac.set_learning_rate(adaptive_lr(ac.learning_rate, r.kl, cfg.kl_target));
      }
      const double norm = std::sqrt(r.actor_grad.squaredNorm() + r.log_std_grad.squaredNorm() +
                                    r.critic_grad.squaredNorm());
      if (cfg.max_grad_norm > 0.0 && norm > cfg.max_grad_norm) {
        const double s = cfg.max_grad_norm / norm;
        r.actor_grad *= s;
        r.log_std_grad *= s;
        r.critic_grad *= s;
      }
      optimizer_step(ac.actor_opt, ac.actor, r.actor_grad);
      optimizer_step(ac.log_std_opt, ac.log_std, r.log_std_grad);
      optimizer_step(ac.critic_opt, ac.critic, r.critic_grad);
      st.kl += r.kl;
      st.clip_fraction += r.clip_fraction;
      st.surrogate_loss += r.surrogate;
      st.value_loss += r.value_loss;
      st.entropy += r.entropy;
      ++updates;
    }
  }
  const double inv = 1.0 / static_cast<double>(updates);
  st.kl *= inv;
  st.clip_fraction *= inv;
  st.surrogate_loss *= inv;
  st.value_loss *= inv;
  st.entropy *= inv;
  st.learning_rate = ac.learning_rate;
  return st;
}

}  // namespace wasabi

#endif  // WASABI_RL_HPP_
