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

#ifndef WASABI_TRAINER_HPP_
#define WASABI_TRAINER_HPP_

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wasabi/config.hpp"
#include "wasabi/core.hpp"
#include "wasabi/discriminator.hpp"
#include "wasabi/error.hpp"
#include "wasabi/nn.hpp"
#include "wasabi/reward.hpp"
#include "wasabi/rl.hpp"
#include "wasabi/sim.hpp"

namespace wasabi {

struct IterationMetrics {
  std::size_t iteration = 0;
  double mean_reward = 0.0;
  double mean_imitation = 0.0;
  double mean_regularization = 0.0;
  double mean_score = 0.0;
  double disc_loss = 0.0;
  double disc_adversarial = 0.0;
  double disc_penalty = 0.0;
  double kl = 0.0;
  double learning_rate = 0.0;
  double clip_fraction = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double episode_length = 0.0;  // mean over episodes that ended this iteration, in steps
  double termination_rate = 0.0;
  bool ppo_aborted = false;

  nlohmann::json to_json() const {
    return {{"iteration", iteration},
            {"mean_reward", mean_reward},
            {"mean_imitation_reward", mean_imitation},
            {"mean_regularization_reward", mean_regularization},
            {"mean_disc_score", mean_score},
            {"disc_loss", disc_loss},
            {"disc_adversarial", disc_adversarial},
            {"disc_penalty", disc_penalty},
            {"kl", kl},
            {"lr", learning_rate},
            {"clip_fraction", clip_fraction},
            {"value_loss", value_loss},
            {"entropy", entropy},
            {"episode_length", episode_length},
            {"termination_rate", termination_rate},
            {"ppo_aborted", ppo_aborted}};
  }
};

namespace ckpt {

inline nlohmann::json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd to_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

inline std::mt19937_64 to_rng(const nlohmann::json& j) {
  std::mt19937_64 rng;
  std::istringstream is(j.get<std::string>());
  is >> rng;
  return rng;
}

inline nlohmann::json net(const MlpNet& n) {
  std::vector<std::string> acts;
  for (auto a : n.activations()) acts.push_back(activation_name(a));
  return {{"sizes", n.layer_sizes()}, {"activations", acts}, {"params", vec(n.params())}};
}

inline MlpNet to_net(const nlohmann::json& j) {
  std::vector<Activation> acts;
  for (const auto& a : j.at("activations")) acts.push_back(activation_from_name(a.get<std::string>()));
  return MlpNet(j.at("sizes").get<std::vector<std::size_t>>(), acts, to_vec(j.at("params")));
}

inline nlohmann::json opt(const OptimizerState& s) {
  return {{"kind", optimizer_name(s.config.kind)}, {"lr", s.config.learning_rate},
          {"weight_decay", s.config.weight_decay}, {"momentum", s.config.momentum},
          {"first", vec(s.first)}, {"second", vec(s.second)}, {"steps", s.steps}};
}

inline OptimizerState to_opt(const nlohmann::json& j) {
  OptimizerConfig c;
  c.kind = optimizer_from_name(j.at("kind").get<std::string>());
  c.learning_rate = j.at("lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.momentum = j.at("momentum").get<double>();
  OptimizerState s(c, 0);
  s.first = to_vec(j.at("first"));
  s.second = to_vec(j.at("second"));
  s.steps = j.at("steps").get<std::int64_t>();
  return s;
}

inline nlohmann::json sim_state(const SimState& s) {
  return {{"x", s.base_x}, {"z", s.base_z}, {"pitch", s.pitch}, {"vx", s.base_vx}, {"vz", s.base_vz},
          {"pitch_rate", s.pitch_rate}, {"q", s.joint_pos}, {"dq", s.joint_vel}, {"time", s.time},
          {"terminal", s.terminal}, {"mass_offset", s.mass_offset}, {"flight_angle", s.flight_angle},
          {"airborne", s.airborne}};
}

inline SimState to_sim_state(const nlohmann::json& j) {
  SimState s;
  s.base_x = j.at("x");
  s.base_z = j.at("z");
  s.pitch = j.at("pitch");
  s.base_vx = j.at("vx");
  s.base_vz = j.at("vz");
  s.pitch_rate = j.at("pitch_rate");
  s.joint_pos = j.at("q");
  s.joint_vel = j.at("dq");
  s.time = j.at("time");
  s.terminal = j.at("terminal");
  s.mass_offset = j.at("mass_offset");
  s.flight_angle = j.at("flight_angle");
  s.airborne = j.at("airborne");
  return s;
}

inline nlohmann::json env(const EnvSlot& e) {
  return {{"sim", sim_state(e.state.sim)},
          {"anchor_active", e.state.anchors.active},
          {"anchor_x", e.state.anchors.x},
          {"window", e.window.raw()},
          {"last_target", e.last_target},
          {"prev_joint_vel", e.prev_joint_vel},
          {"prev_frame", e.prev_frame},
          {"rng", rng_state(e.rng)},
          {"episode_steps", e.episode_steps},
          {"episode_return", e.episode_return}};
}

inline void to_env(const nlohmann::json& j, EnvSlot& e) {
  e.state.sim = to_sim_state(j.at("sim"));
  e.state.anchors.active = j.at("anchor_active");
  e.state.anchors.x = j.at("anchor_x");
  e.window.set_raw(j.at("window").get<std::vector<double>>());
  e.last_target = j.at("last_target");
  e.prev_joint_vel = j.at("prev_joint_vel");
  e.prev_frame = j.at("prev_frame");
  e.rng = to_rng(j.at("rng"));
  e.episode_steps = j.at("episode_steps");
  e.episode_return = j.at("episode_return");
}

}  // namespace ckpt

// Algorithm state for one seed: policy, value function, discriminator,
// reward statistics and the environments mid-episode.
class Trainer {
 public:
  Trainer(TrainConfig cfg, ReferenceDataset refs, std::uint64_t seed)
      : cfg_(std::move(cfg)), refs_(std::move(refs)), seed_(seed) {
    if (auto v = cfg_.violations(); !v.empty()) {
      std::string all = "invalid configuration:";
      for (const auto& s : v) all += "\n  " + s;
      throw Error(ErrorCode::kConfig, all);
    }
    refs_.validate(cfg_.disc.horizon);
    if (cfg_.disc.full_state && !refs_.has_joints()) {
      throw Error(ErrorCode::kInvalidArgument, "full-state discriminator needs joint columns in the references");
    }
    std::seed_seq trainer_seq{seed, std::uint64_t{0}};
    rng_.seed(trainer_seq);
    ac_ = ActorCritic(cfg_.ppo, rng_);
    disc_ = Discriminator(cfg_.disc,
                          FeatureNormalizer::from_dataset(refs_, cfg_.disc.full_state, cfg_.disc.norm_min_std),
                          rng_);
    OptimizerConfig oc;
    oc.kind = cfg_.disc.loss_kind == LossKind::kWgan ? OptimizerKind::kRmsProp : OptimizerKind::kSgd;
    oc.learning_rate = cfg_.disc.learning_rate;
    oc.weight_decay = cfg_.disc.weight_decay;
    oc.momentum = cfg_.disc.momentum;
    disc_opt_ = OptimizerState(oc, disc_.net.num_params());
    ctx_ = RolloutContext::make(cfg_.sim, cfg_.disc.full_state);
    envs_.resize(cfg_.ppo.num_envs);
    for (std::size_t e = 0; e < envs_.size(); ++e) {
      std::seed_seq env_seq{seed, std::uint64_t{1}, std::uint64_t{e}};
      envs_[e].rng.seed(env_seq);
      envs_[e].window = WindowBuffer(cfg_.disc.horizon, frame_dim(cfg_.disc.full_state));
      reset_slot(envs_[e], ctx_);
    }
  }

  IterationMetrics iterate() {
    IterationMetrics m;
    const CollectStats cs = collect_rollout(envs_, ac_, disc_, stats_, cfg_.reward, cfg_.ppo, ctx_,
                                            buffer_, cfg_.num_workers);
    compute_advantages(buffer_, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
    const PpoStats ps = ppo_update(ac_, buffer_, cfg_.ppo, rng_);
    update_discriminator(m);
    ++iteration_;

    m.iteration = iteration_;
    m.mean_reward = buffer_.rewards.mean();
    m.mean_imitation = buffer_.r_imitation.mean();
    m.mean_regularization = buffer_.r_regularization.mean();
    m.mean_score = buffer_.scores.mean();
    m.kl = ps.kl;
    m.learning_rate = ps.learning_rate;
    m.clip_fraction = ps.clip_fraction;
    m.value_loss = ps.value_loss;
    m.entropy = ps.entropy;
    m.ppo_aborted = ps.aborted;
    m.episode_length = cs.episodes_finished ? cs.episode_length_sum / static_cast<double>(cs.episodes_finished) : 0.0;
    m.termination_rate = buffer_.terminated.mean();
    return m;
  }

  std::size_t iteration() const { return iteration_; }
  std::uint64_t seed() const { return seed_; }
  const TrainConfig& config() const { return cfg_; }
  const ReferenceDataset& references() const { return refs_; }
  const ActorCritic& policy() const { return ac_; }
  const Discriminator& discriminator() const { return disc_; }
  const RunningStats& stats() const { return stats_; }
  const RolloutContext& context() const { return ctx_; }
  const RolloutBuffer& last_buffer() const { return buffer_; }
  const std::vector<EnvSlot>& envs() const { return envs_; }

  // Everything needed to continue bit-exactly, references included.
  nlohmann::json checkpoint() const {
    std::ostringstream refs;
    write_reference_csv(refs, refs_);
    nlohmann::json envs = nlohmann::json::array();
    for (const auto& e : envs_) envs.push_back(ckpt::env(e));
    return {{"format", "wasabi-checkpoint-1"},
            {"config", serialize_config(cfg_)},
            {"seed", seed_},
            {"iteration", iteration_},
            {"references", refs.str()},
            {"rng", ckpt::rng_state(rng_)},
            {"actor", ckpt::net(ac_.actor)},
            {"critic", ckpt::net(ac_.critic)},
            {"log_std", ckpt::vec(ac_.log_std)},
            {"policy_lr", ac_.learning_rate},
            {"actor_opt", ckpt::opt(ac_.actor_opt)},
            {"log_std_opt", ckpt::opt(ac_.log_std_opt)},
            {"critic_opt", ckpt::opt(ac_.critic_opt)},
            {"disc", ckpt::net(disc_.net)},
            {"disc_opt", ckpt::opt(disc_opt_)},
            {"norm_mean", ckpt::vec(disc_.normalizer.mean)},
            {"norm_inv_std", ckpt::vec(disc_.normalizer.inv_std)},
            {"stats", {{"count", stats_.count}, {"mean", stats_.mean}, {"m2", stats_.m2}}},
            {"envs", envs}};
  }

  static Trainer restore(const nlohmann::json& j) {
    try {
      if (j.at("format") != "wasabi-checkpoint-1") {
        throw Error(ErrorCode::kInvalidArgument, "unknown checkpoint format");
      }
      TrainConfig cfg = parse_config(j.at("config").get<std::string>());
      ReferenceDataset refs;
      std::istringstream rs(j.at("references").get<std::string>());
      parse_reference_csv(rs, refs, "checkpoint");
      Trainer t(cfg, std::move(refs), j.at("seed").get<std::uint64_t>());
      t.iteration_ = j.at("iteration");
      t.rng_ = ckpt::to_rng(j.at("rng"));
      t.ac_.actor = ckpt::to_net(j.at("actor"));
      t.ac_.critic = ckpt::to_net(j.at("critic"));
      t.ac_.log_std = ckpt::to_vec(j.at("log_std"));
      t.ac_.learning_rate = j.at("policy_lr");
      t.ac_.actor_opt = ckpt::to_opt(j.at("actor_opt"));
      t.ac_.log_std_opt = ckpt::to_opt(j.at("log_std_opt"));
      t.ac_.critic_opt = ckpt::to_opt(j.at("critic_opt"));
      t.disc_.net = ckpt::to_net(j.at("disc"));
      t.disc_opt_ = ckpt::to_opt(j.at("disc_opt"));
      t.disc_.normalizer.mean = ckpt::to_vec(j.at("norm_mean"));
      t.disc_.normalizer.inv_std = ckpt::to_vec(j.at("norm_inv_std"));
      t.stats_.count = j.at("stats").at("count");
      t.stats_.mean = j.at("stats").at("mean");
      t.stats_.m2 = j.at("stats").at("m2");
      const auto& envs = j.at("envs");
      if (envs.size() != t.envs_.size()) throw Error(ErrorCode::kShapeMismatch, "checkpoint env count");
      for (std::size_t e = 0; e < t.envs_.size(); ++e) ckpt::to_env(envs[e], t.envs_[e]);
      return t;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument, std::string("corrupt checkpoint: ") + e.what());
    }
  }

 private:
  void update_discriminator(IterationMetrics& m) {
    const auto n = static_cast<std::size_t>(buffer_.windows.cols());
    const std::size_t mb = std::min(cfg_.disc.minibatches, n);
    const std::size_t mb_size = n / mb;
    std::vector<Eigen::Index> order(n);
    double loss = 0.0, adv = 0.0, pen = 0.0;
    std::size_t updates = 0;
    for (std::size_t epoch = 0; epoch < cfg_.disc.epochs_per_iter; ++epoch) {
      std::iota(order.begin(), order.end(), Eigen::Index{0});
      std::shuffle(order.begin(), order.end(), rng_);
      for (std::size_t k = 0; k < mb; ++k) {
        const std::span<const Eigen::Index> idx(order.data() + k * mb_size, mb_size);
        const Eigen::MatrixXd pol = buffer_.windows(Eigen::all, idx);
        const auto ref_w = sample_reference_windows(refs_, mb_size, cfg_.disc.horizon, rng_, cfg_.disc.full_state);
        const Eigen::MatrixXd ref = windows_to_matrix(ref_w);
        const LossResult r = disc_.loss(ref, pol);
        if (!std::isfinite(r.loss)) continue;
        optimizer_step(disc_opt_, disc_.net, r.grads);
        loss += r.loss;
        adv += r.adversarial;
        pen += r.penalty;
        ++updates;
      }
    }
    if (updates > 0) {
      m.disc_loss = loss / static_cast<double>(updates);
      m.disc_adversarial = adv / static_cast<double>(updates);
      m.disc_penalty = pen / static_cast<double>(updates);
    }
  }

  TrainConfig cfg_;
  ReferenceDataset refs_;
  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_;
  ActorCritic ac_;
  Discriminator disc_;
  OptimizerState disc_opt_;
  RunningStats stats_;
  RolloutContext ctx_;
  std::vector<EnvSlot> envs_;
  RolloutBuffer buffer_;
  std::size_t iteration_ = 0;
};

// Demonstrations for a config: loaded from `references` when set, otherwise
// generated from the task's script with the given seed.
inline ReferenceDataset make_references(const TrainConfig& cfg, std::uint64_t seed) {
  if (!cfg.references.empty()) return load_reference_dataset(cfg.references, cfg.disc.horizon);
  std::mt19937_64 rng(seed);
  return generate_demo_dataset(cfg.task, cfg.demo_count, standing_height(cfg.sim), rng, DemoOptions{});
}

}  // namespace wasabi

#endif  // WASABI_TRAINER_HPP_
