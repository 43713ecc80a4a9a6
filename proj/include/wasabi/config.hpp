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

#ifndef WASABI_CONFIG_HPP_
#define WASABI_CONFIG_HPP_

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/discriminator.hpp"
#include "wasabi/error.hpp"
#include "wasabi/reward.hpp"
#include "wasabi/rl.hpp"
#include "wasabi/sim.hpp"

namespace wasabi {

struct TrainConfig {
  Motion task = Motion::kLeap;
  DiscriminatorConfig disc;
  PpoConfig ppo;
  RewardWeights reward;
  SimParams sim;
  // Paper scale runs 5000 iterations on 4096 environments.
  std::size_t iterations = 2000;
  std::vector<std::uint64_t> seeds{1};
  std::size_t num_workers = 1;
  std::size_t checkpoint_interval = 250;
  std::size_t eval_rollouts = 20;
  std::size_t eval_references = 20;
  std::size_t demo_count = 20;
  std::string references;  // CSV file or directory; empty generates demos
  std::string output_dir = "run";

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;

  std::vector<std::string> violations() const {
    std::vector<std::string> v = disc.violations();
    for (auto& s : ppo.violations()) v.push_back(s);
    for (auto& s : reward.violations()) v.push_back(s);
    for (auto& s : sim.violations()) v.push_back(s);
    if (reward.gamma != ppo.gamma) v.push_back("reward.gamma must equal ppo.gamma");
    if (iterations < 1) v.push_back("train.iterations must be >= 1");
    if (seeds.empty()) v.push_back("train.seeds must list at least one seed");
    if (num_workers < 1) v.push_back("train.num_workers must be >= 1");
    if (eval_rollouts < 1) v.push_back("eval.rollouts must be >= 1");
    if (eval_references < 1) v.push_back("eval.references must be >= 1");
    if (demo_count < 1) v.push_back("train.demo_count must be >= 1");
    return v;
  }
};

// Desk-scale per-task values. The learning rates of the original per-task
// grid search target thousands of environments and do not carry over.
inline TrainConfig task_defaults(Motion task, LossKind loss) {
  TrainConfig c;
  c.task = task;
  c.disc.loss_kind = loss;
  const bool wgan = loss == LossKind::kWgan;
  c.reward.w_imitation = wgan ? 1.0 : 0.8;
  c.disc.learning_rate = wgan ? 1e-4 : 1e-3;
  c.ppo.learning_rate = 1e-3;
  switch (task) {
    case Motion::kLeap:
      c.disc.horizon = 2;
      if (wgan) {
        c.disc.learning_rate = 1e-3;
        c.ppo.num_envs = 128;
        c.iterations = 5000;
      }
      break;
    case Motion::kStandUp:
      c.disc.horizon = 2;
      break;
    case Motion::kWave:
      c.disc.horizon = 4;
      break;
    case Motion::kBackFlip:
      c.disc.horizon = wgan ? 8 : 2;
      break;
  }
  return c;
}

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

inline double to_double(const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw std::invalid_argument("not a number");
  return v;
}

inline std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a non-negative integer");
  }
  return v;
}

inline bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("not a boolean");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  std::string key;
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

template <typename F>
Field real(std::string key, F member) {
  return {std::move(key), [member](const TrainConfig& c) { return fmt(member(const_cast<TrainConfig&>(c))); },
          [member](TrainConfig& c, const std::string& s) { member(c) = to_double(s); }};
}

template <typename F>
Field count(std::string key, F member) {
  return {std::move(key),
          [member](const TrainConfig& c) { return std::to_string(member(const_cast<TrainConfig&>(c))); },
          [member](TrainConfig& c, const std::string& s) {
            member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_u64(s));
          }};
}

template <typename F>
Field flag(std::string key, F member) {
  return {std::move(key),
          [member](const TrainConfig& c) { return std::string(member(const_cast<TrainConfig&>(c)) ? "true" : "false"); },
          [member](TrainConfig& c, const std::string& s) { member(c) = to_bool(s); }};
}

template <typename F>
Field sizes(std::string key, F member) {
  return {std::move(key), [member](const TrainConfig& c) { return join(member(const_cast<TrainConfig&>(c))); },
          [member](TrainConfig& c, const std::string& s) {
            auto& v = member(c);
            v.clear();
            for (const auto& item : split_list(s)) {
              v.push_back(static_cast<std::remove_reference_t<decltype(v[0])>>(to_u64(item)));
            }
          }};
}

template <typename F>
Field text(std::string key, F member) {
  return {std::move(key), [member](const TrainConfig& c) { return member(const_cast<TrainConfig&>(c)); },
          [member](TrainConfig& c, const std::string& s) { member(c) = s; }};
}

template <std::size_t N, typename F>
Field reals(std::string key, F member) {
  return {std::move(key),
          [member](const TrainConfig& c) {
            std::string s;
            const auto& a = member(const_cast<TrainConfig&>(c));
            for (std::size_t i = 0; i < N; ++i) s += (i ? "," : "") + fmt(a[i]);
            return s;
          },
          [member](TrainConfig& c, const std::string& s) {
            const auto items = split_list(s);
            if (items.size() != N) throw std::invalid_argument("expected " + std::to_string(N) + " values");
            auto& a = member(c);
            for (std::size_t i = 0; i < N; ++i) a[i] = to_double(items[i]);
          }};
}

#define WASABI_M(expr) [](TrainConfig& c) -> auto& { return c.expr; }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"task", [](const TrainConfig& c) { return std::string(motion_name(c.task)); },
       [](TrainConfig& c, const std::string& s) { c.task = motion_from_name(s); }},
      {"disc.loss", [](const TrainConfig& c) { return std::string(loss_kind_name(c.disc.loss_kind)); },
       [](TrainConfig& c, const std::string& s) { c.disc.loss_kind = loss_kind_from_name(s); }},
      count("disc.horizon", WASABI_M(disc.horizon)),
      real("disc.w_loss", WASABI_M(disc.w_loss)),
      real("disc.w_gp", WASABI_M(disc.w_gp)),
      real("disc.weight_decay", WASABI_M(disc.weight_decay)),
      real("disc.learning_rate", WASABI_M(disc.learning_rate)),
      real("disc.momentum", WASABI_M(disc.momentum)),
      count("disc.epochs", WASABI_M(disc.epochs_per_iter)),
      count("disc.minibatches", WASABI_M(disc.minibatches)),
      flag("disc.full_state", WASABI_M(disc.full_state)),
      sizes("disc.hidden", WASABI_M(disc.hidden)),
      real("disc.norm_min_std", WASABI_M(disc.norm_min_std)),
      real("ppo.gamma", WASABI_M(ppo.gamma)),
      real("ppo.gae_lambda", WASABI_M(ppo.gae_lambda)),
      real("ppo.clip", WASABI_M(ppo.clip)),
      real("ppo.entropy_coef", WASABI_M(ppo.entropy_coef)),
      real("ppo.value_coef", WASABI_M(ppo.value_coef)),
      real("ppo.max_grad_norm", WASABI_M(ppo.max_grad_norm)),
      count("ppo.epochs", WASABI_M(ppo.epochs)),
      count("ppo.minibatches", WASABI_M(ppo.minibatches)),
      real("ppo.kl_target", WASABI_M(ppo.kl_target)),
      flag("ppo.adaptive_lr", WASABI_M(ppo.adaptive_lr)),
      real("ppo.learning_rate", WASABI_M(ppo.learning_rate)),
      count("ppo.steps_per_iter", WASABI_M(ppo.steps_per_iter)),
      count("ppo.num_envs", WASABI_M(ppo.num_envs)),
      real("ppo.init_log_std", WASABI_M(ppo.init_log_std)),
      real("ppo.action_scale", WASABI_M(ppo.action_scale)),
      sizes("ppo.hidden", WASABI_M(ppo.hidden)),
      real("reward.w_imitation", WASABI_M(reward.w_imitation)),
      real("reward.w_action_rate", WASABI_M(reward.w_action_rate)),
      real("reward.w_joint_accel", WASABI_M(reward.w_joint_accel)),
      real("reward.w_joint_torque", WASABI_M(reward.w_joint_torque)),
      real("reward.w_pitch_rate", WASABI_M(reward.w_pitch_rate)),
      real("reward.gamma", WASABI_M(reward.gamma)),
      real("sim.body_mass", WASABI_M(sim.body_mass)),
      real("sim.body_half_length", WASABI_M(sim.body_half_length)),
      real("sim.body_half_height", WASABI_M(sim.body_half_height)),
      real("sim.hip_offset", WASABI_M(sim.hip_offset)),
      reals<2>("sim.link_lengths", WASABI_M(sim.link_lengths)),
      reals<kNumJoints>("sim.joint_lower", WASABI_M(sim.joint_lower)),
      reals<kNumJoints>("sim.joint_upper", WASABI_M(sim.joint_upper)),
      reals<kNumJoints>("sim.nominal_joint_pos", WASABI_M(sim.nominal_joint_pos)),
      real("sim.kp", WASABI_M(sim.kp)),
      real("sim.kd", WASABI_M(sim.kd)),
      real("sim.joint_inertia", WASABI_M(sim.joint_inertia)),
      real("sim.torque_limit", WASABI_M(sim.torque_limit)),
      real("sim.contact_stiffness", WASABI_M(sim.contact_stiffness)),
      real("sim.contact_damping", WASABI_M(sim.contact_damping)),
      real("sim.tangential_stiffness", WASABI_M(sim.tangential_stiffness)),
      real("sim.tangential_damping", WASABI_M(sim.tangential_damping)),
      real("sim.friction_coefficient", WASABI_M(sim.friction_coefficient)),
      real("sim.gravity", WASABI_M(sim.gravity)),
      real("sim.dt_physics", WASABI_M(sim.dt_physics)),
      {"sim.control_decimation", [](const TrainConfig& c) { return std::to_string(c.sim.control_decimation); },
       [](TrainConfig& c, const std::string& s) { c.sim.control_decimation = static_cast<int>(to_u64(s)); }},
      flag("sim.mass_perturbation", WASABI_M(sim.mass_perturbation)),
      real("sim.mass_offset_low", WASABI_M(sim.mass_offset_low)),
      real("sim.mass_offset_high", WASABI_M(sim.mass_offset_high)),
      real("sim.reset_joint_noise", WASABI_M(sim.reset_joint_noise)),
      real("sim.reset_height_noise", WASABI_M(sim.reset_height_noise)),
      real("sim.max_episode_time", WASABI_M(sim.max_episode_time)),
      count("train.iterations", WASABI_M(iterations)),
      sizes("train.seeds", WASABI_M(seeds)),
      count("train.num_workers", WASABI_M(num_workers)),
      count("train.checkpoint_interval", WASABI_M(checkpoint_interval)),
      count("train.demo_count", WASABI_M(demo_count)),
      text("train.references", WASABI_M(references)),
      text("train.output_dir", WASABI_M(output_dir)),
      count("eval.rollouts", WASABI_M(eval_rollouts)),
      count("eval.references", WASABI_M(eval_references)),
  };
  return f;
}

#undef WASABI_M

}  // namespace config_detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& f : config_detail::fields()) k.push_back(f.key);
  return k;
}

// Applies one `key = value` assignment. Returns a diagnostic, empty on success.
inline std::string apply_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : config_detail::fields()) {
    if (f.key != key) continue;
    try {
      f.set(cfg, value);
      return "";
    } catch (const std::exception& e) {
      return key + ": invalid value '" + value + "' (" + e.what() + ")";
    }
  }
  return "unknown key '" + key + "'";
}

// Parses the flat `key = value` format ('#' starts a comment). `task` and
// `disc.loss` select the preset the remaining keys override. Every problem
// found is reported in one kConfig error.
inline TrainConfig parse_config(const std::string& text_in) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::vector<std::string> problems;
  std::stringstream ss(text_in);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    kv.emplace_back(config_detail::trim(line.substr(0, eq)), config_detail::trim(line.substr(eq + 1)));
  }
  Motion task = Motion::kLeap;
  LossKind loss = LossKind::kWgan;
  for (const auto& [k, v] : kv) {
    try {
      if (k == "task") task = motion_from_name(v);
      if (k == "disc.loss") loss = loss_kind_from_name(v);
    } catch (const std::exception&) {
      // reported below
    }
  }
  TrainConfig cfg = task_defaults(task, loss);
  for (const auto& [k, v] : kv) {
    auto msg = apply_config_value(cfg, k, v);
    if (!msg.empty()) problems.push_back(std::move(msg));
  }
  for (auto& v : cfg.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) {
    std::string all = "invalid configuration:";
    for (const auto& p : problems) all += "\n  " + p;
    throw Error(ErrorCode::kConfig, all);
  }
  return cfg;
}

inline std::string serialize_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& f : config_detail::fields()) out += f.key + " = " + f.get(cfg) + "\n";
  return out;
}

inline TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace wasabi

#endif  // WASABI_CONFIG_HPP_
