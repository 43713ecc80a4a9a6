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

#ifndef WASABI_REWARD_HPP_
#define WASABI_REWARD_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/error.hpp"

namespace wasabi {

// Streaming mean and population variance (Welford).
struct RunningStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double epsilon = 1e-6;
  std::int64_t warmup = 100;

  double variance() const { return count > 0 ? m2 / static_cast<double>(count) : 0.0; }
  double stddev() const { return std::max(std::sqrt(variance()), epsilon); }
  bool warm() const { return count >= warmup; }
};

inline RunningStats stats_update(RunningStats stats, double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::kNonFinite, "stats_update: value");
  ++stats.count;
  const double delta = value - stats.mean;
  stats.mean += delta / static_cast<double>(stats.count);
  stats.m2 += delta * (value - stats.mean);
  return stats;
}

// (score - mean) / std once the statistics are warm, 0 before.
inline double imitation_reward(double score, const RunningStats& stats) {
  if (!stats.warm()) return 0.0;
  return (score - stats.mean) / stats.stddev();
}

// -5 / (1 - gamma) on early termination. The normalized reward has unit
// scale, so the lower-bound multiplier is fixed at 5.
inline double termination_penalty(bool is_early_termination, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0, 1)");
  }
  return is_early_termination ? -5.0 / (1.0 - gamma) : 0.0;
}

inline double total_reward(double r_imitation, double r_termination, double r_regularization,
                           double w_imitation) {
  return w_imitation * (r_imitation + r_termination) + r_regularization;
}

struct RewardWeights {
  double w_imitation = 1.0;
  double w_action_rate = -0.005;
  double w_joint_accel = -1.25e-8;
  double w_joint_torque = -1.25e-6;
  // Planar stand-in for the roll/yaw/lateral terms.
  double w_pitch_rate = 0.0;
  double gamma = 0.99;

  friend bool operator==(const RewardWeights&, const RewardWeights&) = default;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(gamma > 0.0 && gamma < 1.0)) v.push_back("reward.gamma must lie in (0, 1)");
    if (!(w_imitation >= 0.0)) v.push_back("reward.w_imitation must be >= 0");
    return v;
  }
};

struct RegularizationInputs {
  std::array<double, kNumJoints> action{};
  std::array<double, kNumJoints> prev_action{};
  std::array<double, kNumJoints> joint_vel{};
  std::array<double, kNumJoints> prev_joint_vel{};
  std::array<double, kNumJoints> joint_torque{};
  double pitch_rate = 0.0;
  double dt = 0.02;
};

inline double regularization_reward(const RegularizationInputs& in, const RewardWeights& w) {
  if (!(in.dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "regularization: dt must be > 0");
  double action_rate = 0.0, joint_accel = 0.0, torque = 0.0;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const double da = in.action[j] - in.prev_action[j];
    const double acc = (in.joint_vel[j] - in.prev_joint_vel[j]) / in.dt;
    action_rate += da * da;
    joint_accel += acc * acc;
    torque += in.joint_torque[j] * in.joint_torque[j];
  }
  return w.w_action_rate * action_rate + w.w_joint_accel * joint_accel +
         w.w_joint_torque * torque + w.w_pitch_rate * in.pitch_rate * in.pitch_rate;
}

struct StandUpWeights {
  double pitch = 1.0;
  double height = 3.0;
  double front_lift = 2.0;
};

// Rewards raising the nose, base height and keeping the front feet off the
// ground.
inline double handcrafted_standup_reward(double pitch, double height, bool front_feet_contact,
                                         const StandUpWeights& w = {}) {
  return w.pitch * pitch + w.height * height + w.front_lift * (front_feet_contact ? 0.0 : 1.0);
}

// Paid once per landing: weight times the rotation accumulated in flight.
inline double handcrafted_backflip_reward(double flight_traversed_angle, bool landed,
                                          double weight = 5.0) {
  return landed ? weight * flight_traversed_angle : 0.0;
}

}  // namespace wasabi

#endif  // WASABI_REWARD_HPP_
