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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wasabi/reward.hpp"

using namespace wasabi;

TEST(TerminationPenalty, Values) {
  EXPECT_NEAR(termination_penalty(true, 0.99), -500.0, 1e-12);
  EXPECT_EQ(termination_penalty(false, 0.99), 0.0);
  EXPECT_DOUBLE_EQ(termination_penalty(true, 0.9), -50.0);
  EXPECT_THROW(termination_penalty(true, 1.0), Error);
  EXPECT_THROW(termination_penalty(true, 0.0), Error);
}

TEST(TotalReward, Combination) {
  EXPECT_EQ(total_reward(0.5, 0.0, -0.1, 1.0), 0.4);
  EXPECT_DOUBLE_EQ(total_reward(0.0, -500.0, 0.0, 1.0), -500.0);
  EXPECT_EQ(total_reward(3.0, -500.0, -0.25, 0.0), -0.25);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double ri = n(rng), rt = n(rng), rr = n(rng), w = std::abs(n(rng));
    EXPECT_EQ(total_reward(ri, rt, rr, w), w * (ri + rt) + rr);
  }
}

TEST(RunningStats, MatchesTwoPass) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(5.0, 2.0);
  std::vector<double> xs(5000);
  RunningStats s;
  for (auto& x : xs) {
    x = n(rng);
    s = stats_update(s, x);
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  EXPECT_EQ(s.count, 5000);
  EXPECT_NEAR(s.mean, mean, 1e-10);
  EXPECT_NEAR(s.variance(), var, 1e-9);
}

TEST(RunningStats, RejectsNonFinite) {
  RunningStats s;
  EXPECT_THROW(stats_update(s, std::nan("")), Error);
  EXPECT_THROW(stats_update(s, INFINITY), Error);
}

TEST(ImitationReward, ZeroDuringWarmup) {
  RunningStats s;
  for (int i = 0; i < 99; ++i) s = stats_update(s, static_cast<double>(i));
  EXPECT_EQ(imitation_reward(1e6, s), 0.0);
  s = stats_update(s, 99.0);
  EXPECT_TRUE(s.warm());
  EXPECT_NE(imitation_reward(1e6, s), 0.0);
}

TEST(ImitationReward, ConstantStreamUsesEpsilon) {
  RunningStats s;
  for (int i = 0; i < 200; ++i) s = stats_update(s, 2.0);
  EXPECT_EQ(imitation_reward(2.0, s), 0.0);
  EXPECT_DOUBLE_EQ(imitation_reward(2.0 + 1e-6, s), (1e-6 + 2.0 - 2.0) / 1e-6);
}

TEST(ImitationReward, NormalizationContract) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(5.0, 2.0);
  RunningStats s;
  for (int i = 0; i < 10000; ++i) s = stats_update(s, n(rng));
  double sum = 0.0, sq = 0.0;
  const int m = 10000;
  for (int i = 0; i < m; ++i) {
    const double r = imitation_reward(n(rng), s);
    sum += r;
    sq += r * r;
  }
  const double mean = sum / m;
  const double sd = std::sqrt(sq / m - mean * mean);
  EXPECT_LT(std::abs(mean), 0.05);
  EXPECT_GT(sd, 0.95);
  EXPECT_LT(sd, 1.05);
}

TEST(ImitationReward, AffineInvariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  RunningStats a, b;
  std::vector<double> xs(500);
  for (auto& x : xs) {
    x = n(rng);
    a = stats_update(a, x);
    b = stats_update(b, 10.0 * x - 3.0);
  }
  for (double q : {-1.0, 0.0, 2.5}) {
    EXPECT_NEAR(imitation_reward(q, a), imitation_reward(10.0 * q - 3.0, b), 1e-9);
  }
}

TEST(Regularization, Terms) {
  RegularizationInputs in;
  RewardWeights w;
  EXPECT_EQ(regularization_reward(in, w), 0.0);
  in.action = {1.0, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(regularization_reward(in, w), -0.005);
  in = {};
  in.joint_vel = {0.02, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(regularization_reward(in, w), -1.25e-8);
  in = {};
  in.joint_torque = {0.0, 2.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(regularization_reward(in, w), -1.25e-6 * 4.0);
  in.dt = 0.0;
  EXPECT_THROW(regularization_reward(in, w), Error);
}

TEST(Regularization, NeverPositiveWithDefaultWeights) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 5.0);
  RewardWeights w;
  w.w_pitch_rate = -0.01;
  for (int k = 0; k < 500; ++k) {
    RegularizationInputs in;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      in.action[j] = n(rng);
      in.prev_action[j] = n(rng);
      in.joint_vel[j] = n(rng);
      in.prev_joint_vel[j] = n(rng);
      in.joint_torque[j] = n(rng);
    }
    in.pitch_rate = n(rng);
    EXPECT_LE(regularization_reward(in, w), 0.0);
  }
}

TEST(RewardWeights, Violations) {
  RewardWeights w;
  EXPECT_TRUE(w.violations().empty());
  w.gamma = 1.0;
  w.w_imitation = -1.0;
  EXPECT_EQ(w.violations().size(), 2u);
}

TEST(Handcrafted, Formulas) {
  EXPECT_EQ(handcrafted_backflip_reward(1.5, false), 0.0);
  EXPECT_DOUBLE_EQ(handcrafted_backflip_reward(1.5, true), 7.5);
  EXPECT_DOUBLE_EQ(handcrafted_standup_reward(0.5, 0.3, true), 0.5 + 0.9);
  EXPECT_DOUBLE_EQ(handcrafted_standup_reward(0.5, 0.3, false), 0.5 + 0.9 + 2.0);
}
