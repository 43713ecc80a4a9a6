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

#include <random>

#include "wasabi/dtw.hpp"

using namespace wasabi;

namespace {

FeatureSequence random_sequence(std::mt19937_64& rng, std::size_t len, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureSequence s(len, std::vector<double>(dim));
  for (auto& x : s) {
    for (auto& v : x) v = n(rng);
  }
  return s;
}

FeatureSequence scalars(std::initializer_list<double> xs) {
  FeatureSequence s;
  for (double x : xs) s.push_back({x});
  return s;
}

std::vector<DtwConfig> all_configs() {
  std::vector<DtwConfig> out;
  for (auto p : {StepPattern::kSymmetric1, StepPattern::kMoriAsymmetric}) {
    for (bool oe : {false, true}) out.push_back({p, oe});
  }
  return out;
}

}  // namespace

TEST(Dtw, IdenticalSymmetricIsZeroDiagonal) {
  std::mt19937_64 rng(1);
  const auto a = random_sequence(rng, 7, 6);
  const auto r = dtw_distance(a, a, {StepPattern::kSymmetric1, false});
  EXPECT_EQ(r.distance, 0.0);
  ASSERT_EQ(r.alignment.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(r.alignment[i].query_index, i);
    EXPECT_EQ(r.alignment[i].reference_index, i);
  }
}

TEST(Dtw, OpenEndMatchesPrefix) {
  const DtwConfig cfg{StepPattern::kMoriAsymmetric, true};
  EXPECT_EQ(dtw_distance(scalars({0.0}), scalars({0.0, 5.0}), cfg).distance, 0.0);
  EXPECT_EQ(dtw_brute_force(scalars({0.0}), scalars({0.0, 5.0}), cfg), 0.0);
  EXPECT_THROW(dtw_distance(scalars({0.0}), scalars({0.0, 5.0}), {StepPattern::kMoriAsymmetric, false}),
               Error);
}

TEST(Dtw, SingleElements) {
  const FeatureSequence a{{0.0, 0.0}}, b{{3.0, 4.0}};
  for (const auto& cfg : all_configs()) {
    EXPECT_EQ(dtw_brute_force(a, b, cfg), 5.0);
    EXPECT_EQ(dtw_distance(a, b, cfg).distance, 5.0);
  }
}

TEST(Dtw, Errors) {
  EXPECT_THROW(dtw_distance(FeatureSequence{}, scalars({1.0})), Error);
  try {
    dtw_distance(FeatureSequence{{1.0, 2.0}}, scalars({1.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  // Asymmetric pattern advances the reference by at most 2 per query step.
  try {
    dtw_distance(scalars({0.0, 1.0}), scalars({0, 1, 2, 3, 4, 5}), {StepPattern::kMoriAsymmetric, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSequenceTooShort);
  }
  std::mt19937_64 rng(2);
  EXPECT_THROW(dtw_brute_force(random_sequence(rng, 9, 1), random_sequence(rng, 3, 1)), Error);
}

TEST(Dtw, MatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 6), dim(1, 6);
  int compared = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = dim(rng);
    const auto q = random_sequence(rng, len(rng), d);
    const auto r = random_sequence(rng, len(rng), d);
    for (const auto& cfg : all_configs()) {
      double brute = 0.0;
      bool admissible = true;
      try {
        brute = dtw_brute_force(q, r, cfg);
      } catch (const Error&) {
        admissible = false;
      }
      if (!admissible) {
        EXPECT_THROW(dtw_distance(q, r, cfg), Error);
        continue;
      }
      const auto res = dtw_distance(q, r, cfg);
      EXPECT_NEAR(res.distance, brute, 1e-9);
      double along = 0.0;
      for (const auto& s : res.alignment) along += s.local_cost;
      EXPECT_NEAR(along, res.distance, 1e-9);
      ++compared;
    }
  }
  EXPECT_GT(compared, 3000);
}

TEST(Dtw, AsymmetricIsNotSymmetric) {
  const auto a = scalars({0.0, 1.0, 2.0});
  const auto b = scalars({0.0, 2.0});
  const DtwConfig cfg{StepPattern::kMoriAsymmetric, true};
  EXPECT_NE(dtw_distance(a, b, cfg).distance, dtw_distance(b, a, cfg).distance);
}

TEST(Dtw, NonNegative) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto q = random_sequence(rng, 10, 3);
    const auto r = random_sequence(rng, 12, 3);
    for (const auto& cfg : all_configs()) EXPECT_GE(dtw_distance(q, r, cfg).distance, 0.0);
  }
}

TEST(Dtw, AppendingToQueryNeverDecreasesOpenEndDistance) {
  std::mt19937_64 rng(5);
  const DtwConfig cfg{StepPattern::kMoriAsymmetric, true};
  for (int k = 0; k < 300; ++k) {
    const auto r = random_sequence(rng, 6, 2);
    auto q = random_sequence(rng, 1, 2);
    double prev = dtw_distance(q, r, cfg).distance;
    for (int n = 2; n <= 6; ++n) {
      q.push_back(random_sequence(rng, 1, 2).front());
      const double cur = dtw_distance(q, r, cfg).distance;
      EXPECT_GE(cur, prev);
      EXPECT_NEAR(cur, dtw_brute_force(q, r, cfg), 1e-9);
      prev = cur;
    }
  }
}

TEST(Dtw, PerturbationBound) {
  std::mt19937_64 rng(6);
  const auto a = random_sequence(rng, 40, 6);
  for (double eps : {1e-1, 1e-3, 1e-6}) {
    auto b = a;
    for (auto& x : b) {
      for (auto& v : x) v += eps;
    }
    // Diagonal path bound: n * eps * sqrt(dim).
    for (const auto& cfg : all_configs()) {
      EXPECT_LE(dtw_distance(a, b, cfg).distance, 40 * eps * std::sqrt(6.0) * (1 + 1e-12));
    }
  }
}
