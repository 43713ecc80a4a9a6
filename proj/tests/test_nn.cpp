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

#include "oracles.hpp"
#include "wasabi/nn.hpp"

using namespace wasabi;

namespace {

Eigen::VectorXd param_grad_fd(MlpNet net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& og) {
  const Eigen::VectorXd p0 = net.params();
  return oracle::finite_difference(
      [&](const Eigen::VectorXd& p) {
        net.mutable_params() = p;
        return oracle::Probe{net.forward(x).cwiseProduct(og).sum(), oracle::activation_pattern(net, x)};
      },
      p0);
}

}  // namespace

TEST(MlpNet, ParameterCount) {
  MlpNet net({5, 7, 3, 2}, Activation::kElu);
  EXPECT_EQ(net.num_params(), (5u + 1) * 7 + (7u + 1) * 3 + (3u + 1) * 2);
  EXPECT_EQ(net.activations().back(), Activation::kIdentity);
  EXPECT_THROW(MlpNet({4}, Activation::kRelu), Error);
  EXPECT_THROW(MlpNet({4, 0, 1}, Activation::kRelu), Error);
}

TEST(MlpNet, ZeroWeightsGiveOutputBias) {
  MlpNet net({3, 4, 2}, Activation::kRelu);
  net.bias(1)(0) = 0.25;
  net.bias(1)(1) = -3.0;
  const Eigen::VectorXd y = net.forward_one(Eigen::Vector3d(1.0, -2.0, 7.0));
  EXPECT_EQ(y(0), 0.25);
  EXPECT_EQ(y(1), -3.0);
}

TEST(MlpNet, IdentityLayer) {
  MlpNet net({3, 3}, Activation::kIdentity);
  net.weight(0) = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d x(0.5, -1.5, 2.0);
  EXPECT_EQ(net.forward_one(x), Eigen::VectorXd(x));
}

TEST(MlpNet, ForwardMatchesLoopOracle) {
  for (auto act : {Activation::kRelu, Activation::kElu}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::mt19937_64 rng(seed);
      MlpNet net = oracle::random_net(rng, act, 3);
      const Eigen::MatrixXd x = oracle::random_matrix(rng, net.input_dim(), 1);
      const Eigen::VectorXd y = net.forward_one(x.col(0));
      const auto ref = oracle::forward_loops(net, {x.data(), x.data() + x.size()});
      for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y(static_cast<Eigen::Index>(i)), ref[i], 1e-12);
    }
  }
}

TEST(MlpNet, ForwardIsPureAndDeterministic) {
  std::mt19937_64 rng(4);
  MlpNet net({6, 16, 16, 1}, Activation::kElu);
  net.init_orthogonal(rng, std::sqrt(2.0), 1.0);
  const Eigen::VectorXd before = net.params();
  const Eigen::MatrixXd x = oracle::random_matrix(rng, 6, 10);
  const Eigen::MatrixXd a = net.forward(x);
  const Eigen::MatrixXd b = net.forward(x);
  EXPECT_EQ(a, b);
  EXPECT_EQ(net.params(), before);
  EXPECT_TRUE(a.allFinite());
}

TEST(MlpNet, ShapeMismatchThrows) {
  MlpNet net({3, 2}, Activation::kRelu);
  try {
    net.forward(Eigen::MatrixXd::Zero(4, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(MlpNet, LinearNetWeightGradIsInput) {
  MlpNet net({3, 1}, Activation::kIdentity);
  ForwardCache c;
  const Eigen::Vector3d x(0.3, -2.0, 5.0);
  net.forward(Eigen::MatrixXd(x), &c);
  const Eigen::VectorXd g = net.backward(c, Eigen::MatrixXd::Ones(1, 1));
  EXPECT_EQ(g.head(3), Eigen::VectorXd(x));
  EXPECT_EQ(g(3), 1.0);
}

TEST(MlpNet, ZeroOutputGradGivesZeroGrads) {
  std::mt19937_64 rng(2);
  MlpNet net = oracle::random_net(rng, Activation::kElu, 2);
  ForwardCache c;
  net.forward(oracle::random_matrix(rng, net.input_dim(), 3), &c);
  Eigen::MatrixXd gin;
  const Eigen::VectorXd g = net.backward(c, Eigen::MatrixXd::Zero(2, 3), &gin);
  EXPECT_TRUE(g.isZero(0.0));
  EXPECT_TRUE(gin.isZero(0.0));
}

TEST(MlpNet, StaleCacheRejected) {
  std::mt19937_64 rng(3);
  MlpNet net = oracle::random_net(rng, Activation::kRelu);
  ForwardCache c;
  net.forward(oracle::random_matrix(rng, net.input_dim(), 1), &c);
  net.mutable_params()(0) += 1.0;
  try {
    net.backward(c, Eigen::MatrixXd::Ones(1, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kStaleCache);
  }
  MlpNet other = net;
  ForwardCache c2;
  net.forward(oracle::random_matrix(rng, net.input_dim(), 1), &c2);
  MlpNet different({net.input_dim(), 2, 1}, Activation::kRelu);
  EXPECT_THROW(different.backward(c2, Eigen::MatrixXd::Ones(1, 1)), Error);
}

class GradientCheck : public ::testing::TestWithParam<Activation> {};

TEST_P(GradientCheck, ParamsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    MlpNet net = oracle::random_net(rng, GetParam(), 2);
    const Eigen::MatrixXd x = oracle::random_matrix(rng, net.input_dim(), 3);
    const Eigen::MatrixXd og = oracle::random_matrix(rng, 2, 3);
    ForwardCache c;
    net.forward(x, &c);
    const Eigen::VectorXd g = net.backward(c, og);
    EXPECT_LT(oracle::relative_error(g, param_grad_fd(net, x, og)), 1e-4) << "seed " << seed;
  }
}

TEST_P(GradientCheck, InputMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 1000);
    MlpNet net = oracle::random_net(rng, GetParam(), 2);
    const Eigen::MatrixXd x = oracle::random_matrix(rng, net.input_dim(), 1);
    const Eigen::MatrixXd og = oracle::random_matrix(rng, 2, 1);
    ForwardCache c;
    net.forward(x, &c);
    Eigen::MatrixXd gin;
    net.backward(c, og, &gin);
    const Eigen::VectorXd fd = oracle::finite_difference(
        [&](const Eigen::VectorXd& xi) {
          return oracle::Probe{net.forward(Eigen::MatrixXd(xi)).cwiseProduct(og).sum(),
                               oracle::activation_pattern(net, Eigen::MatrixXd(xi))};
        },
        x.col(0));
    EXPECT_LT(oracle::relative_error(gin.col(0), fd), 1e-4) << "seed " << seed;
  }
}

TEST_P(GradientCheck, PenaltyDoubleBackwardMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed + 2000);
    MlpNet net = oracle::random_net(rng, GetParam(), 1);
    const Eigen::MatrixXd x = oracle::random_matrix(rng, net.input_dim(), 4);
    const Eigen::VectorXd w = oracle::random_matrix(rng, 4, 1, 1.0, 0.3).col(0);
    ForwardCache c;
    net.forward(x, &c);
    const Eigen::VectorXd g = net.input_gradient_penalty_backward(c, w);
    MlpNet probe = net;
    const Eigen::VectorXd fd = oracle::finite_difference(
        [&](const Eigen::VectorXd& p) {
          probe.mutable_params() = p;
          ForwardCache pc;
          probe.forward(x, &pc);
          const Eigen::MatrixXd gi = probe.input_gradient(pc);
          return oracle::Probe{gi.colwise().squaredNorm().dot(w.transpose()),
                               oracle::activation_pattern(probe, x)};
        },
        net.params());
    EXPECT_LT(oracle::relative_error(g, fd), 1e-4) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Activations, GradientCheck,
                         ::testing::Values(Activation::kRelu, Activation::kElu, Activation::kIdentity),
                         [](const auto& info) { return std::string(activation_name(info.param)); });

TEST(Activation, EluIsC1AtZero) {
  MlpNet net({1, 1}, Activation::kIdentity, Activation::kElu);
  net.weight(0)(0, 0) = 1.0;
  auto f = [&](double v) { return net.forward_one(Eigen::VectorXd::Constant(1, v))(0); };
  const double h = 1e-7;
  const double left = (f(0.0) - f(-h)) / h;
  const double right = (f(h) - f(0.0)) / h;
  EXPECT_NEAR(left, right, 1e-6);
  EXPECT_NEAR(left, 1.0, 1e-6);
}

TEST(Optimizer, SgdStep) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.learning_rate = 0.1;
  OptimizerState st(cfg, 3);
  Eigen::VectorXd p(3), g(3);
  p << 1.0, 2.0, 3.0;
  g << 0.5, -1.0, 2.0;
  const Eigen::VectorXd expect = p - 0.1 * g;
  optimizer_step(st, p, g);
  EXPECT_TRUE(p.isApprox(expect, 1e-15));
}

TEST(Optimizer, WeightDecayScalesParams) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kSgd;
  cfg.learning_rate = 1.0;
  cfg.weight_decay = 0.001;
  OptimizerState st(cfg, 2);
  Eigen::VectorXd p(2);
  p << 4.0, -2.0;
  const Eigen::VectorXd expect = p * (1.0 - 0.001);
  optimizer_step(st, p, Eigen::VectorXd::Zero(2));
  EXPECT_TRUE(p.isApprox(expect, 1e-15));
}

TEST(Optimizer, RmsPropStepConvergesToLearningRate) {
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::kRmsProp;
  cfg.learning_rate = 0.01;
  OptimizerState st(cfg, 2);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2), g(2);
  g << 3.0, -0.02;
  for (int i = 0; i < 3000; ++i) {
    const Eigen::VectorXd before = p;
    optimizer_step(st, p, g);
    if (i == 2999) {
      const Eigen::VectorXd step = (p - before).cwiseAbs();
      // Accumulator fixed point is g^2, so |step| -> lr * |g| / (|g| + eps).
      EXPECT_NEAR(step(0), 0.01 * 3.0 / (3.0 + cfg.eps), 1e-9);
      EXPECT_NEAR(step(1), 0.01 * 0.02 / (0.02 + cfg.eps), 1e-9);
    }
  }
}

TEST(Optimizer, RejectsNonFiniteGradient) {
  OptimizerState st(OptimizerConfig{}, 2);
  Eigen::VectorXd p(2), g(2);
  p << 1.0, 1.0;
  g << 1.0, std::nan("");
  const Eigen::VectorXd before = p;
  try {
    optimizer_step(st, p, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.steps, 0);
}

TEST(Optimizer, ShapeMismatch) {
  OptimizerState st(OptimizerConfig{}, 2);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(optimizer_step(st, p, Eigen::VectorXd::Zero(3)), Error);
}

TEST(Optimizer, AdamFirstStepIsLearningRate) {
  OptimizerConfig cfg;
  cfg.learning_rate = 0.05;
  OptimizerState st(cfg, 1);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
  optimizer_step(st, p, Eigen::VectorXd::Constant(1, 7.0));
  EXPECT_NEAR(p(0), -0.05, 1e-8);
}

TEST(MlpNet, OrthogonalInitGains) {
  std::mt19937_64 rng(11);
  MlpNet net({8, 8, 1}, Activation::kElu);
  net.init_orthogonal(rng, std::sqrt(2.0), 0.01);
  const Eigen::MatrixXd w = net.weight(0);
  EXPECT_TRUE((w * w.transpose()).isApprox(2.0 * Eigen::MatrixXd::Identity(8, 8), 1e-9));
  EXPECT_NEAR(Eigen::MatrixXd(net.weight(1)).norm(), 0.01, 1e-12);
  EXPECT_TRUE(Eigen::VectorXd(net.bias(0)).isZero(0.0));
}
