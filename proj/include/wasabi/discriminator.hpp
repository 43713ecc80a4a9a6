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

#ifndef WASABI_DISCRIMINATOR_HPP_
#define WASABI_DISCRIMINATOR_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wasabi/core.hpp"
#include "wasabi/error.hpp"
#include "wasabi/nn.hpp"

namespace wasabi {

enum class LossKind { kLsgan, kWgan };

inline const char* loss_kind_name(LossKind k) { return k == LossKind::kLsgan ? "lsgan" : "wgan"; }

inline LossKind loss_kind_from_name(const std::string& s) {
  if (s == "lsgan") return LossKind::kLsgan;
  if (s == "wgan" || s == "wasabi") return LossKind::kWgan;
  throw Error(ErrorCode::kInvalidArgument, "unknown loss '" + s + "' (expected lsgan|wgan)");
}

struct DiscriminatorConfig {
  LossKind loss_kind = LossKind::kWgan;
  std::size_t horizon = 2;
  double w_loss = 0.5;  // weight of the Wasserstein term
  double w_gp = 5.0;    // gradient-penalty weight (both losses)
  double weight_decay = 1e-3;
  double learning_rate = 1e-4;
  // RMSProp momentum for WGAN, SGD momentum for LSGAN.
  double momentum = 0.05;
  std::size_t epochs_per_iter = 1;
  std::size_t minibatches = 8;
  bool full_state = false;
  std::vector<std::size_t> hidden{256, 128};
  // Floor on the per-feature std used to whiten discriminator inputs.
  double norm_min_std = 0.5;

  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;

  std::size_t input_dim() const { return frame_dim(full_state) * horizon; }

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(w_loss > 0.0)) v.push_back("disc.w_loss must be > 0");
    if (!(w_gp >= 0.0)) v.push_back("disc.w_gp must be >= 0");
    if (horizon < 1) v.push_back("disc.horizon must be >= 1");
    if (!(learning_rate > 0.0)) v.push_back("disc.learning_rate must be > 0");
    if (!(weight_decay >= 0.0)) v.push_back("disc.weight_decay must be >= 0");
    if (epochs_per_iter < 1) v.push_back("disc.epochs must be >= 1");
    if (minibatches < 1) v.push_back("disc.minibatches must be >= 1");
    if (hidden.empty()) v.push_back("disc.hidden must list at least one layer");
    if (!(norm_min_std > 0.0)) v.push_back("disc.norm_min_std must be > 0");
    return v;
  }
};

// Stacks windows as columns of a (feature_dim * H) x batch matrix.
inline Eigen::MatrixXd windows_to_matrix(std::span<const ObservationWindow> windows) {
  if (windows.empty()) throw Error(ErrorCode::kInvalidArgument, "empty window batch");
  const auto dim = static_cast<Eigen::Index>(windows.front().data.size());
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(windows.size()));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (static_cast<Eigen::Index>(windows[b].data.size()) != dim ||
        windows[b].horizon != windows.front().horizon) {
      throw Error(ErrorCode::kShapeMismatch, "windows in a batch differ in shape");
    }
    m.col(static_cast<Eigen::Index>(b)) =
        Eigen::Map<const Eigen::VectorXd>(windows[b].data.data(), dim);
  }
  return m;
}

struct LossResult {
  double loss = 0.0;
  double adversarial = 0.0;  // loss without the penalty term
  double penalty = 0.0;      // mean squared input-gradient norm on reference samples
  Eigen::VectorXd grads;
};

namespace detail {

inline void check_batches(const MlpNet& d, const Eigen::MatrixXd& ref, const Eigen::MatrixXd& pol) {
  if (ref.cols() == 0 || pol.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "discriminator batches must be non-empty");
  }
  if (ref.rows() != pol.rows() || static_cast<std::size_t>(ref.rows()) != d.input_dim()) {
    throw Error(ErrorCode::kShapeMismatch,
                "discriminator batches do not match the network input (" +
                    std::to_string(ref.rows()) + "/" + std::to_string(pol.rows()) + " vs " +
                    std::to_string(d.input_dim()) + ")");
  }
}

inline void check_horizon(std::span<const ObservationWindow> ref,
                          std::span<const ObservationWindow> pol, std::size_t horizon) {
  for (const auto* batch : {&ref, &pol}) {
    for (const auto& w : *batch) {
      if (w.horizon != horizon) {
        throw Error(ErrorCode::kShapeMismatch, "window horizon " + std::to_string(w.horizon) +
                                                   " differs from configured " +
                                                   std::to_string(horizon));
      }
    }
  }
}

// Adds the gradient-penalty term on the reference batch to `out`.
inline void add_gradient_penalty(const MlpNet& d, const ForwardCache& ref_cache, double w_gp,
                                 LossResult& out) {
  const auto n = ref_cache.post.front().cols();
  Eigen::VectorXd norms2;
  const Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, w_gp / static_cast<double>(n));
  Eigen::VectorXd g = d.input_gradient_penalty_backward(ref_cache, weights, &norms2);
  out.penalty = norms2.mean();
  if (w_gp != 0.0) out.grads += g;
  out.loss = out.adversarial + w_gp * out.penalty;
}

}  // namespace detail

// w_D * (-mean D(ref) + mean D(pol)) + w_GP * mean ||grad_x D(ref)||^2.
// Weight decay is left to the optimizer.
inline LossResult wgan_loss(const MlpNet& d, const Eigen::MatrixXd& ref,
                            const Eigen::MatrixXd& pol, const DiscriminatorConfig& cfg) {
  detail::check_batches(d, ref, pol);
  ForwardCache rc, pc;
  const Eigen::MatrixXd dr = d.forward(ref, &rc);
  const Eigen::MatrixXd dp = d.forward(pol, &pc);
  const double nr = static_cast<double>(ref.cols());
  const double np = static_cast<double>(pol.cols());
  LossResult out;
  out.adversarial = cfg.w_loss * (-dr.mean() + dp.mean());
  out.grads = d.backward(rc, Eigen::MatrixXd::Constant(1, ref.cols(), -cfg.w_loss / nr)) +
              d.backward(pc, Eigen::MatrixXd::Constant(1, pol.cols(), cfg.w_loss / np));
  detail::add_gradient_penalty(d, rc, cfg.w_gp, out);
  return out;
}

// mean (D(ref) - 1)^2 + mean (D(pol) + 1)^2 + w_GP * mean ||grad_x D(ref)||^2.
inline LossResult lsgan_loss(const MlpNet& d, const Eigen::MatrixXd& ref,
                             const Eigen::MatrixXd& pol, const DiscriminatorConfig& cfg) {
  detail::check_batches(d, ref, pol);
  ForwardCache rc, pc;
  const Eigen::MatrixXd dr = d.forward(ref, &rc);
  const Eigen::MatrixXd dp = d.forward(pol, &pc);
  const double nr = static_cast<double>(ref.cols());
  const double np = static_cast<double>(pol.cols());
  const Eigen::ArrayXXd er = dr.array() - 1.0;
  const Eigen::ArrayXXd ep = dp.array() + 1.0;
  LossResult out;
  out.adversarial = er.square().mean() + ep.square().mean();
  out.grads = d.backward(rc, (2.0 / nr) * er.matrix()) + d.backward(pc, (2.0 / np) * ep.matrix());
  detail::add_gradient_penalty(d, rc, cfg.w_gp, out);
  return out;
}

inline LossResult discriminator_loss(const MlpNet& d, const Eigen::MatrixXd& ref,
                                     const Eigen::MatrixXd& pol, const DiscriminatorConfig& cfg) {
  return cfg.loss_kind == LossKind::kWgan ? wgan_loss(d, ref, pol, cfg)
                                          : lsgan_loss(d, ref, pol, cfg);
}

inline LossResult wgan_loss(const MlpNet& d, std::span<const ObservationWindow> ref,
                            std::span<const ObservationWindow> pol, const DiscriminatorConfig& cfg) {
  detail::check_horizon(ref, pol, cfg.horizon);
  return wgan_loss(d, windows_to_matrix(ref), windows_to_matrix(pol), cfg);
}

inline LossResult lsgan_loss(const MlpNet& d, std::span<const ObservationWindow> ref,
                             std::span<const ObservationWindow> pol, const DiscriminatorConfig& cfg) {
  detail::check_horizon(ref, pol, cfg.horizon);
  return lsgan_loss(d, windows_to_matrix(ref), windows_to_matrix(pol), cfg);
}

// ||dD/dx||^2 at one input, computed analytically.
inline double input_gradient_norm2(const MlpNet& d, const Eigen::VectorXd& x) {
  ForwardCache c;
  d.forward(Eigen::MatrixXd(x), &c);
  return d.input_gradient(c).squaredNorm();
}

inline double input_gradient_norm2(const MlpNet& d, const ObservationWindow& w) {
  return input_gradient_norm2(
      d, Eigen::Map<const Eigen::VectorXd>(w.data.data(), static_cast<Eigen::Index>(w.data.size())));
}

inline double raw_score(const MlpNet& d, const ObservationWindow& w) {
  if (w.data.size() != d.input_dim()) {
    throw Error(ErrorCode::kShapeMismatch, "window size " + std::to_string(w.data.size()) +
                                               " vs discriminator input " +
                                               std::to_string(d.input_dim()));
  }
  const Eigen::Map<const Eigen::VectorXd> x(w.data.data(), static_cast<Eigen::Index>(w.data.size()));
  return d.forward(Eigen::MatrixXd(x))(0, 0);
}

// Bounded reward for least-squares discriminators: max(0, 1 - (s - 1)^2 / 4).
inline double lsgan_imitation_reward(double score) {
  const double e = score - 1.0;
  return std::max(0.0, 1.0 - 0.25 * e * e);
}

// Per-feature affine normalization of discriminator inputs. Statistics come
// from the reference frames and are tiled over the H frames of a window.
struct FeatureNormalizer {
  Eigen::VectorXd mean;  // per frame feature
  Eigen::VectorXd inv_std;

  static FeatureNormalizer identity(std::size_t frame_dim) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(frame_dim)),
            Eigen::VectorXd::Ones(static_cast<Eigen::Index>(frame_dim))};
  }

  static FeatureNormalizer from_dataset(const ReferenceDataset& ds, bool full_state,
                                        double min_std = 1e-2) {
    const std::size_t fd = frame_dim(full_state);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fd));
    Eigen::VectorXd sq = sum;
    std::size_t n = 0;
    std::vector<double> f;
    for (std::size_t t = 0; t < ds.trajectories.size(); ++t) {
      for (std::size_t i = 0; i < ds.trajectories[t].size(); ++i) {
        f.clear();
        ds.append_frame(t, i, full_state, f);
        const Eigen::Map<const Eigen::VectorXd> v(f.data(), static_cast<Eigen::Index>(fd));
        sum += v;
        sq += v.cwiseAbs2();
        ++n;
      }
    }
    if (n == 0) throw Error(ErrorCode::kNoTrajectories, "normalizer needs data");
    FeatureNormalizer out;
    out.mean = sum / static_cast<double>(n);
    const Eigen::VectorXd var = (sq / static_cast<double>(n) - out.mean.cwiseAbs2()).cwiseMax(0.0);
    out.inv_std = var.cwiseSqrt().cwiseMax(min_std).cwiseInverse();
    return out;
  }

  void apply(Eigen::MatrixXd& x) const {
    const Eigen::Index fd = mean.size();
    if (fd == 0 || x.rows() % fd != 0) {
      throw Error(ErrorCode::kShapeMismatch, "normalizer frame size does not divide input");
    }
    for (Eigen::Index h = 0; h < x.rows() / fd; ++h) {
      auto block = x.middleRows(h * fd, fd);
      block.colwise() -= mean;
      block = inv_std.asDiagonal() * block;
    }
  }
};

// Discriminator network together with its input normalization.
struct Discriminator {
  DiscriminatorConfig config;
  FeatureNormalizer normalizer;
  MlpNet net;

  Discriminator() = default;
  Discriminator(const DiscriminatorConfig& cfg, FeatureNormalizer norm, std::mt19937_64& rng)
      : config(cfg), normalizer(std::move(norm)) {
    std::vector<std::size_t> sizes{cfg.input_dim()};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(1);
    net = MlpNet(sizes, Activation::kRelu);
    net.init_orthogonal(rng, std::sqrt(2.0), 1.0);
  }

  Eigen::MatrixXd prepare(Eigen::MatrixXd raw) const {
    normalizer.apply(raw);
    return raw;
  }

  // Scores for raw (unnormalized) windows stored column-wise.
  Eigen::VectorXd scores(const Eigen::MatrixXd& raw) const {
    return net.forward(prepare(raw)).row(0).transpose();
  }

  double score(const ObservationWindow& w) const {
    return scores(windows_to_matrix(std::span<const ObservationWindow>(&w, 1)))(0);
  }

  LossResult loss(const Eigen::MatrixXd& raw_ref, const Eigen::MatrixXd& raw_pol) const {
    return discriminator_loss(net, prepare(raw_ref), prepare(raw_pol), config);
  }
};

}  // namespace wasabi

#endif  // WASABI_DISCRIMINATOR_HPP_
