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

#ifndef WASABI_NN_HPP_
#define WASABI_NN_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wasabi/error.hpp"

namespace wasabi {

enum class Activation { kIdentity, kRelu, kElu };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kElu: return "elu";
  }
  return "identity";
}

inline Activation activation_from_name(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "relu") return Activation::kRelu;
  if (s == "elu") return Activation::kElu;
  throw Error(ErrorCode::kInvalidArgument, "unknown activation '" + s + "'");
}

namespace detail {

inline void apply_activation(Activation a, Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kIdentity: break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kElu:
      z = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
      break;
  }
}

inline Eigen::MatrixXd activation_d1(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kIdentity: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::kRelu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::kElu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
  }
  return {};
}

// Second derivative; zero almost everywhere for identity and ReLU.
inline Eigen::MatrixXd activation_d2(Activation a, const Eigen::MatrixXd& z) {
  if (a == Activation::kElu) {
    return z.unaryExpr([](double v) { return v > 0.0 ? 0.0 : std::exp(v); });
  }
  return Eigen::MatrixXd::Zero(z.rows(), z.cols());
}

}  // namespace detail

// Pre- and post-activations of one batched forward pass. Columns are samples.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // z_1 .. z_L
  std::vector<Eigen::MatrixXd> post;  // h_0 (input) .. h_L (output)
  std::uint64_t version = 0;
  const void* owner = nullptr;
};

// Fully connected network with a flat parameter vector. Layer l stores its
// weight (n_out x n_in, column-major) followed by its bias.
class MlpNet {
 public:
  MlpNet() = default;

  MlpNet(std::vector<std::size_t> layer_sizes, Activation hidden,
         Activation output = Activation::kIdentity)
      : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 layer sizes");
    for (auto s : sizes_) {
      if (s == 0) throw Error(ErrorCode::kInvalidArgument, "layer size 0");
    }
    activations_.assign(sizes_.size() - 1, hidden);
    activations_.back() = output;
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(n);
      n += (sizes_[l] + 1) * sizes_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  }

  MlpNet(std::vector<std::size_t> layer_sizes, std::vector<Activation> activations,
         Eigen::VectorXd params)
      : MlpNet(layer_sizes, Activation::kIdentity) {
    if (activations.size() + 1 != sizes_.size() || params.size() != params_.size()) {
      throw Error(ErrorCode::kShapeMismatch, "network restore: inconsistent shapes");
    }
    activations_ = std::move(activations);
    params_ = std::move(params);
  }

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  std::size_t num_layers() const { return sizes_.size() - 1; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  std::uint64_t version() const { return version_; }

  const Eigen::VectorXd& params() const { return params_; }
  // Any write through this reference invalidates outstanding caches.
  Eigen::VectorXd& mutable_params() {
    ++version_;
    return params_;
  }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t l) const {
    return {params_.data() + offsets_[l], rows(l), cols(l)};
  }
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t l) {
    ++version_;
    return {params_.data() + offsets_[l], rows(l), cols(l)};
  }
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + rows(l) * cols(l), rows(l)};
  }
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l) {
    ++version_;
    return {params_.data() + offsets_[l] + rows(l) * cols(l), rows(l)};
  }

  // Orthogonal initialization: hidden layers scaled by `hidden_gain`, the
  // output layer by `output_gain`; biases zero.
  void init_orthogonal(std::mt19937_64& rng, double hidden_gain, double output_gain) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const Eigen::Index r = rows(l), c = cols(l);
      const Eigen::Index n = std::max(r, c);
      Eigen::MatrixXd a(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) a(i, j) = normal(rng);
      }
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
      Eigen::MatrixXd q = qr.householderQ();
      // Sign fix makes the draw uniform over the orthogonal group.
      const Eigen::MatrixXd rr = qr.matrixQR().triangularView<Eigen::Upper>();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (rr(j, j) < 0.0) q.col(j) *= -1.0;
      }
      const double gain = (l + 1 == num_layers()) ? output_gain : hidden_gain;
      weight(l) = gain * q.topLeftCorner(r, c);
      bias(l).setZero();
    }
  }

  // Batched forward; `input` is input_dim x batch.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, ForwardCache* cache = nullptr) const {
    if (static_cast<std::size_t>(input.rows()) != input_dim()) {
      throw Error(ErrorCode::kShapeMismatch, "forward: input has " + std::to_string(input.rows()) +
                                                 " rows, network expects " +
                                                 std::to_string(input_dim()));
    }
    if (cache) {
      cache->pre.clear();
      cache->post.clear();
      cache->post.push_back(input);
      cache->version = version_;
      cache->owner = this;
    }
    Eigen::MatrixXd h = input;
    for (std::size_t l = 0; l < num_layers(); ++l) {
      Eigen::MatrixXd z = weight(l) * h;
      z.colwise() += bias(l);
      if (cache) cache->pre.push_back(z);
      detail::apply_activation(activations_[l], z);
      h = std::move(z);
      if (cache) cache->post.push_back(h);
    }
    return h;
  }

  Eigen::VectorXd forward_one(const Eigen::VectorXd& input) const {
    return forward(Eigen::MatrixXd(input)).col(0);
  }

  // Reverse-mode gradient of sum(output .* output_grad) with respect to the
  // flat parameters. Optionally returns the input gradient.
  Eigen::VectorXd backward(const ForwardCache& cache, const Eigen::MatrixXd& output_grad,
                           Eigen::MatrixXd* input_grad = nullptr) const {
    check_cache(cache);
    if (output_grad.rows() != static_cast<Eigen::Index>(output_dim()) ||
        output_grad.cols() != cache.post.front().cols()) {
      throw Error(ErrorCode::kShapeMismatch, "backward: output gradient shape");
    }
    Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
    Eigen::MatrixXd delta = output_grad.cwiseProduct(
        detail::activation_d1(activations_.back(), cache.pre.back()));
    for (std::size_t l = num_layers(); l-- > 0;) {
      grad_weight(grads, l) += delta * cache.post[l].transpose();
      grad_bias(grads, l) += delta.rowwise().sum();
      if (l > 0 || input_grad) {
        Eigen::MatrixXd up = weight(l).transpose() * delta;
        if (l == 0) {
          *input_grad = std::move(up);
        } else {
          delta = up.cwiseProduct(detail::activation_d1(activations_[l - 1], cache.pre[l - 1]));
        }
      }
    }
    return grads;
  }

  // d output / d input for a scalar-output net, input_dim x batch.
  Eigen::MatrixXd input_gradient(const ForwardCache& cache) const {
    check_scalar();
    Eigen::MatrixXd g;
    backward_deltas(cache, nullptr, nullptr, &g);
    return g;
  }

  // Gradient of sum_b weights_b * ||d output / d input (sample b)||^2 with
  // respect to the parameters (double backward). Returns the flat gradient
  // and, optionally, the per-sample squared norms.
  //
  // With deltas d_l = f'(z_l) .* u_l, u_l = W_{l+1}^T d_{l+1} and
  // g = W_1^T d_1, the adjoints propagate up through the delta chain:
  //   dW_1 += d_1 gbar^T,            dbar_1 = W_1 gbar
  //   ubar_l = f'(z_l) .* dbar_l,    zbar_l = f''(z_l) .* u_l .* dbar_l
  //   dW_{l+1} += d_{l+1} ubar_l^T,  dbar_{l+1} = W_{l+1} ubar_l
  // and the zbar_l terms then run back down the forward graph as in an
  // ordinary backward pass. For ReLU f'' = 0, so only the cross terms
  // dW += d ubar^T survive.
  Eigen::VectorXd input_gradient_penalty_backward(const ForwardCache& cache,
                                                  const Eigen::VectorXd& sample_weights,
                                                  Eigen::VectorXd* norms2 = nullptr) const {
    check_scalar();
    const std::size_t nl = num_layers();
    std::vector<Eigen::MatrixXd> deltas, ups;
    Eigen::MatrixXd g;
    backward_deltas(cache, &deltas, &ups, &g);
    const Eigen::Index batch = g.cols();
    if (sample_weights.size() != batch) {
      throw Error(ErrorCode::kShapeMismatch, "penalty weights length");
    }
    if (norms2) *norms2 = g.colwise().squaredNorm().transpose();

    Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
    const Eigen::MatrixXd gbar = 2.0 * g * sample_weights.asDiagonal();
    grad_weight(grads, 0) += deltas[0] * gbar.transpose();
    Eigen::MatrixXd dbar = weight(0) * gbar;
    std::vector<Eigen::MatrixXd> zbar(nl);
    for (std::size_t l = 0; l + 1 < nl; ++l) {
      const Eigen::MatrixXd ubar =
          detail::activation_d1(activations_[l], cache.pre[l]).cwiseProduct(dbar);
      zbar[l] = detail::activation_d2(activations_[l], cache.pre[l])
                    .cwiseProduct(ups[l])
                    .cwiseProduct(dbar);
      grad_weight(grads, l + 1) += deltas[l + 1] * ubar.transpose();
      if (l + 2 < nl) dbar = weight(l + 1) * ubar;
    }
    // Forward-graph pass for the f'' injections (output layer has none).
    Eigen::MatrixXd hbar;
    for (std::size_t l = nl - 1; l-- > 0;) {
      Eigen::MatrixXd zt = zbar[l];
      if (hbar.size() > 0) {
        zt += detail::activation_d1(activations_[l], cache.pre[l]).cwiseProduct(hbar);
      }
      if (zt.isZero(0.0)) {
        hbar = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sizes_[l]), batch);
        continue;
      }
      grad_weight(grads, l) += zt * cache.post[l].transpose();
      grad_bias(grads, l) += zt.rowwise().sum();
      hbar = weight(l).transpose() * zt;
    }
    return grads;
  }

 private:
  Eigen::Index rows(std::size_t l) const { return static_cast<Eigen::Index>(sizes_[l + 1]); }
  Eigen::Index cols(std::size_t l) const { return static_cast<Eigen::Index>(sizes_[l]); }

  Eigen::Map<Eigen::MatrixXd> grad_weight(Eigen::VectorXd& g, std::size_t l) const {
    return {g.data() + offsets_[l], rows(l), cols(l)};
  }
  Eigen::Map<Eigen::VectorXd> grad_bias(Eigen::VectorXd& g, std::size_t l) const {
    return {g.data() + offsets_[l] + rows(l) * cols(l), rows(l)};
  }

  void check_cache(const ForwardCache& cache) const {
    if (cache.owner != this || cache.version != version_ ||
        cache.pre.size() != num_layers()) {
      throw Error(ErrorCode::kStaleCache, "cache does not come from the current parameters");
    }
  }

  void check_scalar() const {
    if (output_dim() != 1 || activations_.back() != Activation::kIdentity) {
      throw Error(ErrorCode::kInvalidArgument,
                  "input gradients need a scalar network with linear output");
    }
  }

  // Backward pass with unit output gradient, keeping d_l and u_l.
  void backward_deltas(const ForwardCache& cache, std::vector<Eigen::MatrixXd>* deltas,
                       std::vector<Eigen::MatrixXd>* ups, Eigen::MatrixXd* input_grad) const {
    check_cache(cache);
    const std::size_t nl = num_layers();
    const Eigen::Index batch = cache.post.front().cols();
    if (deltas) deltas->assign(nl, {});
    if (ups) ups->assign(nl, {});
    Eigen::MatrixXd delta = Eigen::MatrixXd::Ones(1, batch);
    for (std::size_t l = nl; l-- > 0;) {
      Eigen::MatrixXd up = weight(l).transpose() * delta;
      if (deltas) (*deltas)[l] = delta;
      if (l == 0) {
        *input_grad = std::move(up);
        break;
      }
      if (ups) (*ups)[l - 1] = up;
      delta = up.cwiseProduct(detail::activation_d1(activations_[l - 1], cache.pre[l - 1]));
    }
  }

  std::vector<std::size_t> sizes_;
  std::vector<Activation> activations_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd params_;
  std::uint64_t version_ = 0;
};

// ---------------------------------------------------------------------------
// Optimizers
// ---------------------------------------------------------------------------

enum class OptimizerKind { kSgd, kRmsProp, kAdam };

inline const char* optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kRmsProp: return "rmsprop";
    case OptimizerKind::kAdam: return "adam";
  }
  return "sgd";
}

inline OptimizerKind optimizer_from_name(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "rmsprop") return OptimizerKind::kRmsProp;
  if (s == "adam") return OptimizerKind::kAdam;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer '" + s + "'");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  // Added to the gradient as weight_decay * params (L2 regularization).
  double weight_decay = 0.0;
  // Heavy-ball momentum for SGD and RMSProp.
  double momentum = 0.0;
  double rms_decay = 0.99;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  OptimizerConfig config;
  Eigen::VectorXd first;   // Adam first moment / momentum buffer
  Eigen::VectorXd second;  // squared-gradient accumulator
  std::int64_t steps = 0;

  OptimizerState() = default;
  OptimizerState(OptimizerConfig cfg, std::size_t n)
      : config(cfg),
        first(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
        second(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}
};

// Applies one update in place. Throws (leaving params untouched) on
// non-finite gradients or mismatched shapes.
inline void optimizer_step(OptimizerState& state, Eigen::Ref<Eigen::VectorXd> params,
                           const Eigen::Ref<const Eigen::VectorXd>& grads) {
  if (params.size() != grads.size() || state.first.size() != params.size() ||
      state.second.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer_step: parameter/gradient/state sizes");
  }
  if (!grads.allFinite()) throw Error(ErrorCode::kNonFinite, "optimizer_step: gradient");
  const auto& c = state.config;
  Eigen::VectorXd g = grads;
  if (c.weight_decay != 0.0) g += c.weight_decay * params;
  ++state.steps;
  switch (c.kind) {
    case OptimizerKind::kSgd:
      if (c.momentum != 0.0) {
        state.first = c.momentum * state.first + g;
        params -= c.learning_rate * state.first;
      } else {
        params -= c.learning_rate * g;
      }
      break;
    case OptimizerKind::kRmsProp: {
      state.second = c.rms_decay * state.second + (1.0 - c.rms_decay) * g.cwiseAbs2();
      const Eigen::VectorXd scaled =
          g.cwiseQuotient((state.second.cwiseSqrt().array() + c.eps).matrix());
      if (c.momentum != 0.0) {
        state.first = c.momentum * state.first + scaled;
        params -= c.learning_rate * state.first;
      } else {
        params -= c.learning_rate * scaled;
      }
      break;
    }
    case OptimizerKind::kAdam: {
      state.first = c.beta1 * state.first + (1.0 - c.beta1) * g;
      state.second = c.beta2 * state.second + (1.0 - c.beta2) * g.cwiseAbs2();
      const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.steps));
      const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.steps));
      const Eigen::VectorXd denom = ((state.second / bc2).cwiseSqrt().array() + c.eps).matrix();
      params -= c.learning_rate * (state.first / bc1).cwiseQuotient(denom);
      break;
    }
  }
}

inline void optimizer_step(OptimizerState& state, MlpNet& net, const Eigen::VectorXd& grads) {
  optimizer_step(state, net.mutable_params(), grads);
}

}  // namespace wasabi

#endif  // WASABI_NN_HPP_
