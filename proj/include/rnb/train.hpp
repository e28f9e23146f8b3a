// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Float-path training with tied weights. Every use of a shared basic layer
// backpropagates through its own transform and the gradients are summed
// into the single stored parameter.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "rnb/conv.hpp"
#include "rnb/dataset.hpp"
#include "rnb/error.hpp"
#include "rnb/forward.hpp"
#include "rnb/network.hpp"
#include "rnb/numerics.hpp"
#include "rnb/obu.hpp"
#include "rnb/weights_io.hpp"

namespace rnb {

using Gradients = std::map<std::string, Tensor>;

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; norm layers start at
/// their declared scale and offset. One parameter set per basic layer.
inline WeightStore init_weights(const NetworkDesc& net, std::uint64_t seed) {
  WeightStore store;
  SplitMix64 rng(seed);
  std::set<std::string> done;
  for (const ResolvedLayer& rl : resolve_network(net)) {
    if (!rl.desc->parametric() || !done.insert(rl.param_name).second) continue;
    const LayerDesc& owner = net.layer(rl.param_name);
    if (owner.kind == LayerKind::norm) {
      store.set(owner.scale_key(), Tensor::filled({owner.channels}, owner.scale));
      store.set(owner.offset_key(), Tensor::filled({owner.channels}, owner.offset));
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(owner.matrix_dims().second));
    std::vector<double> v(owner.parameter_count());
    for (double& e : v) e = bound * (2.0 * rng.uniform() - 1.0);
    store.set(owner.weight_key(), Tensor(owner.weight_shape(), std::move(v)));
  }
  return store;
}

inline void accumulate(Gradients& grads, const std::string& key, const Shape& shape,
                       const std::vector<double>& delta) {
  auto it = grads.find(key);
  if (it == grads.end()) {
    grads.emplace(key, Tensor(shape, delta));
    return;
  }
  auto dst = it->second.mutable_values();
  for (std::size_t i = 0; i < delta.size(); ++i) dst[i] += delta[i];
}

/// Gradients of all stored parameters given dL/d(output). `grad_input`
/// receives dL/dx when non-null.
inline Gradients backward(const NetworkDesc& net, const WeightStore& weights, const ForwardCache& cache,
                          const Tensor& grad_out, Tensor* grad_input = nullptr) {
  const auto layers = resolve_network(net);
  if (cache.inputs.size() != layers.size()) {
    throw Error(ErrorCode::training, "forward cache does not match the network");
  }
  Gradients grads;
  std::vector<double> g(grad_out.values().begin(), grad_out.values().end());
  for (std::size_t li = layers.size(); li-- > 0;) {
    const ResolvedLayer& rl = layers[li];
    const LayerDesc& owner = net.layer(rl.param_name);
    const Tensor& x = cache.inputs[li];
    std::vector<double> dx(x.size(), 0.0);
    switch (rl.desc->kind) {
      case LayerKind::dense: {
        const Tensor w = layer_matrix(owner, weights);  // [R, C]
        const std::size_t R = w.rows(), C = w.cols();
        std::vector<double> dw(R * C, 0.0);
        if (!rl.weight_transposed) {
          for (std::size_t o = 0; o < R; ++o)
            for (std::size_t j = 0; j < C; ++j) {
              dw[o * C + j] = g[o] * x[j];
              dx[j] += w(o, j) * g[o];
            }
        } else {  // y = W^T x, x has R entries, y has C
          for (std::size_t j = 0; j < R; ++j)
            for (std::size_t o = 0; o < C; ++o) {
              dw[j * C + o] = g[o] * x[j];
              dx[j] += w(j, o) * g[o];
            }
        }
        accumulate(grads, owner.weight_key(), owner.weight_shape(), dw);
        break;
      }
      case LayerKind::conv2d: {
        const LoweredConv lc = lower_conv_im2col(*rl.desc, x, layer_matrix(owner, weights));
        const std::size_t co = lc.weights.rows(), kr = lc.weights.cols(), p = lc.patches.cols();
        std::vector<double> dw(co * kr, 0.0);
        std::vector<double> dpatch(kr * p, 0.0);
        for (std::size_t o = 0; o < co; ++o)
          for (std::size_t r = 0; r < kr; ++r) {
            double acc = 0.0;
            const double wv = lc.weights(o, r);
            for (std::size_t c = 0; c < p; ++c) {
              acc += g[o * p + c] * lc.patches(r, c);
              dpatch[r * p + c] += wv * g[o * p + c];
            }
            dw[o * kr + r] = acc;
          }
        accumulate(grads, owner.weight_key(), owner.weight_shape(), dw);
        const Tensor back = col2im(Tensor({kr, p}, std::move(dpatch)), lc.geometry);
        dx.assign(back.values().begin(), back.values().end());
        break;
      }
      case LayerKind::relu:
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
        break;
      case LayerKind::norm: {
        const auto [s, o] = norm_params(owner, weights);
        const std::size_t c = s.size(), inner = x.size() / c;
        std::vector<double> ds(c, 0.0), doff(c, 0.0);
        for (std::size_t k = 0; k < c; ++k)
          for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t at = k * inner + i;
            ds[k] += g[at] * x[at];
            doff[k] += g[at];
            dx[at] = s[k] * g[at];
          }
        accumulate(grads, owner.scale_key(), {c}, ds);
        accumulate(grads, owner.offset_key(), {c}, doff);
        break;
      }
    }
    Tensor dxt(x.shape(), std::move(dx));
    if (rl.pre_transform) dxt = apply_activation_adjoint(*rl.pre_transform, dxt);
    g.assign(dxt.values().begin(), dxt.values().end());
  }
  if (grad_input) *grad_input = Tensor(net.input_shape, g);
  return grads;
}

struct LossValue {
  double loss = 0.0;
  Tensor grad;
};

/// mean((y - t)^2)
inline LossValue mse_loss(const Tensor& y, const Tensor& target) {
  if (y.size() != target.size()) throw Error(ErrorCode::dimension, "mse target size mismatch");
  const double n = static_cast<double>(y.size());
  LossValue out{0.0, Tensor::zeros(y.shape())};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    out.loss += d * d / n;
    out.grad[i] = 2.0 * d / n;
  }
  return out;
}

inline LossValue softmax_cross_entropy(const Tensor& logits, std::size_t label) {
  if (label >= logits.size()) {
    throw Error(ErrorCode::invalid_input, "label " + std::to_string(label) + " out of range for " +
                                              std::to_string(logits.size()) + " outputs");
  }
  const auto v = logits.values();
  const double m = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double e : v) z += std::exp(e - m);
  LossValue out{std::log(z) + m - logits[label], Tensor::zeros(logits.shape())};
  for (std::size_t i = 0; i < logits.size(); ++i) out.grad[i] = std::exp(v[i] - m) / z;
  out.grad[label] -= 1.0;
  return out;
}

inline std::size_t argmax(const Tensor& t) {
  const auto v = t.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct TrainConfig {
  double lr = 0.001;
  double weight_decay = 0.01;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double min_lr = 0.0;
  bool cosine = true;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lr > 0.0)) throw Error(ErrorCode::invalid_input, "learning rate must be > 0");
    if (batch_size == 0) throw Error(ErrorCode::invalid_input, "batch size must be >= 1");
    if (weight_decay < 0.0) throw Error(ErrorCode::invalid_input, "weight decay must be >= 0");
  }

  double lr_at(std::size_t epoch) const {
    if (!cosine || epochs == 0) return lr;
    return min_lr + 0.5 * (lr - min_lr) *
                        (1.0 + std::cos(M_PI * static_cast<double>(epoch) / static_cast<double>(epochs)));
  }
};

/// Adam with L2 weight decay added to the gradient.
class Adam {
 public:
  explicit Adam(const TrainConfig& cfg) : cfg_(cfg) {}

  void step(WeightStore& weights, const Gradients& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (const auto& [name, grad] : grads) {
      Tensor w = weights.tensor(name);
      auto& m = m_[name];
      auto& v = v_[name];
      if (m.empty()) {
        m.assign(w.size(), 0.0);
        v.assign(w.size(), 0.0);
      }
      auto wv = w.mutable_values();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = grad[i] + cfg_.weight_decay * wv[i];
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gi;
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gi * gi;
        wv[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
      }
      weights.set(name, std::move(w));
    }
  }

 private:
  TrainConfig cfg_;
  std::uint64_t t_ = 0;
  std::map<std::string, std::vector<double>> m_, v_;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  WeightStore weights;
  std::vector<EpochMetrics> history;
};

inline double evaluate(const Dataset& data, const std::function<Tensor(const Tensor&)>& model) {
  data.validate();
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) correct += argmax(model(data.inputs[i])) == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

inline double evaluate(const NetworkDesc& net, const WeightStore& weights, const Dataset& data) {
  return evaluate(data, [&](const Tensor& x) { return forward_float(net, weights, x); });
}

inline double evaluate(PhotonicEngine& engine, const Dataset& data) {
  return evaluate(data, [&](const Tensor& x) { return engine.forward(x); });
}

/// Mini-batch softmax cross-entropy training on the float engine.
inline TrainResult toy_train(const NetworkDesc& net, const Dataset& data, const TrainConfig& cfg,
                             std::optional<WeightStore> initial = std::nullopt) {
  cfg.validate();
  data.validate();
  if (data.size() == 0) throw Error(ErrorCode::invalid_input, "training set is empty");
  TrainResult result;
  result.weights = initial ? std::move(*initial) : init_weights(net, cfg.seed);
  Adam opt(cfg);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.lr_at(epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double epoch_loss = 0.0;
    std::size_t correct = 0;
    try {
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        const double inv = 1.0 / static_cast<double>(end - start);
        Gradients batch;
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t idx = order[k];
          ForwardCache cache;
          const Tensor y = forward_float(net, result.weights, data.inputs[idx], &cache);
          const LossValue l = softmax_cross_entropy(y, data.labels[idx]);
          if (!std::isfinite(l.loss)) throw Error(ErrorCode::invalid_input, "non-finite loss");
          epoch_loss += l.loss;
          correct += argmax(y) == data.labels[idx];
          for (const auto& [name, gt] : backward(net, result.weights, cache, l.grad)) {
            std::vector<double> scaled(gt.values().begin(), gt.values().end());
            for (double& e : scaled) e *= inv;
            accumulate(batch, name, gt.shape(), scaled);
          }
        }
        opt.step(result.weights, batch, lr);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invalid_input) throw;
      throw Error(ErrorCode::training, "training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::training, "training diverged at epoch " + std::to_string(epoch) + ": loss is NaN");
    }
    result.history.push_back({epoch, epoch_loss, static_cast<double>(correct) / data.size(), lr});
  }
  return result;
}

}  // namespace rnb
