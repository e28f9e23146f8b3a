// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Network inference on two engines.
 *
 * forward_float is the double-precision reference. PhotonicEngine programs
 * the tile-mapped matrices into a Session and evaluates every optical layer
 * through tile_mvm and the offset row; ReLU, norm and blend-unit shuffles
 * stay electrical.
 *
 * Photonic layer evaluation, for an input activation a and matrix W:
 *   1. s_x = max|a|, a_n = Q8(a / s_x) in [-1, 1]
 *   2. signed inputs run twice, on max(a_n, 0) and max(-a_n, 0)
 *   3. per tile: 2 (ADC(W' a) - ADC(W_o a)), accumulated over column tiles
 *   4. y = s_w s_x (y_pos - y_neg)
 * The readout error per layer is bounded by the quantization step
 * q = s_w s_x L P / 127 with L the padded input length and P the pass count:
 * weight and input rounding contribute at most q/2 each and the two ADC
 * readouts per tile at most q in total.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rnb/conv.hpp"
#include "rnb/cost_model.hpp"
#include "rnb/error.hpp"
#include "rnb/network.hpp"
#include "rnb/numerics.hpp"
#include "rnb/obu.hpp"
#include "rnb/params.hpp"
#include "rnb/photonic_tile.hpp"
#include "rnb/prm_scheduler.hpp"
#include "rnb/weights_io.hpp"

namespace rnb {

/// Per-channel affine of a norm layer; trained values live in the store,
/// the declared scale/offset are the fallback.
inline std::pair<Tensor, Tensor> norm_params(const LayerDesc& owner, const WeightStore& weights) {
  Tensor s = weights.contains(owner.scale_key()) ? weights.tensor(owner.scale_key())
                                                 : Tensor::filled({owner.channels}, owner.scale);
  Tensor o = weights.contains(owner.offset_key()) ? weights.tensor(owner.offset_key())
                                                  : Tensor::filled({owner.channels}, owner.offset);
  if (s.size() != owner.channels || o.size() != owner.channels) {
    throw Error(ErrorCode::mapping, "norm '" + owner.name + "' parameters need " +
                                        std::to_string(owner.channels) + " channels");
  }
  return {std::move(s), std::move(o)};
}

inline Tensor apply_norm(const Tensor& x, const Tensor& scale, const Tensor& offset) {
  const std::size_t c = scale.size();
  const std::size_t inner = x.size() / c;
  Tensor y = x;
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < inner; ++i) y[k * inner + i] = scale[k] * x[k * inner + i] + offset[k];
  return y;
}

inline Tensor apply_relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.mutable_values()) v = std::max(v, 0.0);
  return y;
}

/// Intermediate values of one float forward pass, kept for backprop.
struct ForwardCache {
  std::vector<Tensor> inputs;   // layer input after its pre-transform
  std::vector<Tensor> outputs;  // layer output
};

inline Tensor forward_float(const NetworkDesc& net, const WeightStore& weights, const Tensor& x,
                            ForwardCache* cache = nullptr) {
  const auto layers = resolve_network(net);
  if (x.shape() != net.input_shape && x.size() != numel(net.input_shape)) {
    throw Error(ErrorCode::dimension, "input " + shape_str(x.shape()) + " does not match network input " +
                                          shape_str(net.input_shape));
  }
  Tensor a = x.reshaped(net.input_shape);
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  for (const ResolvedLayer& rl : layers) {
    if (rl.pre_transform) a = apply_activation_transform(*rl.pre_transform, a);
    if (cache) cache->inputs.push_back(a);
    const LayerDesc& owner = net.layer(rl.param_name);
    switch (rl.desc->kind) {
      case LayerKind::dense: {
        Tensor w = layer_matrix(owner, weights);
        if (rl.weight_transposed) w = transpose2d(w);
        a = matvec_reference(w, a.flattened());
        break;
      }
      case LayerKind::conv2d: {
        const LoweredConv lc = lower_conv_im2col(*rl.desc, a, layer_matrix(owner, weights));
        a = matmul_reference(lc.weights, lc.patches).reshaped(rl.out_shape);
        break;
      }
      case LayerKind::relu:
        a = apply_relu(a);
        break;
      case LayerKind::norm: {
        const auto [s, o] = norm_params(owner, weights);
        a = apply_norm(a, s, o);
        break;
      }
    }
    if (cache) cache->outputs.push_back(a);
  }
  return a;
}

/// One optical layer as seen by the photonic engine.
struct LayerProbe {
  std::string layer;
  std::string matrix_key;
  bool transposed = false;
  double step = 0.0;       // quantization step q of this layer
  double deviation = 0.0;  // max |photonic - float| on the same input
  double weight_scale = 0.0;
  double input_scale = 0.0;
  double out_norm_inf = 0.0;  // infinity norm of the effective float matrix
};

struct PhotonicOptions {
  TileConfig tile;
  SessionOptions session;
  bool share = true;
  int adc_bits = 8;
  int activation_bits = 8;
};

class PhotonicEngine {
 public:
  PhotonicEngine(NetworkDesc net, WeightStore weights, CalibrationCurve curve, ComponentParams params,
                 PhotonicOptions opts = {})
      : net_(std::move(net)),
        weights_(std::move(weights)),
        curve_(std::move(curve)),
        params_(params),
        opts_(opts),
        session_(opts.tile, opts.session) {
    params_.validate();
    layers_ = resolve_network(net_, opts_.share);
    plans_ = build_plans(net_, weights_, opts_.tile, opts_.share);
  }

  /// Programs the session; later calls only rewrite cells that changed.
  const WriteTrace& program() {
    auto groups = build_schedule(net_);
    if (!opts_.share) groups = unshared_schedule(net_, groups);
    trace_ = session_.execute(groups, plans_, curve_, params_);
    programmed_ = true;
    return trace_;
  }

  Tensor forward(const Tensor& x, std::vector<LayerProbe>* probes = nullptr) {
    if (!programmed_) {
      throw Error(ErrorCode::session, "photonic engine used before its session was programmed");
    }
    if (x.size() != numel(net_.input_shape)) {
      throw Error(ErrorCode::dimension, "input " + shape_str(x.shape()) + " does not match network input " +
                                            shape_str(net_.input_shape));
    }
    Tensor a = x.reshaped(net_.input_shape);
    workload_.memory_bytes += a.size();
    for (const ResolvedLayer& rl : layers_) {
      if (rl.pre_transform) {
        a = apply_activation_transform(*rl.pre_transform, a);
        ++workload_.shuffles;
        workload_.shuffled_elements += a.size();
      }
      const LayerDesc& owner = net_.layer(rl.param_name);
      switch (rl.desc->kind) {
        case LayerKind::dense: {
          LayerProbe probe;
          a = optical_matvec(rl, a.flattened(), probe);
          if (probes) probes->push_back(probe);
          break;
        }
        case LayerKind::conv2d: {
          const LoweredConv lc = lower_conv_im2col(*rl.desc, a, layer_matrix(owner, weights_));
          LayerProbe probe;
          a = optical_matmul(rl, lc.patches, probe).reshaped(rl.out_shape);
          if (probes) probes->push_back(probe);
          break;
        }
        case LayerKind::relu:
          a = apply_relu(a);
          break;
        case LayerKind::norm: {
          const auto [s, o] = norm_params(owner, weights_);
          a = apply_norm(a, s, o);
          break;
        }
      }
      workload_.memory_bytes += a.size();
    }
    return a;
  }

  const WriteTrace& trace() const { return trace_; }
  const Workload& workload() const { return workload_; }
  void reset_workload() { workload_ = {}; }
  const Session& session() const { return session_; }
  Session& session() { return session_; }
  const std::map<std::string, MappingPlan>& plans() const { return plans_; }
  const NetworkDesc& net() const { return net_; }
  const WeightStore& weights() const { return weights_; }
  bool programmed() const { return programmed_; }

 private:
  /// Effective float matrix of a resolved optical layer (transposed view applied).
  Tensor effective_matrix(const ResolvedLayer& rl) const {
    Tensor w = layer_matrix(net_.layer(rl.param_name), weights_);
    return rl.weight_transposed ? transpose2d(w) : w;
  }

  Tensor optical_matvec(const ResolvedLayer& rl, const Tensor& x, LayerProbe& probe) {
    Tensor cols = x.reshaped({x.size(), 1});
    return optical_matmul(rl, cols, probe).flattened();
  }

  /// Photonic product of the layer matrix with every column of `cols`.
  Tensor optical_matmul(const ResolvedLayer& rl, const Tensor& cols, LayerProbe& probe) {
    const MappingPlan& plan = plans_.at(rl.matrix_key);
    const bool vert = rl.weight_transposed;
    const std::size_t in_len = vert ? plan.rows : plan.cols;
    const std::size_t out_len = vert ? plan.cols : plan.rows;
    if (cols.rows() != in_len) {
      throw Error(ErrorCode::dimension, "layer '" + rl.desc->name + "' expects " + std::to_string(in_len) +
                                            " inputs, got " + std::to_string(cols.rows()));
    }
    const std::size_t n = cols.cols();
    const double sx_raw = max_abs(cols);
    const double sx = sx_raw > 0.0 ? sx_raw : 1.0;
    std::vector<double> scaled(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) scaled[i] = std::clamp(cols[i] / sx, -1.0, 1.0);
    const Tensor xq = dequantize(quantize(Tensor(cols.shape(), std::move(scaled)), opts_.activation_bits, 1.0));
    bool has_negative = false;
    for (double v : xq.values()) has_negative |= v < 0.0;
    const int passes = has_negative ? 2 : 1;

    const std::size_t tile_in = vert ? plan.cfg.rows : plan.cfg.cols;
    const std::size_t grid_in = vert ? plan.grid_rows : plan.grid_cols;
    const std::size_t grid_out = vert ? plan.grid_cols : plan.grid_rows;
    const MrrTileState& offset = session_.offset_row(rl.matrix_key);

    std::vector<double> y(out_len * n, 0.0);
    std::vector<double> slice(tile_in);
    for (std::size_t col = 0; col < n; ++col) {
      for (int pass = 0; pass < passes; ++pass) {
        const double sign = pass == 0 ? 1.0 : -1.0;
        for (std::size_t gi = 0; gi < grid_in; ++gi) {
          const std::size_t in0 = gi * tile_in;
          for (std::size_t i = 0; i < tile_in; ++i) {
            const std::size_t src = in0 + i;
            const double v = src < in_len ? sign * xq[src * n + col] : 0.0;
            slice[i] = std::max(v, 0.0);
          }
          const Tensor xs = Tensor::vector(slice);
          const double off = offset_readout(offset, xs, in0, opts_.adc_bits);
          ++workload_.output_samples;
          for (std::size_t go = 0; go < grid_out; ++go) {
            const std::size_t tr = vert ? gi : go, tc = vert ? go : gi;
            const std::size_t idx = plan.tile_index(tr, tc);
            const TileSlot& slot = plan.tiles[idx];
            const Tensor raw = tile_mvm(session_.tile(rl.matrix_key, idx), xs,
                                        vert ? InputDirection::vertical : InputDirection::horizontal,
                                        opts_.adc_bits);
            const std::size_t out0 = vert ? slot.col0 : slot.row0;
            const std::size_t valid = vert ? slot.valid_cols : slot.valid_rows;
            for (std::size_t o = 0; o < valid; ++o) y[(out0 + o) * n + col] += sign * 2.0 * (raw[o] - off);
            ++workload_.tile_mvms;
            ++workload_.mvm_cycles;
            workload_.input_symbols += tile_in;
            workload_.output_samples += raw.size();
          }
        }
      }
    }
    const double rescale = plan.scale * sx;
    for (double& v : y) v *= rescale;
    Tensor out({out_len, n}, std::move(y));

    const Tensor w = effective_matrix(rl);
    const Tensor ref = matmul_reference(w, cols);
    probe.layer = rl.desc->name;
    probe.matrix_key = rl.matrix_key;
    probe.transposed = vert;
    probe.weight_scale = plan.scale;
    probe.input_scale = sx_raw;
    probe.step = plan.scale * sx_raw * static_cast<double>(grid_in * tile_in) * passes /
                 static_cast<double>(qmax_for_bits(opts_.activation_bits));
    probe.deviation = max_abs_diff(out, ref);
    double norm = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < w.cols(); ++c) s += std::abs(w(r, c));
      norm = std::max(norm, s);
    }
    probe.out_norm_inf = norm;
    return out;
  }

  NetworkDesc net_;
  WeightStore weights_;
  CalibrationCurve curve_;
  ComponentParams params_;
  PhotonicOptions opts_;
  Session session_;
  std::vector<ResolvedLayer> layers_;
  std::map<std::string, MappingPlan> plans_;
  WriteTrace trace_;
  Workload workload_;
  bool programmed_ = false;
};

/// End-to-end deviation bound from per-layer probes: each layer's readout
/// error 3 q_l is amplified by the infinity norms of the optical layers
/// after it. Valid when the electrical stages between optical layers are
/// ReLU or shuffles, which are 1-Lipschitz in that norm.
inline double propagated_bound(const std::vector<LayerProbe>& probes, double steps_per_layer = 3.0) {
  double bound = 0.0;
  for (const LayerProbe& p : probes) bound = bound * p.out_norm_inf + steps_per_layer * p.step;
  return bound;
}

}  // namespace rnb
