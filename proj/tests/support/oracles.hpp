// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reference implementations and fixtures shared by the test
// binaries. Nothing here calls the code paths it is used to check.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rnb/rnb.hpp"

namespace rnb::testing {

/// Direct 2-D convolution: y[co,oy,ox] = sum w[co,ci,di,dj] x[ci, oy*s+di-p, ox*s+dj-p].
inline Tensor conv2d_direct(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (wd + 2 * pad - k) / stride + 1;
  std::vector<double> y(cout * oh * ow, 0.0);
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        long double acc = 0.0L;
        for (std::size_t ci = 0; ci < cin; ++ci)
          for (std::size_t di = 0; di < k; ++di)
            for (std::size_t dj = 0; dj < k; ++dj) {
              const long iy = static_cast<long>(oy * stride + di) - static_cast<long>(pad);
              const long ix = static_cast<long>(ox * stride + dj) - static_cast<long>(pad);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
              acc += static_cast<long double>(w[((co * cin + ci) * k + di) * k + dj]) *
                     x[(ci * h + static_cast<std::size_t>(iy)) * wd + static_cast<std::size_t>(ix)];
            }
        y[(co * oh + oy) * ow + ox] = static_cast<double>(acc);
      }
  return Tensor({cout, oh, ow}, std::move(y));
}

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  SplitMix64 rng(seed);
  std::vector<double> v(numel(shape));
  for (double& e : v) e = lo + (hi - lo) * rng.uniform();
  return Tensor(std::move(shape), std::move(v));
}

inline LayerDesc dense(std::string name, std::size_t in, std::size_t out) {
  LayerDesc l;
  l.kind = LayerKind::dense;
  l.name = std::move(name);
  l.in = in;
  l.out = out;
  return l;
}

inline LayerDesc relu(std::string name) {
  LayerDesc l;
  l.kind = LayerKind::relu;
  l.name = std::move(name);
  return l;
}

inline LayerDesc conv(std::string name, std::size_t cin, std::size_t cout, std::size_t k,
                      std::size_t stride = 1, std::size_t pad = 0) {
  LayerDesc l;
  l.kind = LayerKind::conv2d;
  l.name = std::move(name);
  l.cin = cin;
  l.cout = cout;
  l.k = k;
  l.stride = stride;
  l.pad = pad;
  return l;
}

inline LayerDesc norm(std::string name, std::size_t channels, double scale = 1.0, double offset = 0.0) {
  LayerDesc l;
  l.kind = LayerKind::norm;
  l.name = std::move(name);
  l.channels = channels;
  l.scale = scale;
  l.offset = offset;
  return l;
}

/// `blocks` blocks of one dense n x n layer each, optionally block-shared.
inline NetworkDesc dense_stack(std::size_t blocks, std::size_t n, bool shared) {
  NetworkDesc net;
  net.name = "stack";
  net.input_shape = {n};
  for (std::size_t b = 0; b < blocks; ++b) {
    BlockDesc block;
    block.name = "b" + std::to_string(b + 1);
    block.layers.push_back(dense(block.name + ".fc", n, n));
    net.blocks.push_back(block);
  }
  if (shared) {
    ReuseSpec spec;
    spec.basic = "b1";
    spec.granularity = Granularity::block_wise;
    for (const auto& b : net.blocks) spec.members.push_back(b.name);
    spec.transforms.assign(blocks, ObuTransform::identity());
    net.reuse.push_back(spec);
  }
  return net;
}

/// Weight store with uniform [-1, 1] matrices for every basic layer.
inline WeightStore random_weights(const NetworkDesc& net, std::uint64_t seed) {
  WeightStore store;
  std::uint64_t s = seed;
  for (const ResolvedLayer& rl : resolve_network(net)) {
    const LayerDesc& owner = net.layer(rl.param_name);
    if (!owner.optical() || store.contains(owner.weight_key())) continue;
    store.set(owner.weight_key(), random_tensor(owner.weight_shape(), ++s));
  }
  return store;
}

}  // namespace rnb::testing
