// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Convolution lowered to tile-sized matrix products.
//
//   patch[(ci*k + di)*k + dj, oy*ow + ox] = x[ci, oy*s + di - pad, ox*s + dj - pad]
//   y[co, oy*ow + ox] = sum_r W[co, r] * patch[r, oy*ow + ox]
//
// Out-of-range reads are zero padding.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rnb/error.hpp"
#include "rnb/network.hpp"
#include "rnb/numerics.hpp"

namespace rnb {

struct ConvGeometry {
  std::size_t cin = 0, h = 0, w = 0, k = 1, stride = 1, pad = 0;
  std::size_t oh = 0, ow = 0;

  std::size_t patch_rows() const { return cin * k * k; }
  std::size_t patch_cols() const { return oh * ow; }
};

inline ConvGeometry conv_geometry(const LayerDesc& conv, const Shape& in) {
  if (conv.kind != LayerKind::conv2d) throw Error(ErrorCode::invalid_input, "not a conv2d layer");
  if (in.size() != 3 || in[0] != conv.cin) {
    throw Error(ErrorCode::dimension, "conv2d '" + conv.name + "' expects [" +
                                          std::to_string(conv.cin) + "xHxW], got " + shape_str(in));
  }
  if (conv.stride == 0) throw Error(ErrorCode::dimension, "conv2d stride must be >= 1");
  ConvGeometry g{conv.cin, in[1], in[2], conv.k, conv.stride, conv.pad, 0, 0};
  const std::size_t hp = g.h + 2 * g.pad, wp = g.w + 2 * g.pad;
  if (g.k > hp || g.k > wp) {
    throw Error(ErrorCode::dimension, "conv2d '" + conv.name + "' kernel " + std::to_string(g.k) +
                                          " is larger than the padded input " + shape_str(in));
  }
  g.oh = (hp - g.k) / g.stride + 1;
  g.ow = (wp - g.k) / g.stride + 1;
  return g;
}

inline Tensor im2col(const Tensor& x, const ConvGeometry& g) {
  std::vector<double> patch(g.patch_rows() * g.patch_cols(), 0.0);
  const auto& v = x.values();
  for (std::size_t ci = 0; ci < g.cin; ++ci)
    for (std::size_t di = 0; di < g.k; ++di)
      for (std::size_t dj = 0; dj < g.k; ++dj) {
        const std::size_t r = (ci * g.k + di) * g.k + dj;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + di) - static_cast<long>(g.pad);
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + dj) - static_cast<long>(g.pad);
            if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
            patch[r * g.patch_cols() + oy * g.ow + ox] =
                v[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)];
          }
        }
      }
  return Tensor({g.patch_rows(), g.patch_cols()}, std::move(patch));
}

/// Adjoint of im2col: scatter-adds patch gradients back onto the input.
inline Tensor col2im(const Tensor& patch, const ConvGeometry& g) {
  std::vector<double> x(g.cin * g.h * g.w, 0.0);
  const auto& p = patch.values();
  for (std::size_t ci = 0; ci < g.cin; ++ci)
    for (std::size_t di = 0; di < g.k; ++di)
      for (std::size_t dj = 0; dj < g.k; ++dj) {
        const std::size_t r = (ci * g.k + di) * g.k + dj;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const long iy = static_cast<long>(oy * g.stride + di) - static_cast<long>(g.pad);
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const long ix = static_cast<long>(ox * g.stride + dj) - static_cast<long>(g.pad);
            if (ix < 0 || ix >= static_cast<long>(g.w)) continue;
            x[(ci * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] +=
                p[r * g.patch_cols() + oy * g.ow + ox];
          }
        }
      }
  return Tensor({g.cin, g.h, g.w}, std::move(x));
}

struct LoweredConv {
  Tensor patches;  // [cin*k*k, oh*ow]
  Tensor weights;  // [cout, cin*k*k]
  ConvGeometry geometry;
};

/// Lowers a conv layer applied to `input` with kernel `weight`
/// ([cout, cin, k, k] or already flattened) to a single matrix product.
inline LoweredConv lower_conv_im2col(const LayerDesc& conv, const Tensor& input, const Tensor& weight) {
  const ConvGeometry g = conv_geometry(conv, input.shape());
  if (weight.size() != conv.cout * g.patch_rows()) {
    throw Error(ErrorCode::dimension, "conv2d '" + conv.name + "' weight has shape " +
                                          shape_str(weight.shape()) + ", expected " +
                                          shape_str(conv.weight_shape()));
  }
  return {im2col(input, g), weight.reshaped({conv.cout, g.patch_rows()}), g};
}

}  // namespace rnb
