// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Blend-unit transforms applied between uses of a shared weight block.
 *
 * Shuffles permute activations in the electrical domain after O/E
 * conversion. Transposes are served optically by driving the tile from the
 * vertical side, so they never touch the programmed weights.
 *
 * Channel shuffle uses group-transpose semantics: with c channels in g groups
 * the output channel i*(c/g)+j holds input channel j*g+i.
 *
 * Flattened shuffle permutes contiguous blocks of the flattened tensor with a
 * Fisher-Yates pass driven by SplitMix64 (see SplitMix64 below), so a given
 * (block count, seed) pair yields the same permutation on every platform.
 */

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rnb/error.hpp"
#include "rnb/numerics.hpp"

namespace rnb {

struct ObuTransform {
  enum class Kind { identity, transpose, channel_shuffle, flattened_shuffle };

  Kind kind = Kind::identity;
  std::size_t groups = 1;
  std::size_t block = 1;
  std::uint64_t seed = 0;

  static ObuTransform identity() { return {}; }
  static ObuTransform transpose() { return {Kind::transpose, 1, 1, 0}; }
  static ObuTransform channel_shuffle(std::size_t g) { return {Kind::channel_shuffle, g, 1, 0}; }
  static ObuTransform flattened_shuffle(std::size_t block, std::uint64_t seed) {
    return {Kind::flattened_shuffle, 1, block, seed};
  }

  bool is_shuffle() const {
    return kind == Kind::channel_shuffle || kind == Kind::flattened_shuffle;
  }

  friend bool operator==(const ObuTransform&, const ObuTransform&) = default;
};

inline std::string to_string(ObuTransform::Kind kind) {
  switch (kind) {
    case ObuTransform::Kind::identity: return "identity";
    case ObuTransform::Kind::transpose: return "transpose";
    case ObuTransform::Kind::channel_shuffle: return "channel_shuffle";
    case ObuTransform::Kind::flattened_shuffle: return "flattened_shuffle";
  }
  return "unknown";
}

/// SplitMix64: a counter-based 64-bit generator. The n-th output is
/// mix(seed + n * 0x9E3779B97F4A7C15), so copies are cheap and reproducible.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// perm[k] is the source block placed at output position k.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

inline std::vector<std::size_t> invert_permutation(const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return inv;
}

/// Output channel k takes source channel order[k] for every spatial position.
inline Tensor gather_channels(const Tensor& x, const std::vector<std::size_t>& order) {
  const std::size_t c = x.dim(0);
  const std::size_t spatial = x.size() / c;
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < c; ++k) {
    const std::size_t src = order[k];
    for (std::size_t s = 0; s < spatial; ++s) out[k * spatial + s] = x[src * spatial + s];
  }
  return Tensor(x.shape(), std::move(out));
}

inline std::vector<std::size_t> channel_shuffle_order(std::size_t c, std::size_t g) {
  if (g == 0 || c % g != 0) {
    throw Error(ErrorCode::group, "channel shuffle needs g | c, got c=" + std::to_string(c) +
                                      " g=" + std::to_string(g));
  }
  const std::size_t per_group = c / g;
  std::vector<std::size_t> order(c);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < per_group; ++j) order[i * per_group + j] = j * g + i;
  return order;
}

/// Channels are axis 0; rank-1 tensors are treated as c x 1 x 1.
inline Tensor channel_shuffle(const Tensor& x, std::size_t g) {
  return gather_channels(x, channel_shuffle_order(x.dim(0), g));
}

/// Inverse of channel_shuffle(x, g); equal to channel_shuffle(x, c / g).
inline Tensor channel_unshuffle(const Tensor& x, std::size_t g) {
  return gather_channels(x, invert_permutation(channel_shuffle_order(x.dim(0), g)));
}

inline Tensor permute_blocks(const Tensor& x, std::size_t block,
                             const std::vector<std::size_t>& order) {
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < order.size(); ++k)
    for (std::size_t e = 0; e < block; ++e) out[k * block + e] = x[order[k] * block + e];
  return Tensor(x.shape(), std::move(out));
}

inline std::size_t flattened_block_count(const Tensor& x, std::size_t block) {
  if (block == 0 || x.size() % block != 0) {
    throw Error(ErrorCode::block, "flattened shuffle needs block | numel, got numel=" +
                                      std::to_string(x.size()) +
                                      " block=" + std::to_string(block));
  }
  return x.size() / block;
}

inline Tensor flattened_shuffle(const Tensor& x, std::size_t block, std::uint64_t seed) {
  const std::size_t n = flattened_block_count(x, block);
  return permute_blocks(x, block, seeded_permutation(n, seed));
}

inline Tensor flattened_unshuffle(const Tensor& x, std::size_t block, std::uint64_t seed) {
  const std::size_t n = flattened_block_count(x, block);
  return permute_blocks(x, block, invert_permutation(seeded_permutation(n, seed)));
}

/// (k, i, j) -> (k, j, i). Rank-2 input is a single channel and stays rank 2.
inline Tensor transpose_hw(const Tensor& x) {
  if (x.rank() == 2) return transpose2d(x);
  if (x.rank() != 3) {
    throw Error(ErrorCode::dimension, "transpose_hw expects c x h x w, got " +
                                          shape_str(x.shape()));
  }
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < h; ++i)
      for (std::size_t j = 0; j < w; ++j) out[(k * w + j) * h + i] = x[(k * h + i) * w + j];
  return Tensor({c, w, h}, std::move(out));
}

/// Shape produced by applying `t` to an activation of shape `in`.
inline Shape transformed_shape(const ObuTransform& t, const Shape& in) {
  switch (t.kind) {
    case ObuTransform::Kind::identity:
      return in;
    case ObuTransform::Kind::channel_shuffle:
      if (in.empty() || t.groups == 0 || in[0] % t.groups != 0) {
        throw Error(ErrorCode::group, "channel shuffle g=" + std::to_string(t.groups) +
                                          " does not divide channels of " + shape_str(in));
      }
      return in;
    case ObuTransform::Kind::flattened_shuffle:
      if (t.block == 0 || numel(in) % t.block != 0) {
        throw Error(ErrorCode::block, "flattened shuffle block=" + std::to_string(t.block) +
                                          " does not divide numel of " + shape_str(in));
      }
      return in;
    case ObuTransform::Kind::transpose:
      if (in.size() == 2) return {in[1], in[0]};
      if (in.size() == 3) return {in[0], in[2], in[1]};
      throw Error(ErrorCode::dimension, "spatial transpose needs a rank-2/3 activation, got " +
                                            shape_str(in));
  }
  return in;
}

/// Activation-side application of a transform.
inline Tensor apply_activation_transform(const ObuTransform& t, const Tensor& x) {
  switch (t.kind) {
    case ObuTransform::Kind::identity: return x;
    case ObuTransform::Kind::transpose: return transpose_hw(x);
    case ObuTransform::Kind::channel_shuffle: return channel_shuffle(x, t.groups);
    case ObuTransform::Kind::flattened_shuffle: return flattened_shuffle(x, t.block, t.seed);
  }
  return x;
}

/// Adjoint (= inverse, all transforms are permutations) of the activation
/// transform; `y` has the transformed shape.
inline Tensor apply_activation_adjoint(const ObuTransform& t, const Tensor& y) {
  switch (t.kind) {
    case ObuTransform::Kind::identity: return y;
    case ObuTransform::Kind::transpose: return transpose_hw(y);
    case ObuTransform::Kind::channel_shuffle: return channel_unshuffle(y, t.groups);
    case ObuTransform::Kind::flattened_shuffle: return flattened_unshuffle(y, t.block, t.seed);
  }
  return y;
}

/// How a stored weight matrix is presented to the tile inputs.
struct WeightView {
  const Tensor* weight = nullptr;
  bool transposed = false;

  std::size_t out_dim() const { return transposed ? weight->cols() : weight->rows(); }
  std::size_t in_dim() const { return transposed ? weight->rows() : weight->cols(); }

  /// Float reference for the view: W x or W^T x.
  Tensor apply(const Tensor& x) const {
    return transposed ? matvec_reference(transpose2d(*weight), x)
                      : matvec_reference(*weight, x);
  }
};

inline WeightView weight_view(const Tensor& w, const ObuTransform& t) {
  if (w.rank() != 2) throw Error(ErrorCode::dimension, "weight_view expects a matrix");
  if (t.is_shuffle()) {
    throw Error(ErrorCode::mapping,
                "shuffle transforms act on activations, not weight views");
  }
  return WeightView{&w, t.kind == ObuTransform::Kind::transpose};
}

}  // namespace rnb
