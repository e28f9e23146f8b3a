// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rnb/error.hpp"
#include "rnb/numerics.hpp"
#include "rnb/obu.hpp"

namespace rnb {

struct Dataset {
  Shape sample_shape;
  std::vector<Tensor> inputs;
  std::vector<std::size_t> labels;
  std::string split = "train";

  std::size_t size() const { return inputs.size(); }

  void validate() const {
    if (inputs.size() != labels.size()) {
      throw Error(ErrorCode::invalid_input, "dataset has " + std::to_string(inputs.size()) +
                                                " inputs but " + std::to_string(labels.size()) + " labels");
    }
  }
};

/// Standard normal draws by Box-Muller over SplitMix64, so samples are
/// identical on every platform (std::normal_distribution is not).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    double u1 = rng_.uniform();
    while (u1 <= 0.0) u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  SplitMix64& engine() { return rng_; }

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool cached_ = false;
};

/// Two Gaussian blobs whose centers lie `separation` apart on the diagonal,
/// per-axis deviation `spread`, labels alternating 0, 1.
inline Dataset make_blobs(std::size_t n, std::size_t dim, std::uint64_t seed, double separation = 5.0,
                          double spread = 1.0) {
  if (n == 0 || dim == 0) throw Error(ErrorCode::invalid_input, "blob dataset needs n, dim >= 1");
  Dataset d;
  d.sample_shape = {dim};
  GaussianSource g(seed);
  const double c = separation / (2.0 * std::sqrt(static_cast<double>(dim)));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double center = label ? c : -c;
    std::vector<double> v(dim);
    for (double& e : v) e = center + spread * g.next();
    d.inputs.push_back(Tensor::vector(std::move(v)));
    d.labels.push_back(label);
  }
  return d;
}

/// Uniform inputs in [-1, 1] with labels drawn independently of them.
inline Dataset make_random_labels(std::size_t n, std::size_t dim, std::size_t classes, std::uint64_t seed) {
  if (classes == 0) throw Error(ErrorCode::invalid_input, "need at least one class");
  Dataset d;
  d.sample_shape = {dim};
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (double& e : v) e = 2.0 * rng.uniform() - 1.0;
    d.inputs.push_back(Tensor::vector(std::move(v)));
    d.labels.push_back(static_cast<std::size_t>(rng.below(classes)));
  }
  return d;
}

namespace detail {

inline std::uint32_t read_be32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::io, "truncated IDX header: " + path);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

}  // namespace detail

/// IDX image/label pair (unsigned byte data). Pixels are scaled to [0, 1];
/// `limit` keeps the first samples only (0 = all).
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t limit = 0) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw Error(ErrorCode::io, "dataset not found: " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw Error(ErrorCode::io, "dataset not found: " + labels_path);

  const std::uint32_t img_magic = detail::read_be32(img, images_path);
  if ((img_magic & 0xFFFFFF00u) != 0x00000800u || (img_magic & 0xFFu) < 1) {
    throw Error(ErrorCode::io, "not an unsigned-byte IDX file: " + images_path);
  }
  const std::uint32_t rank = img_magic & 0xFFu;
  std::uint32_t count = detail::read_be32(img, images_path);
  Shape sample;
  for (std::uint32_t r = 1; r < rank; ++r) sample.push_back(detail::read_be32(img, images_path));
  if (sample.empty()) sample = {1};

  if (detail::read_be32(lab, labels_path) != 0x00000801u) {
    throw Error(ErrorCode::io, "not an IDX label file: " + labels_path);
  }
  const std::uint32_t label_count = detail::read_be32(lab, labels_path);
  if (label_count != count) {
    throw Error(ErrorCode::io, "IDX image/label counts differ: " + std::to_string(count) + " vs " +
                                   std::to_string(label_count));
  }
  if (limit && limit < count) count = static_cast<std::uint32_t>(limit);

  Dataset d;
  d.sample_shape = sample;
  const std::size_t per = numel(sample);
  std::vector<unsigned char> buf(per);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(per))) {
      throw Error(ErrorCode::io, "truncated IDX images: " + images_path);
    }
    std::vector<double> v(per);
    for (std::size_t k = 0; k < per; ++k) v[k] = buf[k] / 255.0;
    d.inputs.emplace_back(sample, std::move(v));
    char l;
    if (!lab.read(&l, 1)) throw Error(ErrorCode::io, "truncated IDX labels: " + labels_path);
    d.labels.push_back(static_cast<unsigned char>(l));
  }
  return d;
}

}  // namespace rnb
