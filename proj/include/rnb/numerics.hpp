// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * Dense real tensors, symmetric per-tensor integer quantization and the
 * double-precision reference arithmetic every photonic path is checked
 * against.
 *
 * Quantization scheme (symmetric, zero point 0, -128 unused at 8 bits):
 *   range = max(|t|)            (or caller-supplied)
 *   scale = range / qmax        (scale = 1 when range == 0)
 *   code  = round(v * qmax / range), half away from zero, clamped to +-qmax
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rnb/error.hpp"

namespace rnb {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

/// Row-major dense tensor of finite doubles.
class Tensor {
 public:
  Tensor() = default;

  Tensor(Shape shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    for (std::size_t d : shape_) {
      if (d == 0) {
        throw Error(ErrorCode::dimension,
                    "tensor dimensions must be positive, got " + shape_str(shape_));
      }
    }
    if (numel(shape_) != data_.size()) {
      throw Error(ErrorCode::dimension,
                  "tensor shape " + shape_str(shape_) + " needs " +
                      std::to_string(numel(shape_)) + " values, got " +
                      std::to_string(data_.size()));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::invalid_input, "tensor contains a non-finite value");
      }
    }
  }

  static Tensor zeros(Shape shape) {
    const std::size_t n = numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, 0.0));
  }

  static Tensor filled(Shape shape, double value) {
    const std::size_t n = numel(shape);
    return Tensor(std::move(shape), std::vector<double>(n, value));
  }

  static Tensor vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
  }

  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<double> values;
    values.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) {
        throw Error(ErrorCode::dimension, "ragged matrix literal");
      }
      values.insert(values.end(), row.begin(), row.end());
    }
    return Tensor({r, c}, std::move(values));
  }

  static Tensor identity(std::size_t n) {
    Tensor t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
    return t;
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t rows() const { return dim(0); }
  std::size_t cols() const { return dim(1); }
  std::size_t dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
      throw Error(ErrorCode::dimension, "axis " + std::to_string(axis) +
                                            " out of range for " + shape_str(shape_));
    }
    return shape_[axis];
  }

  std::span<const double> values() const noexcept { return data_; }
  /// Mutable access; callers must keep values finite.
  std::span<double> mutable_values() noexcept { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

  Tensor reshaped(Shape shape) const {
    if (numel(shape) != data_.size()) {
      throw Error(ErrorCode::dimension, "cannot reshape " + shape_str(shape_) + " to " +
                                            shape_str(shape));
    }
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
  }

  Tensor flattened() const { return reshaped({data_.size()}); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

struct QuantTensor {
  Shape shape;
  std::vector<std::int8_t> codes;
  double scale = 1.0;
};

inline double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::fabs(v));
  return m;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension, "size mismatch " + shape_str(a.shape()) + " vs " +
                                          shape_str(b.shape()));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline int qmax_for_bits(int bits) {
  if (bits < 2 || bits > 8) {
    throw Error(ErrorCode::invalid_input,
                "quantization supports 2..8 bits, got " + std::to_string(bits));
  }
  return (1 << (bits - 1)) - 1;
}

/// Symmetric per-tensor quantization. `range` overrides max(|t|) as the
/// full-scale value; values beyond it saturate at +-qmax.
inline QuantTensor quantize(const Tensor& t, int bits = 8,
                            std::optional<double> range = std::nullopt) {
  if (t.empty()) throw Error(ErrorCode::invalid_input, "cannot quantize an empty tensor");
  const int qmax = qmax_for_bits(bits);
  double full_scale = range ? *range : max_abs(t);
  if (range && !(std::isfinite(*range) && *range >= 0.0)) {
    throw Error(ErrorCode::invalid_input, "quantization range must be finite and >= 0");
  }
  QuantTensor q;
  q.shape = t.shape();
  q.codes.resize(t.size(), 0);
  if (full_scale == 0.0) {
    q.scale = 1.0;
    return q;
  }
  q.scale = full_scale / qmax;
  for (std::size_t i = 0; i < t.size(); ++i) {
    double c = std::round(t[i] * qmax / full_scale);
    c = std::clamp(c, -static_cast<double>(qmax), static_cast<double>(qmax));
    q.codes[i] = static_cast<std::int8_t>(c);
  }
  return q;
}

inline Tensor dequantize(const QuantTensor& q) {
  std::vector<double> values(q.codes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = q.codes[i] * q.scale;
  return Tensor(q.shape, std::move(values));
}

inline Tensor matvec_reference(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1) {
    throw Error(ErrorCode::dimension, "matvec expects a matrix and a vector, got " +
                                          shape_str(w.shape()) + " and " +
                                          shape_str(x.shape()));
  }
  if (w.cols() != x.size()) {
    throw Error(ErrorCode::dimension, "matvec shape mismatch: " + shape_str(w.shape()) +
                                          " x " + shape_str(x.shape()));
  }
  const std::size_t rows = w.rows();
  const std::size_t cols = w.cols();
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    long double acc = 0.0L;
    for (std::size_t c = 0; c < cols; ++c) acc += static_cast<long double>(w(r, c)) * x[c];
    y[r] = static_cast<double>(acc);
  }
  return Tensor::vector(std::move(y));
}

inline Tensor matmul_reference(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
    throw Error(ErrorCode::dimension, "matmul shape mismatch: " + shape_str(a.shape()) +
                                          " x " + shape_str(b.shape()));
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      long double acc = 0.0L;
      for (std::size_t p = 0; p < k; ++p) acc += static_cast<long double>(a(i, p)) * b(p, j);
      out[i * n + j] = static_cast<double>(acc);
    }
  }
  return Tensor::matrix(m, n, std::move(out));
}

inline Tensor transpose2d(const Tensor& w) {
  if (w.rank() != 2) throw Error(ErrorCode::dimension, "transpose2d expects a matrix");
  const std::size_t r = w.rows(), c = w.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = w(i, j);
  return Tensor::matrix(c, r, std::move(out));
}

}  // namespace rnb
