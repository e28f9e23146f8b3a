// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

/**
 * One MRR crossbar tile: signed-weight offset decomposition, voltage
 * encoding, the C-iteration program/calibrate write loop and tile MVM.
 *
 * Signed weights W_b in [-1, 1] are stored as W'_b = W_b / 2 + W_o with a
 * uniform offset W_o = 0.5, so every transmission is in [0, 1]. The signed
 * product is recovered electrically as W_b x = 2 (W'_b x - W_o x), where
 * W_o x comes from a single shared 1 x N offset row.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rnb/error.hpp"
#include "rnb/numerics.hpp"
#include "rnb/params.hpp"

namespace rnb {

struct TileConfig {
  std::size_t rows = 8;
  std::size_t cols = 8;
  std::size_t dwdm_capacity = 16;

  void validate() const {
    if (rows < 1 || cols < 1) throw Error(ErrorCode::invalid_input, "tile dims must be >= 1");
    if (dwdm_capacity < 1) throw Error(ErrorCode::invalid_input, "DWDM capacity must be >= 1");
  }

  std::size_t cells() const { return rows * cols; }
};

inline constexpr double kOffsetValue = 0.5;
/// Readout and weight resolution shared by the write-skip rule.
inline constexpr double kDefaultWriteTolerance = 1.0 / 255.0;

struct OffsetDecomposition {
  Tensor w_b;
  Tensor w_prime;
  double w_offset_value = kOffsetValue;
};

inline OffsetDecomposition decompose_offset(const Tensor& w_b) {
  if (w_b.rank() != 2) throw Error(ErrorCode::dimension, "offset decomposition needs a matrix");
  std::vector<double> prime(w_b.size());
  for (std::size_t i = 0; i < w_b.size(); ++i) {
    const double v = w_b[i];
    if (v < -1.0 || v > 1.0) {
      throw Error(ErrorCode::normalization,
                  "weight " + std::to_string(v) + " at flat index " + std::to_string(i) +
                      " is outside [-1, 1]; normalize before mapping");
    }
    prime[i] = 0.5 * v + kOffsetValue;
  }
  return {w_b, Tensor(w_b.shape(), std::move(prime)), kOffsetValue};
}

/// W_o x for an offset matrix with `rows` identical rows.
inline Tensor offset_product(const OffsetDecomposition& d, const Tensor& x) {
  long double acc = 0.0L;
  for (double v : x.values()) acc += static_cast<long double>(d.w_offset_value) * v;
  return Tensor::filled({d.w_b.rows()}, static_cast<double>(acc));
}

/// 2 (W'_b x - W_o x): the signed product recovered from transmissions.
inline Tensor reconstruct_product(const OffsetDecomposition& d, const Tensor& x) {
  const Tensor positive = matvec_reference(d.w_prime, x);
  const Tensor offset = offset_product(d, x);
  std::vector<double> out(positive.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * (positive[i] - offset[i]);
  return Tensor::vector(std::move(out));
}

/// Extra rings (and initial writes) for the uniform offset row of an
/// n-column matrix. The row is shared by every tile of the matrix.
inline std::size_t offset_row_cost(std::size_t n) {
  if (n < 1) throw Error(ErrorCode::invalid_input, "offset row needs n >= 1");
  return n;
}

/// Drive-voltage encoding: transmission = f(phi(v^2)). Both maps are
/// monotone increasing on their domains; inverses are found by bisection
/// unless supplied.
struct CalibrationCurve {
  using Fn = std::function<double(double)>;

  Fn f = [](double theta) { return theta; };
  Fn phi = [](double u) { return u; };
  Fn f_inverse;
  Fn phi_inverse;
  double theta_min = 0.0, theta_max = 1.0;  // domain of f, range of phi
  double u_min = 0.0, u_max = 1.0;          // domain of phi (squared voltage)
  int c_loop = 10;

  static CalibrationCurve identity(int c_loop = 10) {
    CalibrationCurve c;
    c.f_inverse = [](double x) { return x; };
    c.phi_inverse = [](double t) { return t; };
    c.c_loop = c_loop;
    return c;
  }

  /// f(theta) = sin^2(theta * pi / 2) on [0, 1], linear phi.
  static CalibrationCurve sin_squared(int c_loop = 10) {
    CalibrationCurve c;
    c.f = [](double theta) {
      const double s = std::sin(theta * M_PI / 2.0);
      return s * s;
    };
    c.phi_inverse = [](double t) { return t; };
    c.c_loop = c_loop;
    return c;
  }

  void validate() const {
    if (c_loop < 1) throw Error(ErrorCode::invalid_input, "calibration loop C must be >= 1");
    if (!f || !phi) throw Error(ErrorCode::invalid_input, "calibration curve maps are unset");
  }

  double transmission(double v) const { return f(phi(v * v)); }
};

namespace detail {

inline double bisect_increasing(const CalibrationCurve::Fn& fn, double target, double lo,
                                double hi) {
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) < target) lo = mid; else hi = mid;
  }
  return std::fabs(fn(lo) - target) <= std::fabs(fn(hi) - target) ? lo : hi;
}

}  // namespace detail

inline double voltage_for_target(const CalibrationCurve& curve, double x) {
  curve.validate();
  const double f_lo = curve.f(curve.theta_min);
  const double f_hi = curve.f(curve.theta_max);
  if (!(x >= 0.0 && x <= 1.0) || x < f_lo - 1e-12 || x > f_hi + 1e-12) {
    throw Error(ErrorCode::unreachable_target,
                "target transmission " + std::to_string(x) + " is outside the reachable range [" +
                    std::to_string(f_lo) + ", " + std::to_string(f_hi) + "]");
  }
  const double theta = curve.f_inverse
                           ? curve.f_inverse(x)
                           : detail::bisect_increasing(curve.f, x, curve.theta_min, curve.theta_max);
  const double u = curve.phi_inverse
                       ? curve.phi_inverse(theta)
                       : detail::bisect_increasing(curve.phi, theta, curve.u_min, curve.u_max);
  return std::sqrt(std::max(u, 0.0));
}

struct WriteEvent {
  std::size_t tile_id = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  double target = 0.0;
  int iterations = 0;
  double energy_nj = 0.0;
  double time_ns = 0.0;

  friend bool operator==(const WriteEvent&, const WriteEvent&) = default;
};

struct MrrTileState {
  TileConfig config;
  std::size_t tile_id = 0;
  Tensor programmed;                      // current transmissions
  std::vector<std::uint32_t> write_count; // per cell, row-major
  std::vector<std::uint8_t> initialized;  // cell holds a programmed value

  static MrrTileState fresh(const TileConfig& config, std::size_t tile_id = 0) {
    config.validate();
    MrrTileState s;
    s.config = config;
    s.tile_id = tile_id;
    s.programmed = Tensor::zeros({config.rows, config.cols});
    s.write_count.assign(config.cells(), 0);
    s.initialized.assign(config.cells(), 0);
    return s;
  }

  std::uint64_t total_writes() const {
    std::uint64_t n = 0;
    for (auto c : write_count) n += c;
    return n;
  }
};

struct ProgramResult {
  MrrTileState state;
  std::vector<WriteEvent> events;
  double program_time_ns = 0.0;  // rows write in parallel, cells within a row serially
};

/// Rewrites every cell whose target differs from the programmed value by
/// more than `tolerance` (unprogrammed cells are always written).
inline ProgramResult program_tile(const MrrTileState& state, const Tensor& target,
                                  const CalibrationCurve& curve, const ComponentParams& params,
                                  double tolerance = kDefaultWriteTolerance) {
  curve.validate();
  const TileConfig& cfg = state.config;
  if (target.rank() != 2 || target.rows() != cfg.rows || target.cols() != cfg.cols) {
    throw Error(ErrorCode::mapping, "tile target " + shape_str(target.shape()) +
                                        " does not match tile " + std::to_string(cfg.rows) +
                                        "x" + std::to_string(cfg.cols));
  }
  ProgramResult result{state, {}, 0.0};
  MrrTileState& next = result.state;
  const int c = curve.c_loop;
  const double energy = params.write_energy_nj(c);
  const double time = params.write_time_ns(c);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    std::size_t writes_in_row = 0;
    for (std::size_t col = 0; col < cfg.cols; ++col) {
      const std::size_t cell = r * cfg.cols + col;
      const double want = target(r, col);
      if (next.initialized[cell] && std::fabs(next.programmed(r, col) - want) <= tolerance) {
        continue;
      }
      const double v = voltage_for_target(curve, want);
      next.programmed(r, col) = std::clamp(curve.transmission(v), 0.0, 1.0);
      next.initialized[cell] = 1;
      ++next.write_count[cell];
      ++writes_in_row;
      result.events.push_back({state.tile_id, r, col, want, c, energy, time});
    }
    result.program_time_ns = std::max(result.program_time_ns, writes_in_row * time);
  }
  return result;
}

enum class InputDirection { horizontal, vertical };

/// Uniform ADC over [0, full_scale]; result is the reconstructed level.
inline double adc_readout(double value, double full_scale, int bits = 8) {
  const double levels = static_cast<double>((1 << bits) - 1);
  const double step = full_scale / levels;
  const double code = std::clamp(std::round(value / step), 0.0, levels);
  return code * step;
}

inline void check_encodable(const Tensor& x) {
  for (double v : x.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::encoding,
                  "tile input " + std::to_string(v) + " is outside the optical range [0, 1]");
    }
  }
}

/// Optical product of the programmed transmissions with x, digitized by an
/// ADC whose full scale is the input length (all-ones weights and inputs).
/// Horizontal input multiplies by the matrix, vertical by its transpose.
inline Tensor tile_mvm(const MrrTileState& state, const Tensor& x,
                       InputDirection dir = InputDirection::horizontal, int adc_bits = 8) {
  const std::size_t rows = state.config.rows, cols = state.config.cols;
  const std::size_t in = dir == InputDirection::horizontal ? cols : rows;
  const std::size_t out = dir == InputDirection::horizontal ? rows : cols;
  if (x.rank() != 1 || x.size() != in) {
    throw Error(ErrorCode::dimension, "tile input " + shape_str(x.shape()) + " needs length " +
                                          std::to_string(in));
  }
  check_encodable(x);
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in; ++i) {
      const double w = dir == InputDirection::horizontal ? state.programmed(o, i)
                                                         : state.programmed(i, o);
      acc += w * x[i];
    }
    y[o] = adc_readout(acc, static_cast<double>(in), adc_bits);
  }
  return Tensor::vector(std::move(y));
}

/// Digitized W_o x readout through the offset row; `first` selects the
/// offset rings serving this tile slice (the row is uniform, indices wrap).
inline double offset_readout(const MrrTileState& offset_row, const Tensor& x,
                             std::size_t first = 0, int adc_bits = 8) {
  check_encodable(x);
  const std::size_t n = offset_row.config.cols;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += offset_row.programmed(0, (first + i) % n) * x[i];
  return adc_readout(acc, static_cast<double>(x.size()), adc_bits);
}

}  // namespace rnb
