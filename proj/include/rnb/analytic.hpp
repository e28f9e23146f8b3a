// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Closed-form architecture comparison for K matrices of M x N weights with a
// calibration loop of C iterations and DWDM capacity B.
//
//                programming        latency              power
//   MZI          beta_a M N K       beta_a               beta_p M N K
//   CrossLight   min(N,B) K C       ceil(N C/(B beta_t)) min(N,B) K / beta_t
//   HolyLight    min(N,B) K C       ceil(N C / B)        min(N,B) K
//   RnB          min(N,B)           ceil(N / (B K))      min(N,B)
//
// Latency values are dimensionless cycles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "rnb/error.hpp"

namespace rnb {

enum class Arch { mzi, crosslight, holylight, rnb };

inline constexpr std::array<Arch, 4> kAllArchs = {Arch::mzi, Arch::crosslight, Arch::holylight,
                                                  Arch::rnb};

inline std::string_view to_string(Arch a) {
  switch (a) {
    case Arch::mzi: return "mzi";
    case Arch::crosslight: return "crosslight";
    case Arch::holylight: return "holylight";
    case Arch::rnb: return "rnb";
  }
  return "unknown";
}

inline Arch parse_arch(std::string_view name) {
  for (Arch a : kAllArchs)
    if (to_string(a) == name) return a;
  throw Error(ErrorCode::invalid_input, "unknown architecture '" + std::string(name) +
                                            "' (expected mzi, crosslight, holylight or rnb)");
}

struct ArchFormulaInputs {
  std::uint64_t M = 256, N = 256, K = 1, C = 10, B = 16;
  double beta_a = 24.0;
  double beta_p = 12.0;
  double beta_t = 1.0;

  void validate() const {
    if (M < 1 || N < 1 || K < 1 || C < 1 || B < 1) {
      throw Error(ErrorCode::invalid_input, "M, N, K, C and B must all be >= 1");
    }
    if (!(beta_a >= 1.0) || !(beta_p >= 1.0)) {
      throw Error(ErrorCode::invalid_input, "beta_a and beta_p must be >= 1");
    }
    if (!(beta_t > 0.0)) throw Error(ErrorCode::invalid_input, "beta_t must be > 0");
  }
};

struct ArchCost {
  double programming_times = 0.0;
  double latency_units = 0.0;
  double power_units = 0.0;
};

namespace detail {

inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

/// ceil(a / (b * beta)) exactly when beta is integral.
inline double ceil_ratio(std::uint64_t a, std::uint64_t b, double beta) {
  if (beta == std::floor(beta) && beta <= 1e15) {
    return static_cast<double>(ceil_div(a, b * static_cast<std::uint64_t>(beta)));
  }
  return std::ceil(static_cast<double>(a) / (static_cast<double>(b) * beta));
}

}  // namespace detail

inline ArchCost analytic_cost(Arch arch, const ArchFormulaInputs& in) {
  in.validate();
  const double lanes = static_cast<double>(std::min(in.N, in.B));
  const double mnk = static_cast<double>(in.M) * static_cast<double>(in.N) *
                     static_cast<double>(in.K);
  const double k = static_cast<double>(in.K), c = static_cast<double>(in.C);
  switch (arch) {
    case Arch::mzi:
      return {in.beta_a * mnk, in.beta_a, in.beta_p * mnk};
    case Arch::crosslight:
      return {lanes * k * c, detail::ceil_ratio(in.N * in.C, in.B, in.beta_t), lanes * k / in.beta_t};
    case Arch::holylight:
      return {lanes * k * c, static_cast<double>(detail::ceil_div(in.N * in.C, in.B)), lanes * k};
    case Arch::rnb:
      return {lanes, static_cast<double>(detail::ceil_div(in.N, in.B * in.K)), lanes};
  }
  return {};
}

}  // namespace rnb
