// Copyright 2026 The rnb Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rnb {

enum class ErrorCode {
  invalid_input,
  dimension,
  normalization,
  unreachable_target,
  mapping,
  encoding,
  schedule,
  group,
  block,
  schema,
  version,
  training,
  session,
  io,
  fit,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::dimension: return "dimension";
    case ErrorCode::normalization: return "normalization";
    case ErrorCode::unreachable_target: return "unreachable-target";
    case ErrorCode::mapping: return "mapping";
    case ErrorCode::encoding: return "encoding";
    case ErrorCode::schedule: return "schedule";
    case ErrorCode::group: return "group";
    case ErrorCode::block: return "block";
    case ErrorCode::schema: return "schema";
    case ErrorCode::version: return "version";
    case ErrorCode::training: return "training";
    case ErrorCode::session: return "session";
    case ErrorCode::io: return "io";
    case ErrorCode::fit: return "fit";
  }
  return "unknown";
}

/// Every domain failure in the library is reported through this type; the
/// code lets callers (and the CLI exit-code contract) branch on the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rnb
