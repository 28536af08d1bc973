// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace npd {

enum class ErrorKind {
  InvalidArgument,
  NonNeutralSource,
  NonFinite,
  NegativityBreach,
  TimeoutIncomplete,
  UnderResolved,
  MismatchedTrajectories,
  ConfigError,
  CheckpointError,
  SchemaError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonNeutralSource: return "NonNeutralSource";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NegativityBreach: return "NegativityBreach";
    case ErrorKind::TimeoutIncomplete: return "TimeoutIncomplete";
    case ErrorKind::UnderResolved: return "UnderResolved";
    case ErrorKind::MismatchedTrajectories: return "MismatchedTrajectories";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::CheckpointError: return "CheckpointError";
    case ErrorKind::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace npd
