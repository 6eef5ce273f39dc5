#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bergman {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteField,
  ResolutionTooLow,
  UnsupportedOrder,
  GridMismatch,
  NotKahler,
  DegreeMismatch,
  DimensionMismatch,
  GramNotPositive,
  NoConvergence,
  PositivityLost,
  MinStepReached,
  OutOfHorizon,
  DegenerateFit,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteField: return "NonFiniteField";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotKahler: return "NotKahler";
    case ErrorCode::DegreeMismatch: return "DegreeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::GramNotPositive: return "GramNotPositive";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::MinStepReached: return "MinStepReached";
    case ErrorCode::OutOfHorizon: return "OutOfHorizon";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace bergman
