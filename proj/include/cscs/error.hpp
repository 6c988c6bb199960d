#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cscs {

enum class ErrorCode {
  DimensionMismatch,
  InvalidData,
  ZeroVarianceColumn,
  InvalidCovariance,
  InvalidProblem,
  InvalidConfig,
  StaleResidual,
  DomainError,
  FoldDegenerate,
  DegenerateConfig,
  EmptyTruth,
  InsufficientCurve,
  SingularBlock,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidData: return "InvalidData";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::InvalidCovariance: return "InvalidCovariance";
    case ErrorCode::InvalidProblem: return "InvalidProblem";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::StaleResidual: return "StaleResidual";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::FoldDegenerate: return "FoldDegenerate";
    case ErrorCode::DegenerateConfig: return "DegenerateConfig";
    case ErrorCode::EmptyTruth: return "EmptyTruth";
    case ErrorCode::InsufficientCurve: return "InsufficientCurve";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Exception type thrown by every component of the library. The code
/// identifies the failed contract; the message carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {

inline void require(bool condition, ErrorCode code, const char* message) {
  if (!condition) throw Error(code, message);
}

}  // namespace detail
}  // namespace cscs
