#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace bdt {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

enum class ErrorCode {
  DimensionMismatch,
  BoundaryRateNonzero,
  NonPositiveInteriorRate,
  ProbabilityOutOfRange,
  AllThinningZero,
  NumericOverflow,
  SolveFailed,
  InternalIdentityViolated,
  StabilityCheckFailed,
  TruncationNotConverged,
  InvalidConfig,
  ParamOutOfRange,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BoundaryRateNonzero: return "BoundaryRateNonzero";
    case ErrorCode::NonPositiveInteriorRate: return "NonPositiveInteriorRate";
    case ErrorCode::ProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::AllThinningZero: return "AllThinningZero";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::SolveFailed: return "SolveFailed";
    case ErrorCode::InternalIdentityViolated: return "InternalIdentityViolated";
    case ErrorCode::StabilityCheckFailed: return "StabilityCheckFailed";
    case ErrorCode::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bdt
