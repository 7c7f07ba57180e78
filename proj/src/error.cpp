#include "cardpath/error.hpp"

namespace cardpath {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::AlreadyRealized: return "AlreadyRealized";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::NegativeModulus: return "NegativeModulus";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonpositiveUnit: return "NonpositiveUnit";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::UnboundedPotential: return "UnboundedPotential";
    case ErrorCode::CausticSingularity: return "CausticSingularity";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ShootingFailure: return "ShootingFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool Error::numerical() const noexcept {
  switch (code_) {
    case ErrorCode::ZeroDenominator:
    case ErrorCode::TooLarge:
    case ErrorCode::UnboundedPotential:
    case ErrorCode::CausticSingularity:
    case ErrorCode::NoConvergence:
    case ErrorCode::ShootingFailure:
      return true;
    default:
      return false;
  }
}

}  // namespace cardpath
