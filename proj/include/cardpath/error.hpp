#pragma once

#include <stdexcept>
#include <string>

namespace cardpath {

enum class ErrorCode {
  InvalidArgument,
  AlreadyRealized,
  InvalidDistribution,
  NegativeModulus,
  GridMismatch,
  NonpositiveUnit,
  ZeroDenominator,
  TooLarge,
  UnboundedPotential,
  CausticSingularity,
  NoConvergence,
  ShootingFailure,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of a numerical procedure (as opposed to bad input).
  bool numerical() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace cardpath
