#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msvc {

enum class ErrorCode {
  // input / contract violations
  InvalidArgument,
  DimensionMismatch,
  NonFiniteInput,
  ShapeMismatch,
  InvalidKnotCount,
  NonPositiveRange,
  SizeGuardExceeded,
  MissingKnots,
  InsufficientData,
  // numerical failures
  AllPointsCoincident,
  DegenerateKernel,
  SingularCorrection,
  ConstantVector,
  NonPositiveEigenvalue,
  SingularP,
  PerfectFit,
  NegativeResidualNorm,
  SingularBlock,
  SingularInnerMatrix,
  LocalSingularity,
  NoValidBandwidth,
};

std::string_view error_name(ErrorCode code) noexcept;

/// True for codes that describe a malformed request rather than a numerical
/// failure of the estimator.
bool is_input_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace msvc
