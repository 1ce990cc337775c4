#include "msvc/error.hpp"

namespace msvc {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidKnotCount: return "InvalidKnotCount";
    case ErrorCode::NonPositiveRange: return "NonPositiveRange";
    case ErrorCode::SizeGuardExceeded: return "SizeGuardExceeded";
    case ErrorCode::MissingKnots: return "MissingKnots";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::AllPointsCoincident: return "AllPointsCoincident";
    case ErrorCode::DegenerateKernel: return "DegenerateKernel";
    case ErrorCode::SingularCorrection: return "SingularCorrection";
    case ErrorCode::ConstantVector: return "ConstantVector";
    case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::SingularP: return "SingularP";
    case ErrorCode::PerfectFit: return "PerfectFit";
    case ErrorCode::NegativeResidualNorm: return "NegativeResidualNorm";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::SingularInnerMatrix: return "SingularInnerMatrix";
    case ErrorCode::LocalSingularity: return "LocalSingularity";
    case ErrorCode::NoValidBandwidth: return "NoValidBandwidth";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::InvalidKnotCount:
    case ErrorCode::NonPositiveRange:
    case ErrorCode::SizeGuardExceeded:
    case ErrorCode::MissingKnots:
    case ErrorCode::InsufficientData:
      return true;
    default:
      return false;
  }
}

}  // namespace msvc
