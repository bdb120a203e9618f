#include "gkdv/error.hpp"

namespace gkdv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::BoundaryMismatch: return "BoundaryMismatch";
    case ErrorCode::DomainTooSmall: return "DomainTooSmall";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::BlowupDetected: return "BlowupDetected";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::OutsideTube: return "OutsideTube";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::JacobianSingular: return "JacobianSingular";
    case ErrorCode::GapTooLarge: return "GapTooLarge";
    case ErrorCode::WeightOverflow: return "WeightOverflow";
    case ErrorCode::NonPositiveData: return "NonPositiveData";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::TubeViolation: return "TubeViolation";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gkdv
