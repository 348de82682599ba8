#include "qcdyn/error.hpp"

namespace qcdyn {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::OrbitEscape: return "OrbitEscape";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DerivativeVanished: return "DerivativeVanished";
    case ErrorKind::NotAnalytic: return "NotAnalytic";
    case ErrorKind::TooManyInvalidNodes: return "TooManyInvalidNodes";
    case ErrorKind::ExtrapolationNeeded: return "ExtrapolationNeeded";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::FitFailed: return "FitFailed";
    case ErrorKind::ControlViolated: return "ControlViolated";
    case ErrorKind::NeutralFixedPoint: return "NeutralFixedPoint";
    case ErrorKind::WrongClass: return "WrongClass";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateLeading: return "DegenerateLeading";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::ContinuityBreach: return "ContinuityBreach";
    case ErrorKind::NonCrossingViolated: return "NonCrossingViolated";
    case ErrorKind::BranchFailure: return "BranchFailure";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::ManifestMismatch: return "ManifestMismatch";
  }
  return "Error";
}

}  // namespace qcdyn
