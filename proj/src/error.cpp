#include "rangeshift/error.hpp"

namespace rangeshift {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::RateUndefined: return "RateUndefined";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::ManifoldMiss: return "ManifoldMiss";
    case ErrorKind::NoGroundStates: return "NoGroundStates";
    case ErrorKind::AmplitudeOutOfRange: return "AmplitudeOutOfRange";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::ThetaBelowCritical: return "ThetaBelowCritical";
    case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorKind::UndershootError: return "UndershootError";
    case ErrorKind::MissingReference: return "MissingReference";
    case ErrorKind::NonMonotoneOutcomes: return "NonMonotoneOutcomes";
    case ErrorKind::HorizonExhausted: return "HorizonExhausted";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::EndpointVanishes: return "EndpointVanishes";
    case ErrorKind::TailTooFat: return "TailTooFat";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Error";
}

}  // namespace rangeshift
