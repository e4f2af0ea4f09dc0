#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rangeshift {

enum class ErrorKind {
  DomainError,
  InvalidArgument,
  RateUndefined,
  StepFailure,
  ManifoldMiss,
  NoGroundStates,
  AmplitudeOutOfRange,
  BracketFailure,
  WindowTooShort,
  ThetaBelowCritical,
  MonotonicityViolation,
  UndershootError,
  MissingReference,
  NonMonotoneOutcomes,
  HorizonExhausted,
  AllZero,
  EndpointVanishes,
  TailTooFat,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rangeshift
