#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcdyn {

enum class ErrorKind {
  Domain,
  OrbitEscape,
  NoConvergence,
  DerivativeVanished,
  NotAnalytic,
  TooManyInvalidNodes,
  ExtrapolationNeeded,
  DegenerateInput,
  OutOfRange,
  FitFailed,
  ControlViolated,
  NeutralFixedPoint,
  WrongClass,
  GridMismatch,
  DegenerateLeading,
  BranchAmbiguity,
  ContinuityBreach,
  NonCrossingViolated,
  BranchFailure,
  Config,
  Io,
  ManifestMismatch,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (the CLI,
// the Python layer) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qcdyn
