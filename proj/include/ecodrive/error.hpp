#pragma once

#include <stdexcept>
#include <string>

namespace ecodrive {

enum class ErrorKind {
  Domain,              // argument outside the valid domain (e.g. position off track)
  InfeasibleSlice,     // frozen dynamics has no engine-on equilibrium
  InvalidSegment,      // acceleration vanishes inside a quadrature segment
  InfeasibleCandidate, // no upper speed reaches the target for this lower speed
  InfeasibleTarget,    // target speed at or above the engine-on equilibrium
  DivergenceRisk,      // perturbation ratio too large for the series
  InvalidProfile,      // speed profile function vanishes
  Numeric,             // non-finite intermediate value
  Parse,               // malformed input file
  Validation,          // well-formed input violating an invariant
  Io,
  NotApplicable,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ecodrive
