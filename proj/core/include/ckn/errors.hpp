#pragma once

#include <stdexcept>
#include <string>

namespace ckn {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Adaptive refinement exhausted its budget before reaching tolerance.
struct NonConvergent : Error {
  using Error::Error;
};

// Observed refinement behaviour contradicts the declared singularity order.
struct SingularityTooStrong : Error {
  using Error::Error;
};

// Parameter tuple falls outside the admissible window for the operation.
struct WindowViolation : Error {
  using Error::Error;
};

// Iterative solver hit its iteration cap without meeting the tolerance.
struct NotConverged : Error {
  using Error::Error;
};

// Solver iterate lost positivity beyond repair.
struct PositivityLost : Error {
  using Error::Error;
};

struct ZeroDenominator : Error {
  using Error::Error;
};

// Epsilon schedule violates one of its window constraints.
struct InvalidSchedule : Error {
  using Error::Error;
};

// Family fit exceeded its error threshold.
struct FitFailed : Error {
  using Error::Error;
};

// Function support extends beyond the resolvable grid.
struct UnsupportedSupport : Error {
  using Error::Error;
};

// Configuration document could not be parsed or validated.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace ckn
