#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

// Error taxonomy. The CLI maps these onto process exit codes:
// precondition/config/io -> 2, numerical contract violations -> 3.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller handed us inputs outside an operation's contract.
struct PreconditionError : Error {
  using Error::Error;
};

// Bad experiment configuration (unknown experiment, missing constant, ...).
struct ConfigError : PreconditionError {
  using PreconditionError::PreconditionError;
};

struct IoError : Error {
  using Error::Error;
};

// A numerical postcondition failed to hold (feasibility residual, orthogonality, ...).
struct NumericsError : Error {
  using Error::Error;
};

// LP did not reach optimality within the iteration cap; carries the best bound seen.
struct SolverError : NumericsError {
  SolverError(const std::string& what, double bound)
      : NumericsError(what), best_bound(bound) {}
  double best_bound;
};

// A Grassmannian net failed its coverage audit (or a decomposition hit a hole);
// carries the achieved covering radius.
struct CoverageError : NumericsError {
  CoverageError(const std::string& what, double radius)
      : NumericsError(what), achieved_radius(radius) {}
  double achieved_radius;
};

}  // namespace gplab
