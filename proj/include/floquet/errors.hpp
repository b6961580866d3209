#pragma once

#include <stdexcept>

namespace floquet {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input or configuration (CLI exit code 2).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A principal-branch eigenphase sits within resonance_tol of pi, so the
/// Floquet exponent is not recoverable from U(T) alone (CLI exit code 3).
class BranchBoundaryError : public Error {
 public:
  using Error::Error;
};

/// The instantaneous spectrum degenerated along the evolution: a field zero
/// or a change of cluster multiplicities (CLI exit code 4).
class LevelCrossingError : public Error {
 public:
  using Error::Error;
};

/// A computed residual exceeded its tolerance (CLI exit code 1).
class ToleranceError : public Error {
 public:
  using Error::Error;
};

}  // namespace floquet
