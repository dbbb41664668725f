#pragma once

#include <stdexcept>
#include <string>

namespace resonant {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative method (Lanczos, Newton, GMRES, Arnoldi) did not converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A user-supplied function produced a non-finite value, or a trajectory
/// exceeded the blow-up guard.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A scenario file failed to parse or validate; the message starts with the
/// offending field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace resonant
