#pragma once

#include <stdexcept>
#include <string>

namespace spreadlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: out-of-range parameters, mismatched dimensions, malformed
/// configuration. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable files, malformed file contents. Exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Not enough data for an estimator, or a fit that did not converge.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Operation called in a state where it is undefined (e.g. asking for the
/// quasi-exponential stretch exponent of a polynomial-phase point).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace spreadlab
