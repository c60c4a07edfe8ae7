#pragma once

#include <stdexcept>
#include <string>

namespace covrisk {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A matrix that was required to be positive definite is not (a pivot fell
// below the scaled tolerance).
class NotPositiveDefiniteError : public Error {
 public:
  explicit NotPositiveDefiniteError(const std::string& what) : Error(what) {}
};

// An argument is outside the mathematical domain of the function.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

// An iterative algorithm exhausted its iteration budget.
class NoConvergenceError : public Error {
 public:
  explicit NoConvergenceError(const std::string& what) : Error(what) {}
};

class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

// A rotation-equivariant estimator was evaluated without a spectral
// calibration for its (p, n).
class MissingCalibrationError : public Error {
 public:
  explicit MissingCalibrationError(const std::string& what) : Error(what) {}
};

// The requested closed form does not exist for this estimator/loss pair.
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(what) {}
};

// Malformed external input (matrix files, calibration files).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

}  // namespace covrisk
