#pragma once

#include <stdexcept>
#include <string>

namespace blaschke {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: a point outside its admissible region, a malformed
/// sequence, a violated precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A rational denominator (or Cauchy kernel) vanishes at the evaluation point.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A refinement loop hit its cap without meeting the tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A post-condition check on a computed object failed (e.g. an interpolant
/// that does not reproduce its data, a model matrix that is not a contraction).
class NumericalBreakdown : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

}  // namespace blaschke
