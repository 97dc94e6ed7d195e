#pragma once

#include <stdexcept>
#include <string>

namespace wanova {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Numeric condition classifier could not decide convergent vs divergent
// at the largest truncation radius.
class ClassificationInconclusive : public Error {
 public:
  using Error::Error;
};

// Successive truncations of an improper integral failed to converge.
class DivergenceDetected : public Error {
 public:
  using Error::Error;
};

// An operation requiring the weak/strong weight-function condition was
// invoked on a pair that does not satisfy it.
class ConditionViolated : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class MaxDepthExceeded : public Error {
 public:
  using Error::Error;
};

// An integrand returned NaN or infinity at a quadrature node or sample point.
class NonFiniteSample : public Error {
 public:
  using Error::Error;
};

// eta_dx has a jump at x == y; the value there is not defined.
class UndefinedAtKink : public Error {
 public:
  using Error::Error;
};

class InvalidVector : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class MonotonicityViolated : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class EigenSolveFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace wanova
