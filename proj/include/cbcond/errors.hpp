#pragma once

#include <stdexcept>
#include <string>

namespace cbcond {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unsupported input (bad JSON, invalid parameters, rejected
// mechanisms). The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A valid object was asked for something that does not exist for it,
// e.g. a QSD of a critical process or V_inf when the x log x test fails.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature, root finding or transform inversion failed to converge, or
// a condition could not be decided numerically.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A Monte Carlo guard tripped (acceptance rate, effective sample size,
// unabsorbed paths).
class EstimatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbcond
