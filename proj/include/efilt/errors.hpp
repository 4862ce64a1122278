#pragma once

#include <stdexcept>
#include <string>

namespace efilt {

/// Malformed or out-of-domain configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A composite Hilbert space would exceed the configured dimension cap (exit code 3).
class DimensionError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A numerical invariant (isometry, idempotence, analytic bound) did not hold (exit code 4).
class NumericalCheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace efilt
