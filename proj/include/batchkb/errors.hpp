#pragma once

#include <stdexcept>

namespace batchkb {

// Invalid configuration or parameter values. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed data handed to an operation (dimension mismatch, out-of-domain
// point, ...). CLI maps this to exit code 1.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: broken factorization, non-positive pivot, variance
// below the round-off budget. CLI maps this to exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace batchkb
