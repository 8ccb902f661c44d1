#pragma once

#include <stdexcept>

namespace specga {

// Bad experiment or CLI configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing, malformed, or incompatible model file (exit code 3).
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numeric failure, e.g. an iterative oracle hitting its iteration cap
// (exit code 4).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace specga
