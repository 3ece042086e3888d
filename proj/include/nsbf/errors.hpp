#pragma once

#include <stdexcept>
#include <string>

namespace nsbf {

// Invalid user input: bad grid parameters, malformed expressions or config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical stage failed (non-convergence, vanishing solution, overflow).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsbf
