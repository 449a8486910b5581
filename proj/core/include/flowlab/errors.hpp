#pragma once

#include <stdexcept>
#include <string>

namespace flowlab {

// invalid configuration or parameter values; CLI maps this to exit code 2
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// numerical failure (non-convergence, overflow beyond threshold); CLI maps this to exit code 3
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergence : NumericalError {
  explicit NonConvergence(const std::string& what) : NumericalError(what) {}
};

} // namespace flowlab
