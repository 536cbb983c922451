#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

// Bad input or geometry. The CLI maps this to exit status 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A solver or estimator failed to produce a usable result (exit status 1).
struct NumericalError : std::runtime_error {
  NumericalError(const std::string& what, double last_residual = 0.0)
      : std::runtime_error(what), residual(last_residual) {}
  double residual;
};

}  // namespace fraclap
