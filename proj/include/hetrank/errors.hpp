#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

namespace hetrank {

// Bad argument values: non-finite inputs, empty datasets, invalid configs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input files whose layout does not match the expected columns.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the optimizer when the loss or a gradient stops being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, const std::string& what)
      : std::runtime_error("diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

namespace detail {

inline void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw InvalidArgument(std::string(name) + " must be finite");
  }
}

inline void require_finite(std::span<const double> xs, const char* name) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw InvalidArgument(std::string(name) + " contains a non-finite entry");
    }
  }
}

}  // namespace detail
}  // namespace hetrank
