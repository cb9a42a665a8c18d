#pragma once

#include <stdexcept>
#include <string>

namespace solhmc {

/// Raised when user-supplied parameters violate a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a computation produces non-finite values (integrator blow-up).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace solhmc
