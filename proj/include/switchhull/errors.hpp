#pragma once

#include <stdexcept>
#include <string>

namespace switchhull {

/// Invalid input: dimension mismatch, bad configuration value, violated precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A resource guard (enumeration cap, dense-size cap, node cap) was hit.
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical solve did not reach its accuracy target.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An internal consistency check failed (e.g. a cutting-plane bound decreased).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace switchhull
