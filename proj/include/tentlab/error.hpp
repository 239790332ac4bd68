#pragma once

#include <stdexcept>
#include <string>

namespace tentlab {

/// Argument outside the domain of an operation (x outside I, t outside (1,2], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Two objects that must share a shape (bin count, depth, slope) do not.
class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver stopped at maxiter with its residual above tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// The critical orbit is not eventually periodic at the probed depth.
class NotMarkovError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every entry of a truncated disk thread lies on I, so it cannot be told
/// apart from a point of the attractor at this depth.
class AllOnIntervalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files (config, cylinder specs). Carries the offending key
/// or line when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tentlab
