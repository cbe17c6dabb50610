#pragma once

#include <stdexcept>
#include <string>

namespace dprime {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tangent vectors of a chart are (numerically) linearly dependent.
class SingularChartError : public Error {
 public:
  using Error::Error;
};

/// The layer half-width reaches the self-intersection regime (xi <= 0 or d >= rho).
class LayerWidthError : public Error {
 public:
  using Error::Error;
};

/// Bad argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A secular function has no sign change in the search bracket.
class NoRootError : public Error {
 public:
  using Error::Error;
};

/// More roots than the operation expects were found in the bracket.
class MultiplicityError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : Error(what + " (iterations: " + std::to_string(iterations) + ")"),
        iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// Invalid or malformed run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dprime
