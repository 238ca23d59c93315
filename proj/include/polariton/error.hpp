#pragma once

#include <stdexcept>
#include <string>

namespace polariton {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty sector, dimension overflow or a dense/local-dimension limit exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the admissible range (e.g. N > L for the Dicke block).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Basis and parameters describe different sectors.
class MismatchError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace polariton
