#pragma once

#include <stdexcept>
#include <string>

namespace biconnect {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unresolvable vertex/edge ids, malformed graphs or cells.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// No joint Perron-Frobenius weight satisfies all eight balance equations.
class InconsistencyError : public Error {
 public:
  InconsistencyError(const std::string& what, double worst_residual)
      : Error(what), worst_residual_(worst_residual) {}
  double worst_residual() const noexcept { return worst_residual_; }

 private:
  double worst_residual_;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Graphs or layers of two objects that are supposed to line up do not.
class MismatchError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap (level, system dimension) would be exceeded.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// Malformed or semantically invalid input files.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace biconnect
