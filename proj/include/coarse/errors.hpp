#pragma once

#include <stdexcept>
#include <string>

namespace coarse {

// Base class of every failure the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller mistakes: bad arguments, mismatched spaces, violated preconditions,
// malformed input files. CLI maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed structured input; carries a JSON-pointer-style location.
class SchemaError : public UsageError {
 public:
  SchemaError(const std::string& pointer, const std::string& message)
      : UsageError(pointer + ": " + message), pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

// Numerical failures: non-convergence, PSD violations beyond tolerance,
// degenerate vectors, unreachable truncation targets. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace coarse
