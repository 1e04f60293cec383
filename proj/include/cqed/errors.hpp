#pragma once

#include <stdexcept>
#include <string>

namespace cqed {

// Exit status the CLI maps each error family to.
enum class ErrorKind {
  input = 2,       // bad arguments, schema violations, unreachable targets
  numerical = 3,   // integrator / fit non-convergence
  invariant = 4,   // internal invariant violated (trace, truncation, ...)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorKind::invariant, what) {}
};

// Step size collapsed below the floor or step budget exhausted.
class IntegratorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Population in the highest retained Fock level exceeded the threshold.
class TruncationError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

// Stochastic trajectory could not be continued; carries the offending seed.
class TrajectoryError : public NumericalError {
 public:
  TrajectoryError(const std::string& what, unsigned long long seed)
      : NumericalError(what + " (seed " + std::to_string(seed) + ")"), seed_(seed) {}
  unsigned long long seed() const noexcept { return seed_; }

 private:
  unsigned long long seed_;
};

}  // namespace cqed
