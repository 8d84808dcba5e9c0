#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace thermovi {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or malformed input (NaN/Inf components, mismatched dimensions).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or scheme parameters detected at construction.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A physical assumption failed at an evaluated point, e.g. T = dU/dS <= 0.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Numeric range failure such as exponential overflow.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A closed-form solution was requested outside the regime where it holds.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// The implicit step (or the initial constraint solve) did not converge.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, double residual,
              std::optional<long> step_index = std::nullopt)
      : Error(what), residual_(residual), step_index_(step_index) {}

  double residual() const { return residual_; }
  std::optional<long> step_index() const { return step_index_; }

 private:
  double residual_;
  std::optional<long> step_index_;
};

/// The regularity matrix is singular at the computed window.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (bad file, schema, or out-of-range values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Output file could not be opened or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermovi
