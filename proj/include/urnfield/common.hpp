#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace urnfield {

// Number of balls held by one urn.
using Load = std::int64_t;

// Invalid user-supplied configuration. `key()` names the offending setting
// (e.g. "policy.d") so front ends can report it.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key.empty() ? message : key + ": " + message),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Probability flux through the truncation boundary of the mean-field
// state space exceeded its budget.
class TruncationTooSmall : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Adaptive integrator could not meet its tolerance.
class StepFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& message, double residual)
      : NumericalError(message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class BracketFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace urnfield
