#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "heavytail/linalg.hpp"

namespace hte {

/// Argument outside the mathematical domain of an operation (u <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration; `key` names the offending entry when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Non-finite state produced by a time step.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive ODE integration gave up (step-size underflow, escape to infinity).
/// Carries the accepted part of the trajectory.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, std::vector<Vec> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<Vec>& partial_trajectory() const noexcept { return partial_; }

 private:
  std::vector<Vec> partial_;
};

/// A Monte Carlo estimate did not reach the requested precision in budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double estimate, double stderr_)
      : std::runtime_error(what), estimate_(estimate), stderr_(stderr_) {}
  double partial_estimate() const noexcept { return estimate_; }
  double partial_stderr() const noexcept { return stderr_; }

 private:
  double estimate_;
  double stderr_;
};

/// The theorem's hypothesis m(E) > 0 fails for the configured system.
class HypothesisViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Statistic is undefined for the given sample (e.g. every trial truncated).
class UndefinedResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hte
