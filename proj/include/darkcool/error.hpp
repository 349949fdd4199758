#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace darkcool {

/// Invalid or incomplete user input. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Base for failures of a numerical procedure. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonUniqueSteadyState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StiffnessFailure : public NumericalError {
 public:
  StiffnessFailure(const std::string& what, double t_reached)
      : NumericalError(what), t_reached_(t_reached) {}
  double t_reached() const noexcept { return t_reached_; }

 private:
  double t_reached_;
};

class GridError : public NumericalError {
 public:
  GridError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IntegratorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Non-fatal diagnostics (weak-probe validity, linear-response range) go through
// a process-wide sink; the default writes to stderr.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace darkcool
