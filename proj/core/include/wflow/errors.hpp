#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace wflow {

/// Invalid grid, stencil, model or generator configuration.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke a documented precondition (e.g. passed a non-normalized field).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of an oracle (gamma <= 0, t <= 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested feature is outside what the implementation supports.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values appeared during time stepping.
class NumericalInstability : public std::runtime_error {
 public:
  NumericalInstability(const std::string& what, double t, double dt, std::string term)
      : std::runtime_error(what), t_(t), dt_(dt), term_(std::move(term)) {}

  double time() const noexcept { return t_; }
  double step() const noexcept { return dt_; }
  const std::string& term() const noexcept { return term_; }

 private:
  double t_;
  double dt_;
  std::string term_;
};

using WarningHandler = std::function<void(const std::string&)>;

// Warnings go to stderr unless a handler is installed.
void warn(const std::string& message);
WarningHandler set_warning_handler(WarningHandler handler);

/// Installs a handler for the lifetime of the guard, restoring the previous one on exit.
class ScopedWarningHandler {
 public:
  explicit ScopedWarningHandler(WarningHandler handler)
      : previous_(set_warning_handler(std::move(handler))) {}
  ~ScopedWarningHandler() { set_warning_handler(std::move(previous_)); }
  ScopedWarningHandler(const ScopedWarningHandler&) = delete;
  ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace wflow
