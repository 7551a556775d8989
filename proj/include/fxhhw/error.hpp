#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace fxhhw {

// Error categories shared by the C++ surface and the C API status codes.
enum class ErrorKind {
  invalid_argument = 1,
  config = 2,
  model = 3,
  grid_degeneracy = 4,
  conditioning = 5,
  assembly = 6,
  instability = 7,
  range = 8,
  io = 9,
  krylov = 10,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorKind::invalid_argument, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct ModelError : Error {
  explicit ModelError(const std::string& w) : Error(ErrorKind::model, w) {}
};
struct GridDegeneracy : Error {
  explicit GridDegeneracy(const std::string& w) : Error(ErrorKind::grid_degeneracy, w) {}
};
struct AssemblyError : Error {
  explicit AssemblyError(const std::string& w) : Error(ErrorKind::assembly, w) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error(ErrorKind::range, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::io, w) {}
};

/// Dense collocation solve refused; carries the reciprocal-condition based estimate.
struct ConditioningError : Error {
  ConditioningError(const std::string& w, double condition)
      : Error(ErrorKind::conditioning, w), condition_estimate(condition) {}
  double condition_estimate;
};

/// Explicit integrator blew up; carries the growth factor that tripped the guard.
struct InstabilityError : Error {
  InstabilityError(const std::string& w, double growth)
      : Error(ErrorKind::instability, w), growth_factor(growth) {}
  double growth_factor;
};

/// Krylov approximation did not reach the requested tolerance.
struct KrylovError : Error {
  KrylovError(const std::string& w, double estimate)
      : Error(ErrorKind::krylov, w), error_estimate(estimate) {}
  double error_estimate;
};

// Non-fatal diagnostics (e.g. shape parameter close to the step size).
struct Warning {
  std::string code;
  std::string message;
};

using WarningHandler = std::function<void(const Warning&)>;

/// Installs a process-wide handler and returns the previous one. The default
/// handler discards warnings.
WarningHandler set_warning_handler(WarningHandler handler);
void emit_warning(const std::string& code, const std::string& message);

}  // namespace fxhhw
