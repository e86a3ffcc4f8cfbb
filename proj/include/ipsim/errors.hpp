#pragma once

#include <stdexcept>
#include <string>

namespace ipsim {

enum class ErrorKind {
  InvalidArgument,
  InvalidDomain,
  NonConvergence,
  CflViolation,
  SingularPair,
  SeparationFailure,
  UnknownSegment,
  UnknownScenario,
  MassMismatch,
  GridMismatch,
  DegenerateHull,
  ConfigError,
};

const char* to_string(ErrorKind kind);

class SimError : public std::runtime_error {
 public:
  SimError(ErrorKind kind, const std::string& message);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the macroscopic step when dt * max|v| exceeds the cell size.
class CflViolationError : public SimError {
 public:
  CflViolationError(double max_speed, double dt, double h);
  double max_speed() const noexcept { return max_speed_; }
  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double max_speed_;
  double admissible_dt_;
};

}  // namespace ipsim
