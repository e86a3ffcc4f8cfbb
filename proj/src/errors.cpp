#include "ipsim/errors.hpp"

#include <sstream>

namespace ipsim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidDomain: return "InvalidDomain";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::SingularPair: return "SingularPair";
    case ErrorKind::SeparationFailure: return "SeparationFailure";
    case ErrorKind::UnknownSegment: return "UnknownSegment";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
    case ErrorKind::MassMismatch: return "MassMismatch";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::DegenerateHull: return "DegenerateHull";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

SimError::SimError(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

namespace {
std::string cfl_message(double max_speed, double dt, double h) {
  std::ostringstream os;
  os.precision(17);
  os << "dt * max|v| = " << dt * max_speed << " exceeds h = " << h << " (max speed " << max_speed
     << ", admissible dt " << (max_speed > 0 ? h / max_speed : dt) << ")";
  return os.str();
}
}  // namespace

CflViolationError::CflViolationError(double max_speed, double dt, double h)
    : SimError(ErrorKind::CflViolation, cfl_message(max_speed, dt, h)),
      max_speed_(max_speed),
      admissible_dt_(max_speed > 0 ? h / max_speed : dt) {}

}  // namespace ipsim
