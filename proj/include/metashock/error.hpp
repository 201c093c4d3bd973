#pragma once

#include <stdexcept>
#include <string>

namespace metashock {

/// Failure categories surfaced by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidArgument,
  DirectionMismatch,
  OutOfRange,
  GapViolation,
  NoRoot,
  NoSignChange,
  NoCrossing,
  MultipleCrossings,
  NewtonDivergence,
  ExplicitCFLViolation,
  SingularPath,
  XiOutOfRange,
  NonSmoothProfile,
  ConvergenceFailure,
  UnsupportedConfiguration,
  DomainError,
  ThresholdNeverReached,
  QuadratureFailure,
  ConfigParse,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DirectionMismatch: return "DirectionMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::GapViolation: return "GapViolation";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::NoSignChange: return "NoSignChange";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::MultipleCrossings: return "MultipleCrossings";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::ExplicitCFLViolation: return "ExplicitCFLViolation";
    case ErrorKind::SingularPath: return "SingularPath";
    case ErrorKind::XiOutOfRange: return "XiOutOfRange";
    case ErrorKind::NonSmoothProfile: return "NonSmoothProfile";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::UnsupportedConfiguration: return "UnsupportedConfiguration";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ThresholdNeverReached: return "ThresholdNeverReached";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ConfigParse: return "ConfigParse";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown when Newton fails; carries the last residual for post-mortem.
class NewtonDivergence : public Error {
 public:
  NewtonDivergence(const std::string& what, double last_residual)
      : Error(ErrorKind::NewtonDivergence, what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Interface tracking failure with the number of crossings found.
class CrossingError : public Error {
 public:
  CrossingError(ErrorKind kind, const std::string& what, int count)
      : Error(kind, what), count_(count) {}

  int count() const noexcept { return count_; }

 private:
  int count_;
};

}  // namespace metashock
