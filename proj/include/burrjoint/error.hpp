#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace burrjoint {

enum class ErrorKind {
  InvalidParameter,
  InvalidSample,
  Unidentifiable,
  NonConvergence,
  SingularInformation,
  ImproperProposal,
  DegenerateWeights,
  FullyObserved,
  InfeasiblePrediction,
  PathExplosion,
  NumericalFailure,
  Io,
  Config,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidSample: return "invalid-sample";
    case ErrorKind::Unidentifiable: return "unidentifiable";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::SingularInformation: return "singular-information";
    case ErrorKind::ImproperProposal: return "improper-proposal";
    case ErrorKind::DegenerateWeights: return "degenerate-weights";
    case ErrorKind::FullyObserved: return "fully-observed";
    case ErrorKind::InfeasiblePrediction: return "infeasible-prediction";
    case ErrorKind::PathExplosion: return "path-explosion";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library. `kind()` lets callers route on the
/// category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Input problems (bad data, bad parameters, bad config) vs. numerical ones.
  bool is_input_error() const noexcept {
    switch (kind_) {
      case ErrorKind::InvalidParameter:
      case ErrorKind::InvalidSample:
      case ErrorKind::FullyObserved:
      case ErrorKind::InfeasiblePrediction:
      case ErrorKind::Io:
      case ErrorKind::Config:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace burrjoint
