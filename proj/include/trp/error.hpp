#ifndef TRP_ERROR_HPP
#define TRP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace trp {

/// Failure categories raised by the library. The harness maps these onto
/// process exit codes.
enum class ErrorKind {
  NotHermitian,
  NotUnitary,
  Infeasible,
  DegenerateA,
  DivisorUndefined,
  DriftAlarm,
  StepUnderflow,
  NoReturn,
  ConsistencyFailure,
  LoopThroughPole,
  InputError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::DegenerateA: return "DegenerateA";
    case ErrorKind::DivisorUndefined: return "DivisorUndefined";
    case ErrorKind::DriftAlarm: return "DriftAlarm";
    case ErrorKind::StepUnderflow: return "StepUnderflow";
    case ErrorKind::NoReturn: return "NoReturn";
    case ErrorKind::ConsistencyFailure: return "ConsistencyFailure";
    case ErrorKind::LoopThroughPole: return "LoopThroughPole";
    case ErrorKind::InputError: return "InputError";
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

/// Raised by the moment-map solver; carries the best residual it reached.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double best_residual)
      : Error(ErrorKind::Infeasible, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace trp

#endif  // TRP_ERROR_HPP
