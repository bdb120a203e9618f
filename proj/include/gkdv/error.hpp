#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gkdv {

enum class ErrorCode {
  LinearSolveFailure,
  BoundaryMismatch,
  DomainTooSmall,
  Overflow,
  BlowupDetected,
  NonFinite,
  OutOfRange,
  GridTooSmall,
  Singular,
  OutsideTube,
  NewtonDiverged,
  JacobianSingular,
  GapTooLarge,
  WeightOverflow,
  NonPositiveData,
  WindowTooSmall,
  BracketInvalid,
  TubeViolation,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace gkdv
