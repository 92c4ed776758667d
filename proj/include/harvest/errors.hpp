#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

enum class Status {
  Ok = 0,
  InvalidArgument,
  KindMismatch,
  InvalidIndex,
  UnsupportedOrder,
  UnsupportedMode,
  ToleranceNotMet,
  GapMismatch,
  Domain,
  InconsistentInput,
  TruncationFailure,
  UnstablePotential,
  StepSize,
  BelowNoise,
  IntegrableSingularity,
  Internal
};

const char* status_name(Status s);

class Error : public std::runtime_error {
 public:
  Error(Status code, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), code_(code), residual_(residual) {}

  Status code() const { return code_; }
  // Residual estimate for ToleranceNotMet / TruncationFailure, 0 otherwise.
  double residual() const { return residual_; }

 private:
  Status code_;
  double residual_;
};

[[noreturn]] inline void fail(Status code, const std::string& what, double residual = 0.0) {
  throw Error(code, what, residual);
}

}  // namespace harvest
