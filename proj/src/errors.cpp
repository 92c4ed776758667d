#include "harvest/errors.hpp"

namespace harvest {

const char* status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::InvalidArgument: return "invalid-argument";
    case Status::KindMismatch: return "kind-mismatch";
    case Status::InvalidIndex: return "invalid-index";
    case Status::UnsupportedOrder: return "unsupported-order";
    case Status::UnsupportedMode: return "unsupported-mode";
    case Status::ToleranceNotMet: return "tolerance-not-met";
    case Status::GapMismatch: return "gap-mismatch";
    case Status::Domain: return "domain";
    case Status::InconsistentInput: return "inconsistent-input";
    case Status::TruncationFailure: return "truncation-failure";
    case Status::UnstablePotential: return "unstable-potential";
    case Status::StepSize: return "step-size";
    case Status::BelowNoise: return "below-noise";
    case Status::IntegrableSingularity: return "integrable-singularity";
    case Status::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace harvest
