#include "pq/error.hpp"

namespace pq {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DerivativeUnavailable: return "DerivativeUnavailable";
    case ErrorCode::InvalidExponents: return "InvalidExponents";
    case ErrorCode::NonnegativityViolation: return "NonnegativityViolation";
    case ErrorCode::MeshError: return "MeshError";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InconsistentExactData: return "InconsistentExactData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace pq
