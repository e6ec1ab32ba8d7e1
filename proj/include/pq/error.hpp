#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pq {

enum class ErrorCode {
  DimensionMismatch,
  DerivativeUnavailable,
  InvalidExponents,
  NonnegativityViolation,
  MeshError,
  QuadratureFailure,
  NonConvergence,
  SingularJacobian,
  Unsupported,
  InconsistentExactData,
  ConfigError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

inline void raise_if(bool condition, ErrorCode code, const std::string& message) {
  if (condition) raise(code, message);
}

}  // namespace pq
