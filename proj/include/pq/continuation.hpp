#pragma once

#include "pq/solver.hpp"

#include <optional>
#include <vector>

namespace pq {

/// eps_k = eps0 * ratio^k, k = 0 .. steps-1.
struct EpsilonSchedule {
  double eps0 = 0.2;
  double ratio = 0.5;
  int steps = 5;

  [[nodiscard]] std::vector<double> values() const;
  /// InvalidArgument for a malformed schedule; InvalidExponents unless
  /// (q + eps0)/p < 1 + 1/n.
  void validate(const Operator& op) const;
};

struct ContinuationConfig {
  NewtonConfig newton;
  /// Start from the p = 2 linear solve with the same b; otherwise from zero.
  bool linear_presolve = true;
  bool fixed_point_fallback = true;
  /// Interior distance for the local norms; defaults to 0.1 * min box width.
  std::optional<double> delta;
};

struct TrackedNorms {
  double lp_grad = 0.0;             // ||Du||_{L^p(Omega)}
  double linf_interior = 0.0;       // ||u||_{L^inf(Omega')}
  double linf_grad_interior = 0.0;  // ||Du||_{L^inf(Omega')}
  double h2_interior = 0.0;         // discrete ||D^2 u||_{L^2(Omega')}
};

TrackedNorms track_norms(const DiscreteField& U, double p, double delta);

struct ContinuationStep {
  double eps = 0.0;
  DiscreteField U;
  SolveStats stats;
  TrackedNorms norms;
  /// ||U_k - U_{k-1}||_{W^{1,2}}; for k = 0 measured against the initial guess.
  double increment = 0.0;
};

struct ContinuationTrace {
  MeshPtr mesh;
  double p = 2.0;
  double q = 2.0;
  double delta = 0.0;
  EpsilonSchedule schedule;
  DiscreteField initial;
  std::vector<ContinuationStep> steps;
  /// U_K + (U_K - U_{K-1}) eps_K / (eps_{K-1} - eps_K); empty until two steps exist.
  std::optional<DiscreteField> extrapolated;
  std::optional<TrackedNorms> extrapolated_norms;
};

/// Thrown when a step fails; carries every completed step.
class ContinuationError : public Error {
 public:
  ContinuationError(ErrorCode code, const std::string& message, ContinuationTrace partial)
      : Error(code, message), partial_(std::move(partial)) {}

  [[nodiscard]] const ContinuationTrace& partial() const noexcept { return partial_; }

 private:
  ContinuationTrace partial_;
};

/// Solves the regularized problems along the schedule, warm-starting each
/// step from the previous one and falling back to the fixed-point solver
/// when Newton does not converge.
ContinuationTrace continuation_solve(MeshPtr mesh, const OperatorPtr& op, const RhsFunction& b,
                                     const EpsilonSchedule& schedule,
                                     const ContinuationConfig& cfg = {});

/// Richardson-style extrapolation over the last two steps; recomputes the
/// extrapolated field and its norms in place.
void extrapolate(ContinuationTrace& trace);

}  // namespace pq
