#include "pq/continuation.hpp"

#include "log.hpp"

#include <cmath>

namespace pq {

std::vector<double> EpsilonSchedule::values() const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int k = 0; k < steps; ++k) v.push_back(eps0 * std::pow(ratio, k));
  return v;
}

void EpsilonSchedule::validate(const Operator& op) const {
  raise_if(!(eps0 > 0.0 && std::isfinite(eps0)), ErrorCode::InvalidArgument,
           "schedule eps0 must be positive");
  raise_if(!(ratio > 0.0 && ratio < 1.0), ErrorCode::InvalidArgument,
           "schedule ratio must lie in (0, 1)");
  raise_if(steps < 1, ErrorCode::InvalidArgument, "schedule needs at least one step");
  const double n = op.dim();
  raise_if(!((op.q() + eps0) / op.p() < 1.0 + 1.0 / n), ErrorCode::InvalidExponents,
           "schedule eps0 violates (q + eps0)/p < 1 + 1/n");
}

TrackedNorms track_norms(const DiscreteField& U, double p, double delta) {
  return {lp_gradient_norm(U, p), linf_interior(U, delta), linf_gradient_interior(U, delta),
          h2_seminorm_interior(U, delta)};
}

void extrapolate(ContinuationTrace& trace) {
  trace.extrapolated.reset();
  trace.extrapolated_norms.reset();
  const std::size_t K = trace.steps.size();
  if (K < 2) return;
  const auto& last = trace.steps[K - 1];
  const auto& prev = trace.steps[K - 2];
  const double factor = last.eps / (prev.eps - last.eps);
  const Eigen::VectorXd v = last.U.values() + factor * (last.U.values() - prev.U.values());
  trace.extrapolated = DiscreteField(trace.mesh, v);
  trace.extrapolated_norms = track_norms(*trace.extrapolated, trace.p, trace.delta);
}

ContinuationTrace continuation_solve(MeshPtr mesh, const OperatorPtr& op, const RhsFunction& b,
                                     const EpsilonSchedule& schedule,
                                     const ContinuationConfig& cfg) {
  raise_if(!mesh || !op, ErrorCode::InvalidArgument, "null mesh or operator");
  raise_if(op->dim() != mesh->dim(), ErrorCode::DimensionMismatch,
           "operator and mesh dimensions differ");
  schedule.validate(*op);
  cfg.newton.validate();

  ContinuationTrace trace{mesh, op->p(), op->q(), cfg.delta.value_or(0.1 * mesh->box().min_width()),
                          schedule, DiscreteField(mesh), {}, std::nullopt, std::nullopt};

  if (cfg.linear_presolve) {
    FamilyParams lin;
    lin.domain = op->domain();
    lin.p = 2.0;
    const OperatorPtr laplace = make_family(Family::PLaplacian, lin);
    trace.initial = newton_solve(*laplace, b, DiscreteField(mesh), cfg.newton).U;
  }

  DiscreteField current = trace.initial;
  for (double eps : schedule.values()) {
    const auto rop = regularize(op, eps, schedule.eps0);
    SolveResult result{current, {}};
    try {
      try {
        result = newton_solve(*rop, b, current, cfg.newton);
      } catch (const SolveError& e) {
        if (e.code() != ErrorCode::NonConvergence || !cfg.fixed_point_fallback) throw;
        detail::log().warn("eps={}: Newton failed ({}); trying fixed point", eps, e.what());
        result = fixed_point_solve(*rop, b, current, cfg.newton);
      }
    } catch (const Error& e) {
      extrapolate(trace);
      throw ContinuationError(e.code(),
                              "continuation failed at eps=" + std::to_string(eps) + ": " + e.what(),
                              trace);
    }

    ContinuationStep step{eps, result.U, result.stats, track_norms(result.U, trace.p, trace.delta),
                          0.0};
    step.increment =
        w12_norm(DiscreteField(mesh, Eigen::VectorXd(result.U.values() - current.values())));
    detail::log().info("eps={} iterations={} residual={:.3e} lp_grad={}", eps,
                       step.stats.iterations, step.stats.final_residual, step.norms.lp_grad);
    current = result.U;
    trace.steps.push_back(std::move(step));
  }
  extrapolate(trace);
  return trace;
}

}  // namespace pq
