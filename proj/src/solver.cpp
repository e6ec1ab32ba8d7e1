#include "pq/solver.hpp"

#include "log.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace pq {

void NewtonConfig::validate() const {
  raise_if(!(abs_tol > 0.0 && rel_tol > 0.0), ErrorCode::InvalidArgument,
           "Newton tolerances must be positive");
  raise_if(max_iters < 1 || max_backtracks < 1 || fixed_point_max_iters < 1,
           ErrorCode::InvalidArgument, "iteration limits must be at least 1");
  raise_if(!(backtrack_factor > 0.0 && backtrack_factor < 1.0), ErrorCode::InvalidArgument,
           "backtrack factor must lie in (0, 1)");
}

namespace {

Eigen::VectorXd solve_linear(const SparseMatrix& A, const Eigen::VectorXd& rhs,
                             const DiscreteField& current, const SolveStats& stats) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw SolveError(ErrorCode::SingularJacobian, "sparse LU factorization failed: " + lu.lastErrorMessage(),
                     current, stats);
  }
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw SolveError(ErrorCode::SingularJacobian, "sparse LU solve failed", current, stats);
  }
  return x;
}

}  // namespace

SolveResult newton_solve(const Operator& op, const RhsFunction& b, const DiscreteField& U0,
                         const NewtonConfig& cfg) {
  cfg.validate();
  const Mesh& mesh = U0.mesh();
  SolveStats stats;
  stats.method = "newton";

  DiscreteField U = U0;
  Eigen::VectorXd R = assemble_residual(mesh, op, b, U);
  double norm = R.norm();
  stats.initial_residual = norm;
  stats.final_residual = norm;
  const double target = std::max(cfg.abs_tol, cfg.rel_tol * norm);

  while (norm > target) {
    if (stats.iterations >= cfg.max_iters) {
      throw SolveError(ErrorCode::NonConvergence,
                       "Newton reached " + std::to_string(cfg.max_iters) +
                           " iterations with residual " + std::to_string(norm),
                       U, stats);
    }
    const SparseMatrix J = assemble_jacobian(mesh, op, U);
    const Eigen::VectorXd step = solve_linear(J, -R, U, stats);
    const Eigen::VectorXd base = U.dofs();

    double lambda = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      DiscreteField trial = DiscreteField::from_dofs(U.mesh_ptr(), base + lambda * step);
      Eigen::VectorXd trial_R = assemble_residual(mesh, op, b, trial);
      const double trial_norm = trial_R.norm();
      if (trial_norm < norm) {
        U = std::move(trial);
        R = std::move(trial_R);
        norm = trial_norm;
        accepted = true;
        break;
      }
      lambda *= cfg.backtrack_factor;
      ++stats.backtracks;
    }
    ++stats.iterations;
    stats.final_residual = norm;
    if (!accepted) {
      throw SolveError(ErrorCode::NonConvergence,
                       "line search exhausted " + std::to_string(cfg.max_backtracks) +
                           " backtracks at residual " + std::to_string(norm),
                       U, stats);
    }
    detail::log().debug("newton it={} residual={:.3e} lambda={}", stats.iterations, norm, lambda);
  }
  return {std::move(U), stats};
}

SolveResult fixed_point_solve(const Operator& op, const RhsFunction& b, const DiscreteField& U0,
                              const NewtonConfig& cfg) {
  cfg.validate();
  const Mesh& mesh = U0.mesh();
  {
    const Vector probe = mesh.box().center();
    raise_if(!op.scalar_weight(probe, 0.0, Vector::Zero(op.dim())), ErrorCode::Unsupported,
             "fixed-point solver needs a flux of the form w(x,u,xi) xi");
  }

  SolveStats stats;
  stats.method = "fixed_point";
  const Eigen::VectorXd F = assemble_load(mesh, b);
  const double omega = 2.0 / op.q();

  DiscreteField U = U0;
  stats.initial_residual = assemble_residual(mesh, op, b, U).norm();
  while (true) {
    if (stats.iterations >= cfg.fixed_point_max_iters) {
      stats.final_residual = assemble_residual(mesh, op, b, U).norm();
      throw SolveError(ErrorCode::NonConvergence,
                       "fixed-point iteration reached " +
                           std::to_string(cfg.fixed_point_max_iters) + " iterations",
                       U, stats);
    }
    const SparseMatrix K = assemble_weighted_stiffness(mesh, op, U);
    const Eigen::VectorXd V = solve_linear(K, -F, U, stats);
    const Eigen::VectorXd current = U.dofs();
    DiscreteField next = DiscreteField::from_dofs(U.mesh_ptr(), current + omega * (V - current));
    DiscreteField diff = DiscreteField::from_dofs(U.mesh_ptr(), next.dofs() - current);
    stats.last_increment = w12_norm(diff);
    ++stats.iterations;
    U = std::move(next);
    if (stats.last_increment <= cfg.abs_tol) break;
  }
  stats.final_residual = assemble_residual(mesh, op, b, U).norm();
  return {std::move(U), stats};
}

}  // namespace pq
