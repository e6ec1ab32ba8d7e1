#pragma once

#include "pq/assembly.hpp"
#include "pq/error.hpp"

#include <string>

namespace pq {

struct NewtonConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_iters = 100;
  int max_backtracks = 30;
  double backtrack_factor = 0.5;
  /// Iteration cap for the fixed-point fallback, which converges linearly.
  int fixed_point_max_iters = 2000;

  void validate() const;
};

struct SolveStats {
  std::string method;  // "newton" or "fixed_point"
  int iterations = 0;
  int backtracks = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  /// Fixed point only: last W^{1,2} difference between iterates.
  double last_increment = 0.0;
};

struct SolveResult {
  DiscreteField U;
  SolveStats stats;
};

/// NonConvergence or SingularJacobian with the best iterate seen so far.
class SolveError : public Error {
 public:
  SolveError(ErrorCode code, const std::string& message, DiscreteField best, SolveStats stats)
      : Error(code, message), best_(std::move(best)), stats_(std::move(stats)) {}

  [[nodiscard]] const DiscreteField& best() const noexcept { return best_; }
  [[nodiscard]] const SolveStats& stats() const noexcept { return stats_; }

 private:
  DiscreteField best_;
  SolveStats stats_;
};

/// Damped Newton with a direct sparse LU. A step is halved until the residual
/// 2-norm decreases; converged when it is <= max(abs_tol, rel_tol * |R(U0)|).
/// The mesh is that of U0.
SolveResult newton_solve(const Operator& op, const RhsFunction& b, const DiscreteField& U0,
                         const NewtonConfig& cfg = {});

/// Lagged-coefficient (Kacanov) iteration for a = w(x,u,xi) xi:
///   K(w(U_n)) V = -F,  U_{n+1} = U_n + omega (V - U_n),  omega = 2 / q.
/// Stops when ||U_{n+1} - U_n||_{W^{1,2}} <= abs_tol. Throws Unsupported for
/// fluxes without a scalar weight.
SolveResult fixed_point_solve(const Operator& op, const RhsFunction& b, const DiscreteField& U0,
                              const NewtonConfig& cfg = {});

}  // namespace pq
