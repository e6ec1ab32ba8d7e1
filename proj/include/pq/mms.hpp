#pragma once

#include "pq/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pq {

/// Exact solution u* vanishing on the boundary of `domain`, with gradient and
/// (optionally) Hessian.
struct ExactSolution {
  std::string name;
  Box domain;
  ScalarFunction u;
  std::function<Vector(const Vector&)> du;
  std::function<Matrix(const Vector&)> hessian;  // may be empty
};

/// Built-in cases:
///   sine2d       sin(pi x) sin(pi y) on the unit square
///   quadratic1d  x (1 - x) on the unit interval
///   bubble2d     16 x(1-x) y(1-y) on the unit square
///   sine1d       sin(pi x) on the unit interval
/// Throws InvalidArgument for unknown names.
ExactSolution builtin_case(const std::string& name);
std::vector<std::string> builtin_case_names();

struct ManufacturedCase {
  ExactSolution exact;
  RhsFunction b;
  std::string provenance;  // "analytic" or "numeric-divergence"
};

/// b = sum_i d/dx_i a^i(x, u*, Du*). Analytic (chain rule through the flux
/// derivatives) when the operator has analytic derivatives and the case has a
/// Hessian; otherwise a centered divergence with step 1e-4 * box width.
/// Spot-checks Du*, boundary values and b at 16 probe points and throws
/// InconsistentExactData on failure.
ManufacturedCase make_manufactured(const OperatorPtr& op, const ExactSolution& exact);

/// Centered numeric divergence of x -> a(x, u*(x), Du*(x)) with step h.
double numeric_divergence(const Operator& op, const ExactSolution& exact, const Vector& x,
                          double h);

struct ConvergenceRow {
  int nodes = 0;  // per axis
  double h = 0.0;
  double l2_error = 0.0;
  double w12_error = 0.0;
  double l2_order = 0.0;  // NaN on the first row
  double w12_order = 0.0;
  double nodal_error = 0.0;  // max |U_i - u*(x_i)|
  int iterations = 0;
};

/// L^2 and W^{1,2} errors against u* with each element refined once for the
/// error quadrature. Observed order = log(e_{k-1}/e_k) / log(h_{k-1}/h_k).
/// Needs >= 3 strictly increasing grid sizes.
std::vector<ConvergenceRow> convergence_study(const OperatorPtr& op, const ManufacturedCase& mc,
                                              const std::vector<int>& grid_sizes,
                                              const NewtonConfig& cfg = {});

/// Errors of a discrete field against an exact solution.
struct FieldError {
  double l2 = 0.0;
  double w12 = 0.0;
  double nodal = 0.0;
};
FieldError field_error(const DiscreteField& U, const ExactSolution& exact);

}  // namespace pq
