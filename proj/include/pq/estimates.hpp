#pragma once

#include "pq/continuation.hpp"

#include <string>
#include <vector>

namespace pq {

/// Sobolev exponent p* = np/(n-p) for p < n. For p >= n any p* > q is
/// admissible; we take max(q + 1, 2p/(p-q+2) + 1) so that theta < p* holds.
double compute_pstar(int n, double p, double q);

/// 2p/((n+2)p - nq), so that alpha/p = 2/((n+2)p - nq). For n <= 2 and
/// q > p the formula is used outside its stated range (see alpha_extrapolated).
double compute_alpha(int n, double p, double q);
bool alpha_extrapolated(int n, double p, double q);

/// (1 + ||a(.,0,0)||_{p'} + ||b||_{(p*)'})^{p/(p-1)} by quadrature on the mesh.
double global_lp_rhs(const Mesh& mesh, const Operator& op, const RhsFunction& b, double p,
                     double pstar);

struct Balls {
  Vector center;
  double rho = 0.0;
  double R = 0.0;
};

/// Box center, rho = 0.25 and R = 0.4 times the smallest box width.
Balls default_balls(const Box& box);

/// c = (R-rho)^n ||Du||_{L^inf(B_rho)}^{p/alpha} / int_{B_R} (1+|Du|^2)^{p/2}.
double interior_gradient_constant(const DiscreteField& U, double p, double q, int n,
                                  const Balls& balls);

/// c = (R-rho)^2 |U|_{H^2(B_rho)}^2 / int_{B_R} (1+|Du|^2)^{q_eff/2}.
double second_derivative_constant(const DiscreteField& U, double q_eff, const Balls& balls);

struct UniformityResult {
  double ratio = 1.0;
  bool pass = true;
};

/// max_k / min_k of ||Du_k||_{L^p} over the trace steps.
UniformityResult check_uniform_lp(const ContinuationTrace& trace, double bound = 1.5);

struct EstimateConfig {
  std::optional<Balls> balls;
  double lp_ratio_bound = 1.5;
  double constant_variation_bound = 2.0;
};

struct EstimateRow {
  std::string label;  // "step" or "limit"
  double eps = 0.0;
  double lp_grad = 0.0;
  double bracket = 0.0;
  double ratio = 0.0;  // lp_grad / min over steps
  double c_gradient = 0.0;
  double c_hessian = 0.0;
  double alpha = 0.0;
  double pstar = 0.0;
};

struct EstimateReport {
  std::vector<EstimateRow> rows;  // one per step, then the extrapolated limit if present
  int n = 0;
  double p = 0.0;
  double q = 0.0;
  double pstar = 0.0;
  double delta = 0.0;
  Balls balls;
  bool alpha_extrapolated = false;
  UniformityResult lp_uniformity;
  double c_gradient_variation = 1.0;  // max/min over steps
  double c_hessian_variation = 1.0;
  bool constants_pass = true;

  [[nodiscard]] bool pass() const { return lp_uniformity.pass && constants_pass; }
};

/// Steps use q + eps_k in alpha and in the Hessian constant; the limit row uses q.
EstimateReport compute_estimates(const ContinuationTrace& trace, const Operator& op,
                                 const RhsFunction& b, const EstimateConfig& cfg = {});

/// max/min of a list of constants; 1 for an all-zero list, +inf when only the
/// minimum is zero.
double variation(const std::vector<double>& values);

}  // namespace pq
