#include "pq/error.hpp"
#include "pq/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pq {

double compute_pstar(int n, double p, double q) {
  raise_if(n < 1, ErrorCode::InvalidArgument, "dimension must be positive");
  raise_if(!(p >= 2.0 && q >= p), ErrorCode::InvalidExponents, "need 2 <= p <= q");
  raise_if(!(q / p < 1.0 + 1.0 / n), ErrorCode::InvalidExponents, "need q/p < 1 + 1/n");
  if (p < n) return n * p / (n - p);
  const double denom = p - q + 2.0;
  raise_if(!(denom > 0.0), ErrorCode::InvalidExponents, "need p - q + 2 > 0");
  return std::max(q + 1.0, 2.0 * p / denom + 1.0);
}

double compute_alpha(int n, double p, double q) {
  raise_if(n < 1, ErrorCode::InvalidArgument, "dimension must be positive");
  const double denom = (n + 2.0) * p - n * q;
  raise_if(!(denom > 0.0), ErrorCode::InvalidExponents, "need (n+2)p - nq > 0");
  return 2.0 * p / denom;
}

bool alpha_extrapolated(int n, double p, double q) { return n <= 2 && q > p; }

double global_lp_rhs(const Mesh& mesh, const Operator& op, const RhsFunction& b, double p,
                     double pstar) {
  raise_if(!(p > 1.0 && pstar > 1.0), ErrorCode::InvalidExponents, "need p, p* > 1");
  const double p_conj = p / (p - 1.0);
  const double pstar_conj = pstar / (pstar - 1.0);
  const Vector zero = Vector::Zero(mesh.dim());
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementQuadrature quad = element_quadrature(mesh, e);
    for (int k = 0; k < quad.count; ++k) {
      const double a0 = op.flux(quad.points[k], 0.0, zero).norm();
      const double bk = b ? std::abs(b(quad.points[k])) : 0.0;
      raise_if(!std::isfinite(a0) || !std::isfinite(bk), ErrorCode::QuadratureFailure,
               "non-finite integrand in the L^p bracket");
      sum_a += quad.weights[k] * std::pow(a0, p_conj);
      sum_b += quad.weights[k] * std::pow(bk, pstar_conj);
    }
  }
  const double bracket = 1.0 + std::pow(sum_a, 1.0 / p_conj) + std::pow(sum_b, 1.0 / pstar_conj);
  return std::pow(bracket, p / (p - 1.0));
}

Balls default_balls(const Box& box) {
  const double w = box.min_width();
  return {box.center(), 0.25 * w, 0.4 * w};
}

namespace {

void require_balls(const Balls& balls) {
  raise_if(!(balls.rho > 0.0 && balls.rho < balls.R), ErrorCode::InvalidArgument,
           "need 0 < rho < R");
}

}  // namespace

double interior_gradient_constant(const DiscreteField& U, double p, double q, int n,
                                  const Balls& balls) {
  require_balls(balls);
  const double alpha = compute_alpha(n, p, q);
  const double lhs = linf_gradient_ball(U, balls.center, balls.rho);
  const double integral = energy_integral_ball(U, p, balls.center, balls.R);
  return std::pow(balls.R - balls.rho, n) * std::pow(lhs, p / alpha) / integral;
}

double second_derivative_constant(const DiscreteField& U, double q_eff, const Balls& balls) {
  require_balls(balls);
  const double h2 = h2_seminorm_ball(U, balls.center, balls.rho);
  const double integral = energy_integral_ball(U, q_eff, balls.center, balls.R);
  const double gap = balls.R - balls.rho;
  return gap * gap * h2 * h2 / integral;
}

double variation(const std::vector<double>& values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi == 0.0) return 1.0;
  if (*lo == 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

UniformityResult check_uniform_lp(const ContinuationTrace& trace, double bound) {
  raise_if(trace.steps.size() < 2, ErrorCode::InvalidArgument,
           "uniformity check needs at least two steps");
  std::vector<double> norms;
  for (const auto& s : trace.steps) norms.push_back(s.norms.lp_grad);
  UniformityResult r;
  r.ratio = variation(norms);
  r.pass = r.ratio <= bound;
  return r;
}

EstimateReport compute_estimates(const ContinuationTrace& trace, const Operator& op,
                                 const RhsFunction& b, const EstimateConfig& cfg) {
  raise_if(trace.steps.empty(), ErrorCode::InvalidArgument, "trace has no steps");
  const Mesh& mesh = *trace.mesh;
  EstimateReport rep;
  rep.n = mesh.dim();
  rep.p = trace.p;
  rep.q = trace.q;
  rep.pstar = compute_pstar(rep.n, rep.p, rep.q);
  rep.delta = trace.delta;
  rep.balls = cfg.balls.value_or(default_balls(mesh.box()));
  rep.alpha_extrapolated = alpha_extrapolated(rep.n, rep.p, rep.q);

  const double bracket = global_lp_rhs(mesh, op, b, rep.p, rep.pstar);
  double min_lp = std::numeric_limits<double>::infinity();
  for (const auto& s : trace.steps) min_lp = std::min(min_lp, s.norms.lp_grad);

  auto make_row = [&](std::string label, double eps, const DiscreteField& U, double lp) {
    const double q_eff = rep.q + eps;
    EstimateRow row;
    row.label = std::move(label);
    row.eps = eps;
    row.lp_grad = lp;
    row.bracket = bracket;
    row.ratio = min_lp > 0.0 ? lp / min_lp : 1.0;
    row.alpha = compute_alpha(rep.n, rep.p, q_eff);
    row.pstar = rep.pstar;
    row.c_gradient = interior_gradient_constant(U, rep.p, q_eff, rep.n, rep.balls);
    row.c_hessian = second_derivative_constant(U, q_eff, rep.balls);
    return row;
  };

  std::vector<double> cg;
  std::vector<double> ch;
  for (const auto& s : trace.steps) {
    rep.rows.push_back(make_row("step", s.eps, s.U, s.norms.lp_grad));
    cg.push_back(rep.rows.back().c_gradient);
    ch.push_back(rep.rows.back().c_hessian);
  }
  if (trace.extrapolated) {
    rep.rows.push_back(make_row("limit", 0.0, *trace.extrapolated,
                                lp_gradient_norm(*trace.extrapolated, rep.p)));
  }

  if (trace.steps.size() >= 2) {
    rep.lp_uniformity = check_uniform_lp(trace, cfg.lp_ratio_bound);
  }
  rep.c_gradient_variation = variation(cg);
  rep.c_hessian_variation = variation(ch);
  const auto finite = [](double v) { return std::isfinite(v); };
  rep.constants_pass = std::all_of(cg.begin(), cg.end(), finite) &&
                       std::all_of(ch.begin(), ch.end(), finite) &&
                       rep.c_gradient_variation <= cfg.constant_variation_bound &&
                       rep.c_hessian_variation <= cfg.constant_variation_bound;
  return rep;
}

}  // namespace pq
