#include "pq/error.hpp"
#include "pq/parallel.hpp"
#include "pq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluates f on samples[begin, end) in parallel and returns per-sample values
// in index order. NaN is mapped to -inf so that it always fails a check.
template <class F>
std::vector<double> evaluate(const std::vector<Sample>& samples, std::size_t begin,
                             std::size_t end, F&& f) {
  std::vector<double> values(end - begin);
  parallel_for(values.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const double v = f(samples[begin + k]);
      values[k] = std::isnan(v) ? -kInf : v;
    }
  });
  return values;
}

// Lowest index wins ties.
std::size_t argmin(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return best;
}

std::size_t argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

template <class F>
ReportEntry min_margin_entry(std::string id, const std::vector<Sample>& samples, double tolerance,
                             F&& margin) {
  const auto values = evaluate(samples, 0, samples.size(), margin);
  const std::size_t k = argmin(values);
  ReportEntry e;
  e.id = std::move(id);
  e.worst_margin = values[k];
  e.witness = samples[k];
  e.pass = values[k] >= -tolerance;
  return e;
}

double weight(double r, double exponent) { return std::pow(1.0 + r, exponent); }

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double lhs_pairing(const Operator& op, const Sample& s) { return op.flux(s.x, s.u, s.xi).dot(s.xi); }

double flux_at_zero_norm(const Operator& op, const Vector& x) {
  const Vector zero = Vector::Zero(op.dim());
  return op.flux(x, 0.0, zero).norm();
}

}  // namespace

// --- Per-sample margins -----------------------------------------------------

double ellipticity_margin(const Operator& op, const Sample& s) {
  const auto& c = op.constants();
  const Matrix J = op.dflux_dxi(s.x, s.u, s.xi);
  return s.lambda.dot(J * s.lambda) - c.m * weight(s.xi.squaredNorm(), 0.5 * (c.p - 2.0));
}

double growth_xi_margin(const Operator& op, const Sample& s) {
  const auto& c = op.constants();
  const double bound = c.M * weight(s.xi.squaredNorm(), 0.5 * (c.q - 2.0)) +
                       c.M * std::pow(std::abs(s.u), c.growth_alpha);
  return bound - max_abs(op.dflux_dxi(s.x, s.u, s.xi));
}

double growth_u_margin(const Operator& op, const Sample& s, double u_floor) {
  const auto& c = op.constants();
  if (c.beta < 1.0 && std::abs(s.u) < u_floor) return kInf;
  const double bound = c.M * weight(s.xi.squaredNorm(), 0.25 * (c.p + c.q - 4.0)) +
                       c.M * std::pow(std::abs(s.u), c.beta - 1.0);
  return bound - max_abs(op.dflux_du(s.x, s.u, s.xi));
}

double monotonicity_margin(const Operator& op, const Sample& s) {
  const auto& c = op.constants();
  const Vector diff = s.xi - s.eta;
  if (diff.squaredNorm() == 0.0) return kInf;
  const double lhs = (op.flux(s.x, s.u, s.xi) - op.flux(s.x, s.u, s.eta)).dot(diff);
  const Vector mid = 0.5 * (s.xi + s.eta);
  return lhs - c.m * weight(mid.squaredNorm(), 0.5 * (c.p - 2.0)) * diff.squaredNorm();
}

// --- Checks -----------------------------------------------------------------

ReportEntry check_ellipticity(const Operator& op, const SampleConfig& cfg) {
  const auto samples = draw_samples(op.domain(), cfg);
  return min_margin_entry("ellipticity", samples, cfg.tolerance,
                          [&](const Sample& s) { return ellipticity_margin(op, s); });
}

ReportEntry check_growth_xi(const Operator& op, const SampleConfig& cfg) {
  const auto samples = draw_samples(op.domain(), cfg);
  return min_margin_entry("growth_xi", samples, cfg.tolerance,
                          [&](const Sample& s) { return growth_xi_margin(op, s); });
}

ReportEntry check_growth_u(const Operator& op, const SampleConfig& cfg) {
  const auto samples = draw_samples(op.domain(), cfg);
  ReportEntry e = min_margin_entry("growth_u", samples, cfg.tolerance, [&](const Sample& s) {
    return growth_u_margin(op, s, cfg.u_floor);
  });
  if (op.constants().beta < 1.0) {
    e.note = "beta < 1: samples with |u| < u_floor skipped";
    e.fitted["u_floor"] = cfg.u_floor;
  }
  return e;
}

ReportEntry check_monotonicity(const Operator& op, const SampleConfig& cfg) {
  const auto samples = draw_samples(op.domain(), cfg);
  return min_margin_entry("monotonicity", samples, cfg.tolerance,
                          [&](const Sample& s) { return monotonicity_margin(op, s); });
}

ReportEntry check_local_conditions(const Operator& op, double L, const Box& subdomain,
                                   const SampleConfig& cfg, std::optional<double> declared_ML) {
  raise_if(!(L > 0.0), ErrorCode::InvalidArgument, "L must be positive");
  raise_if(subdomain.dim() != op.dim(), ErrorCode::DimensionMismatch,
           "subdomain dimension differs from operator dimension");
  raise_if(!op.domain().strictly_contains(subdomain), ErrorCode::InvalidArgument,
           "subdomain must lie strictly inside the domain");

  const Box& box = op.domain();
  auto samples = draw_samples(box, cfg);
  for (auto& s : samples) {
    for (int a = 0; a < op.dim(); ++a) {
      s.x[a] = subdomain.lo[a] + (s.x[a] - box.lo[a]) / box.width(a) * subdomain.width(a);
    }
    s.u *= L / cfg.u_radius;
  }

  const auto& c = op.constants();
  struct Parts {
    double anti, anti_w, dx, dx_w;
  };
  auto parts = [&](const Sample& s) {
    const double r = s.xi.squaredNorm();
    const Matrix J = op.dflux_dxi(s.x, s.u, s.xi);
    double dx = 0.0;
    for (int a = 0; a < op.dim(); ++a) dx = std::max(dx, max_abs(op.dflux_dx(s.x, s.u, s.xi, a)));
    return Parts{max_abs(J - J.transpose()), weight(r, 0.25 * (c.p + c.q - 4.0)), dx,
                 weight(r, 0.25 * (c.p + c.q - 2.0))};
  };

  const auto ratios = evaluate(samples, 0, samples.size(), [&](const Sample& s) {
    const Parts pt = parts(s);
    return std::max(pt.anti / pt.anti_w, pt.dx / pt.dx_w);
  });
  const double fitted = ratios[argmax(ratios)];
  const double ML = declared_ML.value_or(fitted);

  ReportEntry e = min_margin_entry("local_conditions", samples, cfg.tolerance, [&](const Sample& s) {
    const Parts pt = parts(s);
    return std::min(ML * pt.anti_w - pt.anti, ML * pt.dx_w - pt.dx);
  });
  e.fitted["M_L"] = fitted;
  e.fitted["L"] = L;
  if (declared_ML) {
    e.fitted["M_L_declared"] = *declared_ML;
  } else {
    e.pass = std::isfinite(fitted);
    e.note = "no declared M(L): margin taken against the fitted value";
  }
  return e;
}

double coercivity_theta(double p, double q, double beta) {
  return std::max(2.0 * p / (p - q + 2.0), beta * p / (p - 1.0));
}

double coercivity_b1(const Operator& op, const Vector& x) {
  const double p = op.p();
  return 1.0 + std::pow(flux_at_zero_norm(op, x), p / (p - 1.0));
}

CoercivityResult check_coercivity_lower(const Operator& op, const SampleConfig& cfg,
                                        double c1_floor) {
  const auto& c = op.constants();
  const double theta = coercivity_theta(c.p, c.q, c.beta);
  const auto samples = draw_samples(op.domain(), cfg);

  // residual(c1) = c1 |xi|^p - b1 - (a, xi) = c1 * P - Q
  std::vector<double> P(samples.size());
  std::vector<double> Q(samples.size());
  parallel_for(samples.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      const Sample& s = samples[k];
      P[k] = std::pow(s.xi.norm(), c.p);
      Q[k] = coercivity_b1(op, s.x) + lhs_pairing(op, s);
    }
  });
  auto feasible_without_u = [&](double c1) {
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (!(c1 * P[k] - Q[k] <= cfg.tolerance)) return false;
    }
    return true;
  };

  double c1 = c.m;
  if (!feasible_without_u(c1)) {
    double lo = 0.0;
    double hi = c.m;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible_without_u(mid) ? lo : hi) = mid;
    }
    c1 = std::max(lo, c1_floor);
  }

  // Whatever c1 leaves uncovered is charged to c2 |u|^theta.
  double c2 = 0.0;
  bool uncovered_at_zero_u = false;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double residual = c1 * P[k] - Q[k];
    if (residual <= cfg.tolerance) continue;
    const double ut = std::pow(std::abs(samples[k].u), theta);
    if (ut == 0.0) {
      uncovered_at_zero_u = true;
    } else {
      c2 = std::max(c2, residual / ut);
    }
  }

  const auto margins = evaluate(samples, 0, samples.size(), [&](const Sample& s) {
    return lhs_pairing(op, s) - c1 * std::pow(s.xi.norm(), c.p) +
           c2 * std::pow(std::abs(s.u), theta) + coercivity_b1(op, s.x);
  });
  const std::size_t k = argmin(margins);

  CoercivityResult result;
  result.constants = {c1, c2, theta};
  ReportEntry& e = result.entry;
  e.id = "coercivity_lower";
  e.worst_margin = margins[k];
  e.witness = samples[k];
  e.pass = !uncovered_at_zero_u && c1 >= c1_floor && std::isfinite(c2) &&
           e.worst_margin >= -cfg.tolerance;
  e.fitted = {{"c1", c1}, {"c2", c2}, {"theta", theta}, {"b1_at_witness", coercivity_b1(op, samples[k].x)}};
  return result;
}

namespace {

// Fits the smallest constant K with ratio(s) <= K over the samples and checks
// that doubling the sample count at most doubles it.
template <class Ratio, class Margin>
ReportEntry stable_fit_entry(std::string id, std::string constant_name, const Operator& op,
                             const SampleConfig& cfg, Ratio&& ratio, Margin&& margin) {
  SampleConfig doubled = cfg;
  doubled.count = 2 * cfg.count;
  const auto small = draw_samples(op.domain(), cfg);
  const auto large = draw_samples(op.domain(), doubled);

  auto fit = [&](const std::vector<Sample>& samples) {
    const auto values = evaluate(samples, 0, samples.size(), ratio);
    return std::max(0.0, values[argmax(values)]);
  };
  const double k_small = fit(small);
  const double k_large = fit(large);

  ReportEntry e = min_margin_entry(std::move(id), large, cfg.tolerance,
                                   [&](const Sample& s) { return margin(s, k_large); });
  e.fitted[constant_name] = k_large;
  e.fitted[constant_name + "_half_samples"] = k_small;
  e.pass = std::isfinite(k_large) && k_large <= 2.0 * k_small && e.worst_margin >= -cfg.tolerance;
  return e;
}

}  // namespace

ReportEntry check_lemma_lower_bound(const Operator& op, const SampleConfig& cfg) {
  const double q = op.q();
  auto bracket = [&](const Sample& s) {
    return std::pow(s.xi.norm(), q) + std::pow(std::abs(s.u), q) +
           std::pow(flux_at_zero_norm(op, s.x), q / (q - 1.0)) + 1.0;
  };
  return stable_fit_entry(
      "lemma_lower_bound", "c", op, cfg,
      [&](const Sample& s) { return -lhs_pairing(op, s) / bracket(s); },
      [&](const Sample& s, double c) { return lhs_pairing(op, s) + c * bracket(s); });
}

ReportEntry check_regularized_growth(const RegularizedOperator& rop, const SampleConfig& cfg) {
  const double e = rop.q() - 1.0;  // q + eps - 1
  auto bracket = [&](const Sample& s) {
    return std::pow(s.xi.norm(), e) + std::pow(std::abs(s.u), e) + coercivity_b1(rop, s.x);
  };
  auto size = [&](const Sample& s) { return rop.flux(s.x, s.u, s.xi).norm(); };
  ReportEntry entry = stable_fit_entry(
      "regularized_growth", "M", rop, cfg, [&](const Sample& s) { return size(s) / bracket(s); },
      [&](const Sample& s, double M) { return M * bracket(s) - size(s); });
  entry.fitted["eps"] = rop.eps();
  return entry;
}

ReportEntry check_derivative_consistency(const Operator& op, const SampleConfig& cfg) {
  const auto samples = draw_samples(op.domain(), cfg);
  const std::size_t begin = static_cast<std::size_t>(structured_sample_count(op.dim()));
  const std::size_t end = begin + static_cast<std::size_t>(cfg.count);

  auto rel = [](double diff, double scale) { return diff / std::max(1.0, scale); };
  const auto errors = evaluate(samples, begin, end, [&](const Sample& s) {
    const Matrix J = op.dflux_dxi(s.x, s.u, s.xi);
    double err = rel(max_abs(J - op.fd_dflux_dxi(s.x, s.u, s.xi)), max_abs(J));
    const Vector du = op.dflux_du(s.x, s.u, s.xi);
    err = std::max(err, rel(max_abs(du - op.fd_dflux_du(s.x, s.u, s.xi)), max_abs(du)));
    for (int a = 0; a < op.dim(); ++a) {
      const Vector dx = op.dflux_dx(s.x, s.u, s.xi, a);
      err = std::max(err, rel(max_abs(dx - op.fd_dflux_dx(s.x, s.u, s.xi, a)), max_abs(dx)));
    }
    // evaluate() maps NaN to -inf; keep NaN errors failing.
    return std::isnan(err) ? kInf : err;
  });
  const std::size_t k = argmax(errors);

  ReportEntry e;
  e.id = "derivative_consistency";
  e.worst_margin = kDerivativeTolerance - errors[k];
  e.witness = samples[begin + k];
  e.pass = errors[k] <= kDerivativeTolerance;
  e.fitted["max_relative_error"] = errors[k];
  return e;
}

AssumptionReport run_all_checks(const Operator& op, const SampleConfig& cfg) {
  cfg.validate();
  AssumptionReport report = validate_assumptions(op.constants(), op.dim());
  report.entries.push_back(check_derivative_consistency(op, cfg));
  report.entries.push_back(check_ellipticity(op, cfg));
  report.entries.push_back(check_growth_xi(op, cfg));
  report.entries.push_back(check_growth_u(op, cfg));

  const Box& box = op.domain();
  Vector lo = box.lo;
  Vector hi = box.hi;
  for (int a = 0; a < box.dim(); ++a) {
    lo[a] += 0.1 * box.width(a);
    hi[a] -= 0.1 * box.width(a);
  }
  report.entries.push_back(check_local_conditions(op, cfg.u_radius, Box(lo, hi), cfg));
  report.entries.push_back(check_monotonicity(op, cfg));
  report.entries.push_back(check_coercivity_lower(op, cfg).entry);
  report.entries.push_back(check_lemma_lower_bound(op, cfg));
  if (const auto* rop = dynamic_cast<const RegularizedOperator*>(&op)) {
    report.entries.push_back(check_regularized_growth(*rop, cfg));
  }
  return report;
}

}  // namespace pq
