#pragma once

#include "pq/operator.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pq {

/// Sampling parameters shared by all structural checks.
struct SampleConfig {
  std::uint64_t seed = 0;
  int count = 10000;
  double xi_radius = 10.0;
  double u_radius = 10.0;
  double large_xi_radius = 100.0;
  double tolerance = 1e-10;
  double tolerance_strict = 1e-14;
  double u_floor = 1e-6;

  void validate() const;
};

/// One sampled point. eta and lambda are only read by the checks that need them.
struct Sample {
  Vector x;
  double u = 0.0;
  Vector xi;
  Vector eta;
  Vector lambda;  // unit length
};

/// Deterministic sample set: a structured batch (xi = 0, axis vectors, large
/// radii, u at 0 and +-u_radius) followed by `count` seeded random samples and
/// count/10 samples with |xi| in [large_xi_radius/2, large_xi_radius].
/// Sample i depends only on (seed, i), never on thread count.
std::vector<Sample> draw_samples(const Box& box, const SampleConfig& cfg);

/// Number of structured samples that precede the random ones for a box of this dimension.
int structured_sample_count(int dim);

struct ReportEntry {
  std::string id;
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<Sample> witness;
  std::map<std::string, double> fitted;
  std::string note;
};

struct AssumptionReport {
  std::vector<ReportEntry> entries;

  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] const ReportEntry* find(const std::string& id) const;
  void append(const AssumptionReport& other);
};

/// Scalar exponent conditions. gamma and s0 default to +inf (not supplied).
/// Strict inequalities pass only with positive slack.
AssumptionReport validate_assumptions(const StructuralConstants& c, int n,
                                      double gamma = std::numeric_limits<double>::infinity(),
                                      double s0 = std::numeric_limits<double>::infinity());

// Per-sample margins. Each check reports the minimum of these over its samples,
// so re-evaluating at the witness reproduces the reported margin.
double ellipticity_margin(const Operator& op, const Sample& s);
double growth_xi_margin(const Operator& op, const Sample& s);
/// Returns +inf when |u| < u_floor and beta < 1 (term undefined there).
double growth_u_margin(const Operator& op, const Sample& s, double u_floor);
double monotonicity_margin(const Operator& op, const Sample& s);

ReportEntry check_ellipticity(const Operator& op, const SampleConfig& cfg);
ReportEntry check_growth_xi(const Operator& op, const SampleConfig& cfg);
ReportEntry check_growth_u(const Operator& op, const SampleConfig& cfg);
ReportEntry check_monotonicity(const Operator& op, const SampleConfig& cfg);

/// Antisymmetry and x-derivative bounds on |u| <= L, x in `subdomain`. Fits the
/// smallest M(L); with `declared_ML` the margin is taken against it.
ReportEntry check_local_conditions(const Operator& op, double L, const Box& subdomain,
                                   const SampleConfig& cfg,
                                   std::optional<double> declared_ML = std::nullopt);

struct CoercivityConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double theta = 0.0;
};

/// theta = max{2p/(p-q+2), beta p/(p-1)}.
double coercivity_theta(double p, double q, double beta);
/// b1(x) = 1 + |a(x,0,0)|^(p/(p-1)).
double coercivity_b1(const Operator& op, const Vector& x);

struct CoercivityResult {
  CoercivityConstants constants;
  ReportEntry entry;
};

CoercivityResult check_coercivity_lower(const Operator& op, const SampleConfig& cfg,
                                        double c1_floor = 1e-8);

/// Fits c in (a,xi) >= -c(|xi|^q + |u|^q + |a(x,0,0)|^(q/(q-1)) + 1) on
/// `count` and `2 count` samples; passes when the fit is finite and the
/// larger set at most doubles it.
ReportEntry check_lemma_lower_bound(const Operator& op, const SampleConfig& cfg);

/// Fits M in |a_eps| <= M(|xi|^(q+eps-1) + |u|^(q+eps-1) + b1(x)) with the
/// same stability rule.
ReportEntry check_regularized_growth(const RegularizedOperator& rop, const SampleConfig& cfg);

/// Max relative error ||A - FD||_inf / max(1, ||A||_inf) over all three
/// derivatives at the random samples; passes at <= 1e-6.
ReportEntry check_derivative_consistency(const Operator& op, const SampleConfig& cfg);

inline constexpr double kDerivativeTolerance = 1e-6;

/// Every sampled check, in a fixed order, plus the exponent conditions.
/// The local conditions use |u| <= u_radius on the box shrunk by 10% per side.
AssumptionReport run_all_checks(const Operator& op, const SampleConfig& cfg);

}  // namespace pq
