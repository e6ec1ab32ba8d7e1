#include "pq/error.hpp"
#include "pq/parallel.hpp"
#include "pq/verify.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

using namespace pq;

namespace {

OperatorPtr p_laplacian(double p, int dim = 2) {
  FamilyParams fp;
  fp.domain = Box::unit(dim);
  fp.p = p;
  return make_family(Family::PLaplacian, fp);
}

OperatorPtr double_phase_x1() {
  FamilyParams fp;
  fp.p = 2.0;
  fp.q = 2.2;
  fp.weight = ScalarField::affine(0.0, make_vector({1, 0}));
  return make_family(Family::DoublePhase, fp);
}

SampleConfig config(int count, std::uint64_t seed = 1) {
  SampleConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  return cfg;
}

bool same_sample(const Sample& a, const Sample& b) {
  return a.x == b.x && a.u == b.u && a.xi == b.xi && a.eta == b.eta && a.lambda == b.lambda;
}

}  // namespace

TEST(Sampling, StructuredBatchAndCounts) {
  const auto s = draw_samples(Box::unit(2), config(100));
  ASSERT_EQ(s.size(), static_cast<std::size_t>(structured_sample_count(2) + 100 + 10));
  EXPECT_EQ(s[0].xi.norm(), 0.0);
  EXPECT_EQ(s[0].u, 0.0);
  double largest = 0.0;
  for (const auto& x : s) {
    EXPECT_TRUE(Box::unit(2).contains(x.x));
    EXPECT_NEAR(x.lambda.norm(), 1.0, 1e-12);
    largest = std::max(largest, x.xi.norm());
  }
  EXPECT_NEAR(largest, 100.0, 1e-9);
}

TEST(Sampling, IndependentOfThreadCount) {
  set_thread_count(1);
  const auto a = draw_samples(Box::unit(2), config(3000, 42));
  set_thread_count(4);
  const auto b = draw_samples(Box::unit(2), config(3000, 42));
  set_thread_count(0);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) ASSERT_TRUE(same_sample(a[k], b[k])) << k;
  const auto c = draw_samples(Box::unit(2), config(3000, 43));
  EXPECT_FALSE(same_sample(a.back(), c.back()));
}

TEST(Ellipticity, LinearCaseHasZeroMarginEverywhere) {
  // Zero up to the rounding in |lambda| = 1.
  auto op = p_laplacian(2);
  for (const auto& s : draw_samples(op->domain(), config(1000))) {
    ASSERT_NEAR(ellipticity_margin(*op, s), 0.0, 1e-15);
  }
  EXPECT_TRUE(check_ellipticity(*op, config(1000)).pass);
}

TEST(Ellipticity, DegenerateFailsAtOrigin) {
  FamilyParams fp;
  fp.p = 4.0;
  auto op = make_family(Family::DegeneratePLaplacian, fp);
  const auto e = check_ellipticity(*op, config(10000));
  EXPECT_FALSE(e.pass);
  EXPECT_DOUBLE_EQ(e.worst_margin, -op->constants().m);
  ASSERT_TRUE(e.witness.has_value());
  EXPECT_EQ(e.witness->xi.norm(), 0.0);
}

TEST(Ellipticity, NondegenerateMatchesEigenvalueOracle) {
  auto op = p_laplacian(4);
  const auto samples = draw_samples(op->domain(), config(10000, 5));
  for (const auto& s : samples) {
    const Matrix J = op->dflux_dxi(s.x, s.u, s.xi);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Eigen::Matrix2d(0.5 * (J + J.transpose())));
    const double bound = std::pow(1.0 + s.xi.squaredNorm(), 1.0);
    ASSERT_GE(es.eigenvalues().minCoeff(), bound * (1.0 - 1e-12));
  }
  EXPECT_TRUE(check_ellipticity(*op, config(10000, 5)).pass);
}

TEST(Growth, LinearCaseAndZeroUDerivative) {
  auto op = p_laplacian(2);
  const auto g = check_growth_xi(*op, config(1000));
  EXPECT_TRUE(g.pass);
  const auto u = check_growth_u(*op, config(1000));
  EXPECT_TRUE(u.pass);
  // dflux_du = 0: the margin is the bound itself, here M (1 + |u|^(beta-1)) at beta = 0.
  for (const auto& s : draw_samples(op->domain(), config(50))) {
    if (std::abs(s.u) < 1e-6) continue;
    EXPECT_DOUBLE_EQ(growth_u_margin(*op, s, 1e-6), 1.0 + std::pow(std::abs(s.u), -1.0));
  }
}

TEST(Growth, LogFormPassesWithFittedM) {
  FamilyParams fp;
  fp.p = 2.0;
  fp.q = 2.3;
  auto op = make_family(Family::Log, fp);
  EXPECT_TRUE(check_growth_xi(*op, config(10000)).pass);
  EXPECT_TRUE(check_ellipticity(*op, config(10000)).pass);
  // Independent sup over a wider range than the sampler reaches.
  double sup = 0.0;
  for (double t = -8; t <= 12; t += 0.01) {
    const Vector xi = make_vector({std::pow(10.0, t), 0.0});
    const double lhs = op->dflux_dxi(make_vector({0.5, 0.5}), 0.0, xi).cwiseAbs().maxCoeff();
    sup = std::max(sup, lhs / (std::pow(1.0 + xi.squaredNorm(), 0.15) + 1.0));
  }
  EXPECT_LE(sup, op->constants().M);
}

TEST(LocalConditions, XIndependentGivesZeroFit) {
  auto op = p_laplacian(3);
  const Box sub(make_vector({0.1, 0.1}), make_vector({0.9, 0.9}));
  const auto e = check_local_conditions(*op, 5.0, sub, config(2000));
  EXPECT_TRUE(e.pass);
  EXPECT_LT(e.fitted.at("M_L"), 1e-15);  // rounding in J - J^T only
  EXPECT_TRUE(check_local_conditions(*op, 5.0, sub, config(2000), 1e-3).pass);
}

TEST(LocalConditions, DoublePhaseFitMatchesClosedForm) {
  // d a / d x_1 = (1+|xi|^2)^((q-2)/2) xi, symmetric Jacobian, so the fit is
  // the max of |xi|_inf (1+r)^((q-2)/2) / (1+r)^((p+q-2)/4) over the samples.
  auto op = double_phase_x1();
  const auto cfg = config(5000, 9);
  const Box sub(make_vector({0.1, 0.1}), make_vector({0.9, 0.9}));
  const auto e = check_local_conditions(*op, 10.0, sub, cfg);
  double expected = 0.0;
  for (const auto& s : draw_samples(op->domain(), cfg)) {
    const double r = s.xi.squaredNorm();
    expected = std::max(expected, s.xi.cwiseAbs().maxCoeff() * std::pow(1.0 + r, 0.1) /
                                      std::pow(1.0 + r, 0.55));
  }
  EXPECT_NEAR(e.fitted.at("M_L"), expected, 1e-12 * expected);
  EXPECT_TRUE(e.pass);
  EXPECT_FALSE(check_local_conditions(*op, 10.0, sub, cfg, 0.5 * expected).pass);
  EXPECT_THROW(check_local_conditions(*op, 10.0, Box::unit(2), cfg), Error);
}

TEST(Monotonicity, HandValueAndLinearCase) {
  auto op = p_laplacian(4);
  Sample s{make_vector({0.5, 0.5}), 0.0, make_vector({1, 0}), make_vector({-1, 0}), make_vector({1, 0})};
  EXPECT_DOUBLE_EQ(monotonicity_margin(*op, s), 4.0);

  auto lin = p_laplacian(2);
  for (const auto& t : draw_samples(lin->domain(), config(500))) {
    const double m = monotonicity_margin(*lin, t);
    if (std::isfinite(m)) ASSERT_NEAR(m, 0.0, 1e-12 * (1.0 + (t.xi - t.eta).squaredNorm()));
  }
}

TEST(Monotonicity, RegularizationOnlyAdds) {
  auto base = double_phase_x1();
  for (double eps : {0.05, 0.1, 0.2}) {
    auto r = regularize(base, eps, 0.2);
    for (const auto& s : draw_samples(base->domain(), config(2000, 3))) {
      const double mb = monotonicity_margin(*base, s);
      if (!std::isfinite(mb)) continue;
      ASSERT_GE(monotonicity_margin(*r, s), mb - 1e-9 * (1.0 + std::abs(mb)));
    }
    EXPECT_TRUE(check_monotonicity(*r, config(10000)).pass);
  }
}

TEST(Coercivity, LinearCaseAndTheta) {
  auto op = p_laplacian(2);
  const auto res = check_coercivity_lower(*op, config(2000));
  EXPECT_TRUE(res.entry.pass);
  EXPECT_EQ(res.constants.c1, 1.0);
  EXPECT_EQ(res.constants.c2, 0.0);
  EXPECT_EQ(coercivity_b1(*op, make_vector({0.3, 0.3})), 1.0);
  EXPECT_DOUBLE_EQ(coercivity_theta(2.0, 2.0, 0.5), 2.0);
  EXPECT_DOUBLE_EQ(coercivity_theta(2.0, 2.2, 0.0), 4.0 / 1.8);
}

TEST(Coercivity, FitsSmallerC1WhenNeeded) {
  // a = 0.5 xi declares m = 1, so c1 must be found below it.
  CustomOperatorSpec spec;
  spec.flux = [](const Vector&, double, const Vector& xi) { return Vector(0.5 * xi); };
  spec.dflux_dxi = [](const Vector&, double, const Vector& xi) {
    return Matrix(0.5 * Matrix::Identity(xi.size(), xi.size()));
  };
  auto op = make_custom(spec);
  const auto res = check_coercivity_lower(*op, config(2000));
  EXPECT_TRUE(res.entry.pass);
  EXPECT_LT(res.constants.c1, 1.0);
  EXPECT_GE(res.constants.c1, 0.5 - 1e-9);
}

TEST(LemmaLowerBound, MonotoneOperatorFitsZero) {
  const auto e = check_lemma_lower_bound(*p_laplacian(3), config(2000));
  EXPECT_TRUE(e.pass);
  EXPECT_EQ(e.fitted.at("c"), 0.0);
}

TEST(LemmaLowerBound, UDependentFieldIsStable) {
  // a = xi + sin(u) e_1: a(x,0,0) = 0, the pairing dips below zero by at most |xi|.
  CustomOperatorSpec spec;
  spec.flux = [](const Vector&, double u, const Vector& xi) {
    Vector f = xi;
    f[0] += std::sin(u);
    return f;
  };
  auto op = make_custom(spec);
  const auto e = check_lemma_lower_bound(*op, config(4000));
  EXPECT_TRUE(e.pass);
  EXPECT_GT(e.fitted.at("c"), 0.0);
  EXPECT_LE(e.fitted.at("c"), 2.0 * e.fitted.at("c_half_samples"));
}

TEST(RegularizedGrowth, ZeroBaseField) {
  // |a_eps| = (1+|xi|^2)^(1/2)|xi| <= 2|xi|^2 + 1 at eps = 1, q = 2, n = 1.
  CustomOperatorSpec spec;
  spec.domain = Box::unit(1);
  spec.flux = [](const Vector&, double, const Vector& xi) { return Vector(Vector::Zero(xi.size())); };
  auto r = regularize(make_custom(spec), 1.0, 1.0);
  const auto e = check_regularized_growth(*r, config(2000));
  EXPECT_TRUE(e.pass);
  EXPECT_LE(e.fitted.at("M"), 2.0);
}

TEST(DerivativeConsistency, PassesAndCatchesCorruption) {
  EXPECT_TRUE(check_derivative_consistency(*p_laplacian(4), config(100)).pass);
  EXPECT_TRUE(check_derivative_consistency(*p_laplacian(2), config(100)).pass);

  auto base = p_laplacian(4);
  CustomOperatorSpec spec;
  spec.constants = base->constants();
  spec.flux = [base](const Vector& x, double u, const Vector& xi) { return base->flux(x, u, xi); };
  spec.dflux_dxi = [base](const Vector& x, double u, const Vector& xi) {
    return Matrix(1.01 * base->dflux_dxi(x, u, xi));
  };
  const auto e = check_derivative_consistency(*make_custom(spec), config(100));
  EXPECT_FALSE(e.pass);
  EXPECT_TRUE(e.witness.has_value());
  EXPECT_GT(e.fitted.at("max_relative_error"), 1e-3);
}

TEST(Report, WitnessReproducesMargin) {
  auto op = double_phase_x1();
  const auto e = check_monotonicity(*op, config(3000));
  ASSERT_TRUE(e.witness.has_value());
  EXPECT_EQ(monotonicity_margin(*op, *e.witness), e.worst_margin);
  const auto g = check_growth_xi(*op, config(3000));
  EXPECT_EQ(growth_xi_margin(*op, *g.witness), g.worst_margin);
}

TEST(Report, DeterministicAcrossThreadCounts) {
  auto op = double_phase_x1();
  set_thread_count(1);
  const auto a = run_all_checks(*op, config(5000, 77));
  set_thread_count(3);
  const auto b = run_all_checks(*op, config(5000, 77));
  set_thread_count(0);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const auto& x = a.entries[k];
    const auto& y = b.entries[k];
    EXPECT_EQ(x.id, y.id);
    EXPECT_EQ(x.pass, y.pass);
    EXPECT_EQ(std::isnan(x.worst_margin) ? 0.0 : x.worst_margin,
              std::isnan(y.worst_margin) ? 0.0 : y.worst_margin);
    EXPECT_EQ(x.fitted, y.fitted);
    ASSERT_EQ(x.witness.has_value(), y.witness.has_value());
    if (x.witness) EXPECT_TRUE(same_sample(*x.witness, *y.witness));
  }
  EXPECT_TRUE(a.all_pass());
}

TEST(Assumptions, ExponentConditions) {
  StructuralConstants c;
  c.p = 2.0;
  c.q = 2.2;
  EXPECT_TRUE(validate_assumptions(c, 2).find("q_over_p_bound")->pass);

  c.q = 3.0;
  const auto r = validate_assumptions(c, 2);
  EXPECT_FALSE(r.find("q_over_p_bound")->pass);
  EXPECT_FALSE(r.all_pass());

  c.q = 2.0;
  c.beta = 1.0;
  EXPECT_FALSE(validate_assumptions(c, 2).find("beta_range")->pass);
  c.beta = 0.5;
  EXPECT_TRUE(validate_assumptions(c, 2).find("beta_range")->pass);

  EXPECT_FALSE(validate_assumptions(c, 2, 2.0).find("gamma_bound")->pass);
  EXPECT_TRUE(validate_assumptions(c, 2, 2.5).find("gamma_bound")->pass);
}
