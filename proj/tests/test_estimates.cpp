#include "pq/continuation.hpp"
#include "pq/error.hpp"
#include "pq/estimates.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace pq;

namespace {

OperatorPtr p_laplacian(double p) {
  FamilyParams fp;
  fp.p = p;
  return make_family(Family::PLaplacian, fp);
}

// Interior-only field: f at interior nodes, zero on the boundary.
DiscreteField interior_field(const MeshPtr& m, const std::function<double(const Vector&)>& f) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m->num_nodes());
  for (int n = 0; n < m->num_nodes(); ++n) {
    if (!m->is_boundary(n)) v[n] = f(m->node(n));
  }
  return DiscreteField(m, v);
}

ContinuationTrace trace_of(const MeshPtr& m, const std::vector<DiscreteField>& fields, double p) {
  ContinuationTrace t{m, p, p, 0.1, EpsilonSchedule{}, DiscreteField(m), {}, std::nullopt, std::nullopt};
  double eps = 0.2;
  for (const auto& U : fields) {
    t.steps.push_back({eps, U, {}, track_norms(U, p, 0.1), 0.0});
    eps *= 0.5;
  }
  return t;
}

}  // namespace

TEST(ExponentAlgebra, Examples) {
  EXPECT_DOUBLE_EQ(compute_alpha(3, 2.5, 2.5), 1.0);
  EXPECT_NEAR(compute_alpha(3, 2.0, 2.2), 4.0 / 3.4, 1e-15);
  EXPECT_NEAR(compute_alpha(3, 2.0, 2.2), 1.17647, 1e-5);
  EXPECT_DOUBLE_EQ(compute_pstar(3, 2.0, 2.2), 6.0);
  EXPECT_TRUE(alpha_extrapolated(2, 2.0, 2.2));
  EXPECT_FALSE(alpha_extrapolated(2, 2.0, 2.0));
  EXPECT_FALSE(alpha_extrapolated(3, 2.0, 2.2));
}

TEST(ExponentAlgebra, PStarExceedsQAndTheta) {
  // For p >= n the Sobolev exponent is free; the chosen value must beat q and theta.
  for (int n : {1, 2, 3}) {
    for (double p = 2.0; p <= 6.0; p += 0.25) {
      for (double q = p; q < p * (1.0 + 1.0 / n) && q < p + 1.0; q += 0.05) {
        const double ps = compute_pstar(n, p, q);
        EXPECT_GT(ps, q);
        EXPECT_LT(2.0 * p / (p - q + 2.0), ps) << n << " " << p << " " << q;
      }
    }
  }
  EXPECT_THROW(compute_pstar(2, 2.0, 3.0), Error);
}

TEST(Bracket, HandValues) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  auto op = p_laplacian(2);
  const double ps = compute_pstar(2, 2.0, 2.0);
  ASSERT_DOUBLE_EQ(ps, 3.0);
  EXPECT_NEAR(global_lp_rhs(*m, *op, [](const Vector&) { return 0.0; }, 2.0, ps), 1.0, 1e-15);
  EXPECT_NEAR(global_lp_rhs(*m, *op, [](const Vector&) { return -2.0; }, 2.0, ps), 9.0, 1e-12);
  double prev = 0.0;
  for (double s : {0.0, 0.5, 1.0, 4.0}) {
    const double v = global_lp_rhs(*m, *op, [s](const Vector& x) { return s * x[0]; }, 2.0, ps);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(GradientConstant, ZeroAndConstantGradient) {
  auto m = build_mesh(2, Box::unit(2), {17, 17});
  const Balls balls{make_vector({0.5, 0.5}), 0.2, 0.3};
  EXPECT_EQ(interior_gradient_constant(DiscreteField(m), 2.0, 2.2, 2, balls), 0.0);

  // |Du| = g on every element the balls touch.
  const Vector grad = make_vector({0.6, -0.8});
  const double g = 1.0;
  const auto U = interior_field(m, [&](const Vector& x) { return grad.dot(x); });
  double measure = 0.0;
  for (int e = 0; e < m->num_elements(); ++e) {
    if ((m->element_centroid(e) - balls.center).norm() < balls.R) measure += m->element_measure(e);
  }
  const double p = 2.0;
  const double q = 2.2;
  const double alpha = 2.0 * p / (4.0 * p - 2.0 * q);
  const double expected = std::pow(0.1, 2) * std::pow(g, p / alpha) / (std::pow(1.0 + g * g, p / 2) * measure);
  EXPECT_NEAR(interior_gradient_constant(U, p, q, 2, balls), expected, 1e-12 * expected);
}

TEST(HessianConstant, LinearAndQuadraticOnCoarseGrid) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  const Balls balls{make_vector({0.5, 0.5}), 0.2, 0.3};
  const auto lin = interior_field(m, [](const Vector& x) { return x[0] - 2.0 * x[1]; });
  EXPECT_NEAR(second_derivative_constant(lin, 2.0, balls), 0.0, 1e-20);

  // u = x(1-x): u_xx = -2, u_yy = u_xy = 0 at nodes in B_rho; on each element
  // inside B_R the gradient is (1 - x_i - x_{i+1}, 0) for its cell column i.
  const double h = 1.0 / 8.0;
  const auto U = interior_field(m, [](const Vector& x) { return x[0] * (1.0 - x[0]); });
  int nodes = 0;
  for (int n = 0; n < m->num_nodes(); ++n) {
    if ((m->node(n) - balls.center).norm() < balls.rho) ++nodes;
  }
  double denom = 0.0;
  for (int e = 0; e < m->num_elements(); ++e) {
    const Vector c = m->element_centroid(e);
    if ((c - balls.center).norm() >= balls.R) continue;
    const double xi = std::floor(c[0] / h) * h;
    const double gx = 1.0 - xi - (xi + h);
    denom += 0.5 * h * h * (1.0 + gx * gx);
  }
  const double expected = 0.01 * 4.0 * h * h * nodes / denom;
  EXPECT_NEAR(second_derivative_constant(U, 2.0, balls), expected, 1e-12 * expected);
}

TEST(Uniformity, ConstantTraceAndVariation) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  const auto U = interior_field(m, [](const Vector& x) { return x[0] * x[1]; });
  const auto t = trace_of(m, {U, U, U}, 2.0);
  const auto r = check_uniform_lp(t);
  EXPECT_EQ(r.ratio, 1.0);
  EXPECT_TRUE(r.pass);

  EXPECT_EQ(variation({0.0, 0.0}), 1.0);
  EXPECT_EQ(variation({1.0, 2.0, 1.5}), 2.0);
  EXPECT_EQ(variation({0.0, 1.0}), std::numeric_limits<double>::infinity());
}

TEST(Report, RowsAndLimit) {
  auto m = build_mesh(2, Box::unit(2), {17, 17});
  FamilyParams fp;
  fp.p = 2.0;
  fp.q = 2.2;
  fp.weight = ScalarField::affine(0.0, make_vector({1, 0}));
  auto op = make_family(Family::DoublePhase, fp);
  const RhsFunction b = [](const Vector&) { return -2.0; };
  const auto trace = continuation_solve(m, op, b, EpsilonSchedule{0.2, 0.5, 3});
  const auto rep = compute_estimates(trace, *op, b);
  ASSERT_EQ(rep.rows.size(), 4u);
  EXPECT_EQ(rep.rows.back().label, "limit");
  EXPECT_EQ(rep.rows.back().eps, 0.0);
  EXPECT_DOUBLE_EQ(rep.rows.back().alpha, compute_alpha(2, 2.0, 2.2));
  EXPECT_DOUBLE_EQ(rep.rows.front().alpha, compute_alpha(2, 2.0, 2.4));
  EXPECT_TRUE(rep.alpha_extrapolated);
  for (const auto& r : rep.rows) {
    EXPECT_TRUE(std::isfinite(r.c_gradient) && r.c_gradient > 0.0);
    EXPECT_TRUE(std::isfinite(r.c_hessian) && r.c_hessian > 0.0);
    EXPECT_GE(r.ratio, 1.0 - 1e-15);
  }
  EXPECT_TRUE(rep.pass());
  // Identical inputs give identical outputs.
  const auto again = compute_estimates(trace, *op, b);
  EXPECT_EQ(again.rows.front().c_hessian, rep.rows.front().c_hessian);
}
