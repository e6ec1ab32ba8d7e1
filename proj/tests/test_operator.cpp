#include "pq/error.hpp"
#include "pq/io.hpp"
#include "pq/operator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pq;

namespace {

OperatorPtr p_laplacian(double p, int dim = 2) {
  FamilyParams fp;
  fp.domain = Box::unit(dim);
  fp.p = p;
  return make_family(Family::PLaplacian, fp);
}

OperatorPtr double_phase(double p, double q, ScalarField weight) {
  FamilyParams fp;
  fp.p = p;
  fp.q = q;
  fp.weight = std::move(weight);
  return make_family(Family::DoublePhase, fp);
}

// Centered differences written out here so the check does not share code with
// Operator::fd_*.
Matrix fd_jacobian(const Operator& op, const Vector& x, double u, const Vector& xi) {
  const int n = op.dim();
  Matrix J(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(xi[j]));
    Vector a = xi, b = xi;
    a[j] += h;
    b[j] -= h;
    J.col(j) = (op.flux(x, u, a) - op.flux(x, u, b)) / (2.0 * h);
  }
  return J;
}

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff());
}

const Vector kCenter = make_vector({0.5, 0.5});

}  // namespace

TEST(Flux, PLaplacianValues) {
  EXPECT_EQ(p_laplacian(2)->flux(kCenter, 0.0, make_vector({1, 0})), make_vector({1, 0}));
  const Vector f = p_laplacian(4)->flux(kCenter, 0.0, make_vector({1, 0}));
  EXPECT_DOUBLE_EQ(f[0], 2.0);
  EXPECT_DOUBLE_EQ(f[1], 0.0);
}

TEST(Flux, DoublePhaseWithZeroWeightAtPoint) {
  // a(x) = x_1 vanishes on x_1 = 0.
  auto op = double_phase(2, 2.2, ScalarField::affine(0.0, make_vector({1, 0})));
  const Vector f = op->flux(make_vector({0.0, 0.3}), 0.0, make_vector({1, 0}));
  EXPECT_NEAR(f[0], 1.0, 1e-15);
  EXPECT_EQ(f[1], 0.0);
}

TEST(Flux, JacobianAtOriginAndLinearCase) {
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_EQ(p_laplacian(2)->dflux_dxi(kCenter, 3.0, make_vector({5, -7})), I);
  EXPECT_EQ(p_laplacian(4)->dflux_dxi(kCenter, 0.0, make_vector({0, 0})), I);
}

TEST(Flux, PLaplacianJacobianClosedForm) {
  // a = (1+r) xi for p = 4, so J = (1+r) I + 2 xi xi^T.
  auto op = p_laplacian(4);
  const Vector xi = make_vector({0.3, -1.7});
  const Matrix expected = (1.0 + xi.squaredNorm()) * Matrix::Identity(2, 2) + 2.0 * xi * xi.transpose();
  EXPECT_LT(rel_err(op->dflux_dxi(kCenter, 0.0, xi), expected), 1e-15);
}

TEST(Flux, DegenerateLogVanishesAtOrigin) {
  FamilyParams fp;
  fp.p = 3;
  fp.q = 3.2;
  auto op = make_family(Family::DegenerateLog, fp);
  const Vector zero = Vector::Zero(2);
  EXPECT_EQ(op->flux(kCenter, 0.0, zero).norm(), 0.0);
  EXPECT_EQ(op->dflux_dxi(kCenter, 0.0, zero).norm(), 0.0);
}

TEST(Flux, DimensionMismatchThrows) {
  auto op = p_laplacian(2);
  try {
    (void)op->flux(kCenter, 0.0, make_vector({1, 0, 0}));
    FAIL() << "expected DimensionMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Families, Identities) {
  const Vector x = make_vector({0.2, 0.9});
  const Vector xi = make_vector({1.3, -0.4});
  auto lap = p_laplacian(2);

  FamilyParams aniso;
  aniso.exponents = {2.0, 2.0};
  auto a = make_family(Family::Anisotropic, aniso);
  EXPECT_LT((a->flux(x, 0.0, xi) - lap->flux(x, 0.0, xi)).norm(), 1e-15);

  auto dp = double_phase(3, 3.2, ScalarField::constant(0.0));
  auto lap3 = p_laplacian(3);
  EXPECT_LT((dp->flux(x, 0.0, xi) - lap3->flux(x, 0.0, xi)).norm(), 1e-14);

  FamilyParams ve;
  ve.exponent = ScalarField::constant(3.0);
  auto v = make_family(Family::VariableExponent, ve);
  EXPECT_DOUBLE_EQ(v->p(), 3.0);
  EXPECT_DOUBLE_EQ(v->q(), 3.0);
}

TEST(Families, AnisotropicDeclaresMinMax) {
  FamilyParams fp;
  fp.exponents = {2.0, 2.5};
  auto op = make_family(Family::Anisotropic, fp);
  EXPECT_DOUBLE_EQ(op->p(), 2.0);
  EXPECT_DOUBLE_EQ(op->q(), 2.5);
  EXPECT_FALSE(op->scalar_weight(kCenter, 0.0, make_vector({1, 1})).has_value());
}

TEST(Families, Rejections) {
  FamilyParams log;
  log.p = 2.0;  // q missing: the log form needs q > p
  EXPECT_THROW(make_family(Family::Log, log), Error);

  FamilyParams bad;
  bad.p = 2.0;
  bad.q = 3.0;
  EXPECT_THROW(make_family(Family::PLaplacian, bad), Error);

  FamilyParams neg;
  neg.p = 2.0;
  neg.q = 2.2;
  neg.weight = ScalarField::affine(-0.5, make_vector({1, 0}));
  try {
    make_family(Family::DoublePhase, neg);
    FAIL() << "expected NonnegativityViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonnegativityViolation);
  }

  FamilyParams ve;
  ve.exponent = ScalarField::affine(2.0, make_vector({0.2, 0}));
  ve.p = 2.0;
  ve.q = 2.1;  // probe reaches 2.2
  EXPECT_THROW(make_family(Family::VariableExponent, ve), Error);
}

TEST(Regularized, HandValue) {
  auto r = regularize(p_laplacian(2), 0.25, 0.25);
  const Vector f = r->flux(kCenter, 0.0, make_vector({1, 0}));
  EXPECT_NEAR(f[0], 1.0 + 0.25 * std::pow(2.0, 0.125), 1e-15);
  EXPECT_NEAR(f[0], 1.27263, 1e-5);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_DOUBLE_EQ(r->q(), 2.25);
}

TEST(Regularized, Guards) {
  auto op = p_laplacian(2);
  EXPECT_THROW(regularize(op, 0.0, 0.2), Error);
  EXPECT_THROW(regularize(op, 0.3, 0.2), Error);
  // (q + eps0)/p must stay below 1 + 1/n = 1.5.
  EXPECT_THROW(regularize(op, 0.5, 1.0), Error);
  EXPECT_NO_THROW(regularize(op, 0.5, 0.9));
}

TEST(Regularized, EpsTermPositivity) {
  // (a_eps - a, xi) >= eps |xi|^(q+eps) for xi != 0.
  auto base = double_phase(2, 2.2, ScalarField::affine(0.0, make_vector({1, 0})));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (double eps : {0.05, 0.1, 0.2}) {
    auto r = regularize(base, eps, 0.2);
    for (int k = 0; k < 500; ++k) {
      const Vector x = make_vector({0.5 + U(rng) / 20.0, 0.5 + U(rng) / 20.0});
      const Vector xi = make_vector({U(rng), U(rng)});
      const double lhs = (r->flux(x, 0.0, xi) - base->flux(x, 0.0, xi)).dot(xi);
      const double rhs = eps * std::pow(xi.norm(), r->q());
      ASSERT_GE(lhs, rhs * (1.0 - 1e-14)) << "eps=" << eps;
    }
  }
}

TEST(Regularized, ConvergesMonotonicallyAsEpsShrinks) {
  auto base = p_laplacian(3);
  const Vector xi = make_vector({2.0, -1.0});
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.2, 0.1, 0.05, 0.025, 1e-3, 1e-6}) {
    auto r = regularize(base, eps, 0.2);
    const double d = (r->flux(kCenter, 0.0, xi) - base->flux(kCenter, 0.0, xi)).norm();
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Derivatives, AnalyticMatchesIndependentFiniteDifferences) {
  std::vector<std::pair<std::string, OperatorPtr>> ops;
  ops.emplace_back("p4", p_laplacian(4));
  ops.emplace_back("dp", double_phase(2, 2.2, ScalarField::affine(0.0, make_vector({1, 0}))));
  FamilyParams log;
  log.p = 2.0;
  log.q = 2.3;
  ops.emplace_back("log", make_family(Family::Log, log));
  FamilyParams ve;
  ve.exponent = ScalarField::affine(2.0, make_vector({0.3, 0.1}));
  ve.p = 2.0;
  ve.q = 2.4;
  ops.emplace_back("ve", make_family(Family::VariableExponent, ve));
  FamilyParams an;
  an.exponents = {2.0, 2.5};
  ops.emplace_back("aniso", make_family(Family::Anisotropic, an));
  ops.emplace_back("reg", regularize(p_laplacian(3), 0.1, 0.2));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto& [name, op] : ops) {
    for (int k = 0; k < 100; ++k) {
      const Vector x = make_vector({0.5 + 0.4 * U(rng), 0.5 + 0.4 * U(rng)});
      const Vector xi = make_vector({10 * U(rng), 10 * U(rng)});
      const double u = 10 * U(rng);
      ASSERT_LT(rel_err(op->dflux_dxi(x, u, xi), fd_jacobian(*op, x, u, xi)), 1e-6) << name;
    }
  }
}

TEST(Descriptor, ParsesAndRejects) {
  auto op = operator_from_json(json::parse(
      R"({"family":"double_phase","p":2,"q":2.2,"params":{"weight":{"type":"affine","gradient":[1,0]}}})"));
  EXPECT_EQ(op->family(), Family::DoublePhase);
  EXPECT_DOUBLE_EQ(op->q(), 2.2);

  EXPECT_THROW(operator_from_json(json::parse(R"({"family":"nope"})")), Error);
  EXPECT_THROW(operator_from_json(json::parse(R"({"family":"p_laplacian","bogus":1})")), Error);
  EXPECT_THROW(operator_from_json(json::parse(R"({"family":"variable_exponent"})")), Error);
}
