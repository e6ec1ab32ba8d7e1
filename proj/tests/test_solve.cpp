#include "pq/continuation.hpp"
#include "pq/error.hpp"
#include "pq/mms.hpp"
#include "pq/solver.hpp"

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

double w12_distance(const DiscreteField& a, const DiscreteField& b) {
  return w12_norm(DiscreteField(a.mesh_ptr(), Eigen::VectorXd(a.values() - b.values())));
}

const RhsFunction kMinusTwo = [](const Vector&) { return -2.0; };

}  // namespace

TEST(Newton, OneDimensionalPoissonIsNodallyExact) {
  auto m = build_mesh(1, Box::unit(1), {17});
  const auto r = newton_solve(*p_laplacian(2, 1), kMinusTwo, DiscreteField(m));
  EXPECT_EQ(r.stats.iterations, 1);
  EXPECT_EQ(r.stats.method, "newton");
  for (int n = 0; n < m->num_nodes(); ++n) {
    const double x = m->node(n)[0];
    EXPECT_NEAR(r.U.values()[n], x * (1.0 - x), 1e-12);
  }
}

TEST(Newton, ZeroRhsExitsImmediately) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  const auto r = newton_solve(*p_laplacian(3), [](const Vector&) { return 0.0; }, DiscreteField(m));
  EXPECT_EQ(r.stats.iterations, 0);
  EXPECT_EQ(r.U.values().norm(), 0.0);
}

TEST(Newton, NonlinearManufacturedCase) {
  auto op = p_laplacian(4);
  const auto mc = make_manufactured(op, builtin_case("sine2d"));
  auto m = build_mesh(2, Box::unit(2), {33, 33});
  const auto r = newton_solve(*op, mc.b, DiscreteField(m));
  EXPECT_LE(r.stats.iterations, 25);
  EXPECT_LT(r.stats.final_residual, r.stats.initial_residual);
  EXPECT_LE(r.stats.final_residual, 1e-10);
  EXPECT_LT(field_error(r.U, mc.exact).l2, 5e-3);
}

TEST(Newton, UniqueLimitFromDifferentStarts) {
  auto op = p_laplacian(3);
  auto m = build_mesh(2, Box::unit(2), {17, 17});
  NewtonConfig cfg;
  cfg.abs_tol = 1e-12;
  const auto a = newton_solve(*op, kMinusTwo, DiscreteField(m), cfg);
  const auto U0 = DiscreteField::interpolate(m, [](const Vector& x) { return 3.0 * std::sin(7 * x[0]) * x[1]; });
  const auto b = newton_solve(*op, kMinusTwo, U0, cfg);
  EXPECT_LE(w12_distance(a.U, b.U), 10.0 * cfg.abs_tol);
}

TEST(Newton, ReportsNonConvergenceWithBestIterate) {
  auto op = p_laplacian(4);
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  NewtonConfig cfg;
  cfg.max_iters = 1;
  try {
    newton_solve(*op, [](const Vector&) { return -50.0; }, DiscreteField(m), cfg);
    FAIL() << "expected NonConvergence";
  } catch (const SolveError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvergence);
    EXPECT_LT(e.stats().final_residual, e.stats().initial_residual);
    EXPECT_GT(e.best().values().norm(), 0.0);
  }
}

TEST(FixedPoint, LinearCaseIsImmediate) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  auto op = p_laplacian(2);
  const auto fp = fixed_point_solve(*op, kMinusTwo, DiscreteField(m));
  const auto nt = newton_solve(*op, kMinusTwo, DiscreteField(m));
  EXPECT_EQ(fp.stats.method, "fixed_point");
  EXPECT_LE(fp.stats.iterations, 2);
  EXPECT_LT(w12_distance(fp.U, nt.U), 1e-12);
}

TEST(FixedPoint, AgreesWithNewton) {
  auto op = p_laplacian(4);
  const auto mc = make_manufactured(op, builtin_case("sine2d"));
  auto m = build_mesh(2, Box::unit(2), {17, 17});
  NewtonConfig cfg;
  cfg.abs_tol = 1e-11;
  const auto fp = fixed_point_solve(*op, mc.b, DiscreteField(m), cfg);
  const auto nt = newton_solve(*op, mc.b, DiscreteField(m), cfg);
  EXPECT_LE(w12_distance(fp.U, nt.U), 1e-8);
}

TEST(FixedPoint, NeedsScalarWeight) {
  FamilyParams fp;
  fp.exponents = {2.0, 2.5};
  auto op = make_family(Family::Anisotropic, fp);
  auto m = build_mesh(2, Box::unit(2), {5, 5});
  try {
    fixed_point_solve(*op, kMinusTwo, DiscreteField(m));
    FAIL() << "expected Unsupported";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unsupported);
  }
}

TEST(Continuation, LinearPerturbationIncrementsFollowSchedule) {
  auto m = build_mesh(2, Box::unit(2), {17, 17});
  EpsilonSchedule s{0.2, 0.5, 6};
  const auto trace = continuation_solve(m, p_laplacian(2), kMinusTwo, s);
  ASSERT_EQ(trace.steps.size(), 6u);
  // The eps-term exponent q + eps moves with eps too, so the increment ratio
  // approaches the schedule factor with an O(eps) correction.
  double prev_dev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k < trace.steps.size(); ++k) {
    const double r = trace.steps[k].increment / trace.steps[k - 1].increment;
    const double dev = std::abs(r - 0.5);
    EXPECT_LT(dev, 0.6 * prev_dev) << k;
    EXPECT_LT(dev, trace.steps[k - 1].eps) << k;
    prev_dev = dev;
  }
  for (const auto& st : trace.steps) {
    EXPECT_LT(w12_distance(st.U, trace.initial), 2.0 * st.eps * w12_norm(trace.initial));
  }
  ASSERT_TRUE(trace.extrapolated.has_value());
  ASSERT_TRUE(trace.extrapolated_norms.has_value());
}

TEST(Continuation, SingleStepEqualsDirectSolve) {
  auto m = build_mesh(2, Box::unit(2), {17, 17});
  auto op = double_phase_x1();
  ContinuationConfig cfg;
  cfg.linear_presolve = false;
  const auto trace = continuation_solve(m, op, kMinusTwo, EpsilonSchedule{0.1, 0.5, 1}, cfg);
  const auto direct = newton_solve(*regularize(op, 0.1, 0.1), kMinusTwo, DiscreteField(m));
  ASSERT_EQ(trace.steps.size(), 1u);
  EXPECT_TRUE(trace.steps[0].U.values() == direct.U.values());
  EXPECT_FALSE(trace.extrapolated.has_value());
}

TEST(Continuation, ScheduleGuardRunsBeforeAnySolve) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  // (2.2 + 0.9)/2 = 1.55 >= 1.5.
  try {
    continuation_solve(m, double_phase_x1(), kMinusTwo, EpsilonSchedule{0.9, 0.5, 3});
    FAIL() << "expected InvalidExponents";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidExponents);
  }
  EXPECT_THROW(continuation_solve(m, double_phase_x1(), kMinusTwo, EpsilonSchedule{0.2, 1.5, 3}),
               Error);
}

TEST(Continuation, FailureCarriesPartialTrace) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  ContinuationConfig cfg;
  cfg.newton.max_iters = 1;
  cfg.fixed_point_fallback = false;
  cfg.linear_presolve = false;
  try {
    continuation_solve(m, p_laplacian(3), kMinusTwo, EpsilonSchedule{}, cfg);
    FAIL() << "expected ContinuationError";
  } catch (const ContinuationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvergence);
    EXPECT_TRUE(e.partial().steps.empty());
  }
}

TEST(Continuation, FallbackRescuesStarvedNewton) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  ContinuationConfig cfg;
  cfg.newton.max_iters = 1;
  cfg.newton.abs_tol = 1e-9;
  const auto trace = continuation_solve(m, double_phase_x1(), kMinusTwo, EpsilonSchedule{0.2, 0.5, 2}, cfg);
  ASSERT_EQ(trace.steps.size(), 2u);
  bool any_fixed_point = false;
  for (const auto& s : trace.steps) any_fixed_point |= s.stats.method == "fixed_point";
  EXPECT_TRUE(any_fixed_point);
}
