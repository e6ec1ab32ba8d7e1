#include "pq/assembly.hpp"
#include "pq/error.hpp"
#include "pq/mesh.hpp"
#include "pq/parallel.hpp"

#include <Eigen/Dense>
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

OperatorPtr double_phase_x1() {
  FamilyParams fp;
  fp.p = 2.0;
  fp.q = 2.2;
  fp.weight = ScalarField::affine(0.0, make_vector({1, 0}));
  return make_family(Family::DoublePhase, fp);
}

DiscreteField random_field(const MeshPtr& mesh, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-scale, scale);
  Eigen::VectorXd d(mesh->num_dofs());
  for (auto& v : d) v = U(rng);
  return DiscreteField::from_dofs(mesh, d);
}

}  // namespace

TEST(Mesh, Counts) {
  auto m1 = build_mesh(1, Box::unit(1), {3});
  EXPECT_EQ(m1->num_elements(), 2);
  EXPECT_EQ(m1->boundary_nodes(), (std::vector<int>{0, 2}));
  EXPECT_EQ(m1->num_dofs(), 1);

  auto m2 = build_mesh(2, Box::unit(2), {3, 3});
  EXPECT_EQ(m2->num_elements(), 8);
  EXPECT_EQ(m2->boundary_nodes().size(), 8u);
  EXPECT_EQ(m2->num_dofs(), 1);
  EXPECT_EQ(m2->dof_node(0), 4);
}

TEST(Mesh, ElementsPartitionTheBox) {
  const Box box(make_vector({-1.0, 0.5}), make_vector({2.0, 1.25}));
  auto m = build_mesh(2, box, {7, 5});
  double area = 0.0;
  for (int e = 0; e < m->num_elements(); ++e) {
    EXPECT_GT(m->element_measure(e), 0.0);
    area += m->element_measure(e);
  }
  EXPECT_NEAR(area, box.measure(), 1e-12);
  EXPECT_EQ(m->node(m->num_nodes() - 1), box.hi);
}

TEST(Mesh, ShapeGradientsReproduceLinearFunctions) {
  auto m = build_mesh(2, Box::unit(2), {5, 4});
  const Vector g = make_vector({0.7, -1.9});
  for (int e = 0; e < m->num_elements(); ++e) {
    Vector grad = Vector::Zero(2);
    const auto& el = m->element(e);
    for (int v = 0; v < 3; ++v) grad += g.dot(m->node(el[v])) * m->shape_gradients(e).col(v);
    ASSERT_LT((grad - g).norm(), 1e-12);
  }
}

TEST(Mesh, Rejections) {
  EXPECT_THROW(build_mesh(3, Box::unit(3), {3, 3, 3}), Error);
  EXPECT_THROW(build_mesh(2, Box::unit(2), {2, 5}), Error);
  EXPECT_THROW(build_mesh(2, Box::unit(2), {5}), Error);
}

TEST(Quadrature, ExactForQuadratics) {
  // Monomials x^a y^b, a + b <= 2, on [0,2] x [1,2].
  const Box box(make_vector({0.0, 1.0}), make_vector({2.0, 2.0}));
  auto m = build_mesh(2, box, {4, 3});
  auto exact = [](int a, int b) {
    return (std::pow(2.0, a + 1) / (a + 1)) * ((std::pow(2.0, b + 1) - 1.0) / (b + 1));
  };
  for (int a = 0; a <= 2; ++a) {
    for (int b = 0; a + b <= 2; ++b) {
      double sum = 0.0;
      for (int e = 0; e < m->num_elements(); ++e) {
        const auto q = element_quadrature(*m, e);
        for (int k = 0; k < q.count; ++k) {
          sum += q.weights[k] * std::pow(q.points[k][0], a) * std::pow(q.points[k][1], b);
        }
      }
      EXPECT_NEAR(sum, exact(a, b), 1e-12) << a << "," << b;
    }
  }
  auto m1 = build_mesh(1, Box::unit(1), {4});
  for (int a = 0; a <= 3; ++a) {
    double sum = 0.0;
    for (int e = 0; e < m1->num_elements(); ++e) {
      const auto q = element_quadrature(*m1, e);
      for (int k = 0; k < q.count; ++k) sum += q.weights[k] * std::pow(q.points[k][0], a);
    }
    EXPECT_NEAR(sum, 1.0 / (a + 1), 1e-14);
  }
}

TEST(Field, BoundaryHeldAtZero) {
  auto m = build_mesh(2, Box::unit(2), {5, 5});
  auto U = DiscreteField::interpolate(m, [](const Vector& x) { return 1.0 + x[0]; });
  for (int n : m->boundary_nodes()) EXPECT_EQ(U.values()[n], 0.0);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m->num_nodes());
  EXPECT_THROW(DiscreteField(m, v), Error);
}

TEST(Assembly, OneDimensionalPoissonResidual) {
  const int N = 9;
  auto m = build_mesh(1, Box::unit(1), {N});
  const double h = 1.0 / (N - 1);
  auto op = p_laplacian(2, 1);
  const auto R = assemble_residual(*m, *op, [](const Vector&) { return -2.0; }, DiscreteField(m));
  ASSERT_EQ(R.size(), N - 2);
  for (int j = 0; j < R.size(); ++j) EXPECT_NEAR(R[j], -2.0 * h, 1e-15);
}

TEST(Assembly, OneDimensionalStiffness) {
  const int N = 7;
  auto m = build_mesh(1, Box::unit(1), {N});
  const double h = 1.0 / (N - 1);
  const Eigen::MatrixXd J = assemble_jacobian(*m, *p_laplacian(2, 1), DiscreteField(m));
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N - 2, N - 2);
  for (int i = 0; i < N - 2; ++i) {
    K(i, i) = 2.0 / h;
    if (i > 0) K(i, i - 1) = -1.0 / h;
    if (i + 1 < N - 2) K(i, i + 1) = -1.0 / h;
  }
  EXPECT_LT((J - K).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Assembly, JacobianMatchesDirectionalDifferences) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  auto b = [](const Vector& x) { return std::sin(3.0 * x[0]) - x[1]; };
  for (const auto& op : {p_laplacian(4), double_phase_x1()}) {
    const auto U = random_field(m, 3, 1.0);
    const auto J = assemble_jacobian(*m, *op, U);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N;
    Eigen::VectorXd d(m->num_dofs());
    for (auto& v : d) v = N(rng);
    const double t = 1e-6;
    const auto Rp = assemble_residual(*m, *op, b, DiscreteField::from_dofs(m, U.dofs() + t * d));
    const auto Rm = assemble_residual(*m, *op, b, DiscreteField::from_dofs(m, U.dofs() - t * d));
    const Eigen::VectorXd fd = (Rp - Rm) / (2.0 * t);
    const Eigen::VectorXd Jd = J * d;
    EXPECT_LE((Jd - fd).cwiseAbs().maxCoeff() / std::max(1.0, Jd.cwiseAbs().maxCoeff()), 1e-6);
  }
}

TEST(Assembly, SymmetricJacobianForGradientFluxes) {
  auto m = build_mesh(2, Box::unit(2), {8, 6});
  const Eigen::MatrixXd J = assemble_jacobian(*m, *p_laplacian(3), random_field(m, 5, 2.0));
  EXPECT_LT((J - J.transpose()).cwiseAbs().maxCoeff(), 1e-12 * J.cwiseAbs().maxCoeff());
}

TEST(Assembly, ThreadCountDoesNotChangeBits) {
  auto m = build_mesh(2, Box::unit(2), {33, 33});
  auto op = double_phase_x1();
  const auto U = random_field(m, 8, 1.0);
  auto b = [](const Vector& x) { return x[0] * x[1]; };
  set_thread_count(1);
  const auto R1 = assemble_residual(*m, *op, b, U);
  const Eigen::MatrixXd J1 = assemble_jacobian(*m, *op, U);
  set_thread_count(4);
  const auto R4 = assemble_residual(*m, *op, b, U);
  const Eigen::MatrixXd J4 = assemble_jacobian(*m, *op, U);
  set_thread_count(0);
  EXPECT_TRUE(R1 == R4);
  EXPECT_TRUE(J1 == J4);
}

TEST(Assembly, WeightedStiffnessNeedsScalarWeight) {
  FamilyParams fp;
  fp.exponents = {2.0, 2.5};
  auto op = make_family(Family::Anisotropic, fp);
  auto m = build_mesh(2, Box::unit(2), {5, 5});
  EXPECT_THROW(assemble_weighted_stiffness(*m, *op, DiscreteField(m)), Error);
}

TEST(Norms, TentHasUnitGradient) {
  auto m = build_mesh(1, Box::unit(1), {17});
  auto U = DiscreteField::interpolate(m, [](const Vector& x) { return std::min(x[0], 1.0 - x[0]); });
  for (double p : {1.0, 2.0, 3.3, 7.0}) EXPECT_NEAR(lp_gradient_norm(U, p), 1.0, 1e-14);
}

TEST(Norms, SecondDifferencesOfQuadratic) {
  // u = x(1-x) has second difference -2 at every interior node.
  auto m = build_mesh(1, Box::unit(1), {11});
  auto U = DiscreteField::interpolate(m, [](const Vector& x) { return x[0] * (1.0 - x[0]); });
  const double h = 0.1;
  int count = 0;
  for (int n = 0; n < m->num_nodes(); ++n) {
    if (!m->is_boundary(n) && m->box().distance_to_boundary(m->node(n)) >= 0.25) ++count;
  }
  EXPECT_NEAR(h2_seminorm_interior(U, 0.25), 2.0 * std::sqrt(count * h), 1e-12);
}

TEST(Norms, LinearInteriorHasNoSecondDerivative) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m->num_nodes());
  for (int n = 0; n < m->num_nodes(); ++n) {
    if (!m->is_boundary(n)) v[n] = 2.0 * m->node(n)[0] - m->node(n)[1];
  }
  const DiscreteField U(m, v);
  EXPECT_NEAR(h2_seminorm_interior(U, 0.25), 0.0, 1e-12);
  EXPECT_NEAR(linf_gradient_interior(U, 0.25), std::sqrt(5.0), 1e-12);
}

TEST(Norms, HomogeneityAndValidation) {
  auto m = build_mesh(2, Box::unit(2), {9, 9});
  const auto U = random_field(m, 2, 1.0);
  const auto U2 = DiscreteField::from_dofs(m, 2.0 * U.dofs());
  EXPECT_NEAR(lp_gradient_norm(U2, 2.2), 2.0 * lp_gradient_norm(U, 2.2), 1e-12);
  EXPECT_NEAR(lp_norm(U2, 3.0), 2.0 * lp_norm(U, 3.0), 1e-12);
  EXPECT_NEAR(w12_norm(U2), 2.0 * w12_norm(U), 1e-12);
  EXPECT_THROW(linf_interior(U, 0.6), Error);
  EXPECT_THROW(lp_gradient_norm(U, 0.5), Error);
}
