#include "pq/assembly.hpp"
#include "pq/error.hpp"
#include "pq/parallel.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pq {

namespace {

using LocalVector = Eigen::Matrix<double, 3, 1>;
using LocalMatrix = Eigen::Matrix<double, 3, 3>;

void require_same_mesh(const Mesh& mesh, const DiscreteField& U) {
  raise_if(&U.mesh() != &mesh, ErrorCode::InvalidArgument, "field lives on a different mesh");
}

void require_finite(bool ok, int e, const char* what) {
  raise_if(!ok, ErrorCode::QuadratureFailure,
           std::string(what) + " is not finite at a quadrature point of element " +
               std::to_string(e));
}

// Element kernels run in parallel into per-element slots; the scatter below
// runs in element order so sums do not depend on the thread count.
template <class Local, class Kernel>
std::vector<Local> compute_locals(const Mesh& mesh, Kernel&& kernel) {
  std::vector<Local> locals(static_cast<std::size_t>(mesh.num_elements()));
  parallel_for(locals.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) locals[e] = kernel(static_cast<int>(e));
  });
  return locals;
}

Eigen::VectorXd scatter_vector(const Mesh& mesh, const std::vector<LocalVector>& locals) {
  Eigen::VectorXd R = Eigen::VectorXd::Zero(mesh.num_dofs());
  const int nv = mesh.vertices_per_element();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    for (int v = 0; v < nv; ++v) {
      const int d = mesh.dof(el[v]);
      if (d >= 0) R[d] += locals[e][v];
    }
  }
  return R;
}

SparseMatrix scatter_matrix(const Mesh& mesh, const std::vector<LocalMatrix>& locals) {
  const int nv = mesh.vertices_per_element();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_elements()) * nv * nv);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    for (int a = 0; a < nv; ++a) {
      const int row = mesh.dof(el[a]);
      if (row < 0) continue;
      for (int c = 0; c < nv; ++c) {
        const int col = mesh.dof(el[c]);
        if (col >= 0) triplets.emplace_back(row, col, locals[e](a, c));
      }
    }
  }
  SparseMatrix J(mesh.num_dofs(), mesh.num_dofs());
  J.setFromTriplets(triplets.begin(), triplets.end());
  return J;
}

}  // namespace

Eigen::VectorXd assemble_residual(const Mesh& mesh, const Operator& op, const RhsFunction& b,
                                  const DiscreteField& U) {
  require_same_mesh(mesh, U);
  raise_if(op.dim() != mesh.dim(), ErrorCode::DimensionMismatch,
           "operator and mesh dimensions differ");
  const int nv = mesh.vertices_per_element();
  const auto locals = compute_locals<LocalVector>(mesh, [&](int e) {
    LocalVector r = LocalVector::Zero();
    const Matrix& G = mesh.shape_gradients(e);
    const Vector du = U.gradient(e);
    const ElementQuadrature q = element_quadrature(mesh, e);
    for (int k = 0; k < q.count; ++k) {
      const Eigen::Vector3d phi = q.shape.row(k).transpose();
      const double u = U.value(e, phi);
      const Vector a = op.flux(q.points[k], u, du);
      require_finite(a.allFinite(), e, "flux");
      const double bk = b ? b(q.points[k]) : 0.0;
      require_finite(std::isfinite(bk), e, "right-hand side");
      for (int v = 0; v < nv; ++v) r[v] += q.weights[k] * (a.dot(G.col(v)) + bk * phi[v]);
    }
    return r;
  });
  return scatter_vector(mesh, locals);
}

SparseMatrix assemble_jacobian(const Mesh& mesh, const Operator& op, const DiscreteField& U) {
  require_same_mesh(mesh, U);
  raise_if(op.dim() != mesh.dim(), ErrorCode::DimensionMismatch,
           "operator and mesh dimensions differ");
  const int nv = mesh.vertices_per_element();
  const auto locals = compute_locals<LocalMatrix>(mesh, [&](int e) {
    LocalMatrix m = LocalMatrix::Zero();
    const Matrix& G = mesh.shape_gradients(e);
    const Vector du = U.gradient(e);
    const ElementQuadrature q = element_quadrature(mesh, e);
    for (int k = 0; k < q.count; ++k) {
      const Eigen::Vector3d phi = q.shape.row(k).transpose();
      const double u = U.value(e, phi);
      const Matrix A = op.dflux_dxi(q.points[k], u, du);
      const Vector Au = op.dflux_du(q.points[k], u, du);
      require_finite(A.allFinite() && Au.allFinite(), e, "flux derivative");
      for (int a = 0; a < nv; ++a) {
        for (int c = 0; c < nv; ++c) {
          m(a, c) += q.weights[k] *
                     (G.col(a).dot(A * G.col(c)) + G.col(a).dot(Au) * phi[c]);
        }
      }
    }
    return m;
  });
  return scatter_matrix(mesh, locals);
}

SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const Operator& op,
                                         const DiscreteField& U) {
  require_same_mesh(mesh, U);
  const int nv = mesh.vertices_per_element();
  const auto locals = compute_locals<LocalMatrix>(mesh, [&](int e) {
    LocalMatrix m = LocalMatrix::Zero();
    const Matrix& G = mesh.shape_gradients(e);
    const Vector du = U.gradient(e);
    const ElementQuadrature q = element_quadrature(mesh, e);
    for (int k = 0; k < q.count; ++k) {
      const Eigen::Vector3d phi = q.shape.row(k).transpose();
      const auto w = op.scalar_weight(q.points[k], U.value(e, phi), du);
      raise_if(!w, ErrorCode::Unsupported, "flux is not of scalar-weight form");
      require_finite(std::isfinite(*w), e, "weight");
      for (int a = 0; a < nv; ++a) {
        for (int c = 0; c < nv; ++c) m(a, c) += q.weights[k] * *w * G.col(a).dot(G.col(c));
      }
    }
    return m;
  });
  return scatter_matrix(mesh, locals);
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const RhsFunction& b) {
  const int nv = mesh.vertices_per_element();
  const auto locals = compute_locals<LocalVector>(mesh, [&](int e) {
    LocalVector r = LocalVector::Zero();
    const ElementQuadrature q = element_quadrature(mesh, e);
    for (int k = 0; k < q.count; ++k) {
      const double bk = b ? b(q.points[k]) : 0.0;
      require_finite(std::isfinite(bk), e, "right-hand side");
      for (int v = 0; v < nv; ++v) r[v] += q.weights[k] * bk * q.shape(k, v);
    }
    return r;
  });
  return scatter_vector(mesh, locals);
}

}  // namespace pq
