#pragma once

#include "pq/mesh.hpp"
#include "pq/operator.hpp"

#include <Eigen/SparseCore>

#include <functional>

namespace pq {

using RhsFunction = std::function<double(const Vector&)>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// R_j = int a(x, u_h, Du_h) . Dphi_j + b phi_j over interior hat functions.
/// Throws QuadratureFailure if the flux or b is non-finite at a quadrature point.
Eigen::VectorXd assemble_residual(const Mesh& mesh, const Operator& op, const RhsFunction& b,
                                  const DiscreteField& U);

/// dR/dU from dflux_dxi and dflux_du; sparsity is the node adjacency.
SparseMatrix assemble_jacobian(const Mesh& mesh, const Operator& op, const DiscreteField& U);

/// K_jk = int w(x, u_h, Du_h) Dphi_j . Dphi_k for scalar-weight fluxes.
/// Throws Unsupported if the operator has no scalar weight.
SparseMatrix assemble_weighted_stiffness(const Mesh& mesh, const Operator& op,
                                         const DiscreteField& U);

/// F_j = int b phi_j.
Eigen::VectorXd assemble_load(const Mesh& mesh, const RhsFunction& b);

// --- Norms ------------------------------------------------------------------

/// (int |Du_h|^p)^(1/p), exact for the piecewise-constant gradient.
double lp_gradient_norm(const DiscreteField& U, double p);
/// (int |u_h|^p)^(1/p) by element quadrature.
double lp_norm(const DiscreteField& U, double p);
/// max |Du_h| over elements whose centroid is at distance >= delta from the boundary.
double linf_gradient_interior(const DiscreteField& U, double delta);
/// max |U_i| over nodes at distance >= delta from the boundary.
double linf_interior(const DiscreteField& U, double delta);
/// Root-sum-square of nodal second difference quotients (uxx^2 + uyy^2 + 2 uxy^2)
/// times the cell measure, over nodes at distance >= delta from the boundary.
double h2_seminorm_interior(const DiscreteField& U, double delta);
/// (||u||_2^2 + ||Du||_2^2)^(1/2).
double w12_norm(const DiscreteField& U);

/// Same quantities restricted to a ball: elements by centroid, nodes by position.
double linf_gradient_ball(const DiscreteField& U, const Vector& center, double radius);
double h2_seminorm_ball(const DiscreteField& U, const Vector& center, double radius);
/// int over the ball (element centroids inside) of (1 + |Du_h|^2)^(s/2).
double energy_integral_ball(const DiscreteField& U, double s, const Vector& center, double radius);

}  // namespace pq
