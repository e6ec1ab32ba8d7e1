#include "pq/error.hpp"
#include "pq/mesh.hpp"

namespace pq {

DiscreteField::DiscreteField(MeshPtr mesh)
    : mesh_(std::move(mesh)), values_(Eigen::VectorXd::Zero(mesh_->num_nodes())) {}

DiscreteField::DiscreteField(MeshPtr mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  raise_if(values_.size() != mesh_->num_nodes(), ErrorCode::DimensionMismatch,
           "nodal vector length differs from node count");
  for (int i = 0; i < mesh_->num_nodes(); ++i) {
    raise_if(mesh_->is_boundary(i) && values_[i] != 0.0, ErrorCode::InvalidArgument,
             "discrete field must vanish on the boundary");
  }
}

DiscreteField DiscreteField::interpolate(MeshPtr mesh, const ScalarFunction& f) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh->num_nodes());
  for (int i = 0; i < mesh->num_nodes(); ++i) {
    if (!mesh->is_boundary(i)) v[i] = f(mesh->node(i));
  }
  return DiscreteField(std::move(mesh), std::move(v));
}

DiscreteField DiscreteField::from_dofs(MeshPtr mesh, const Eigen::VectorXd& dofs) {
  DiscreteField u(std::move(mesh));
  u.set_dofs(dofs);
  return u;
}

Eigen::VectorXd DiscreteField::dofs() const {
  Eigen::VectorXd d(mesh_->num_dofs());
  for (int k = 0; k < mesh_->num_dofs(); ++k) d[k] = values_[mesh_->dof_node(k)];
  return d;
}

void DiscreteField::set_dofs(const Eigen::VectorXd& dofs) {
  raise_if(dofs.size() != mesh_->num_dofs(), ErrorCode::DimensionMismatch,
           "dof vector length differs from interior node count");
  for (int k = 0; k < mesh_->num_dofs(); ++k) values_[mesh_->dof_node(k)] = dofs[k];
}

Vector DiscreteField::gradient(int e) const {
  const auto& el = mesh_->element(e);
  const Matrix& G = mesh_->shape_gradients(e);
  Vector g = Vector::Zero(mesh_->dim());
  for (int v = 0; v < mesh_->vertices_per_element(); ++v) g += values_[el[v]] * G.col(v);
  return g;
}

double DiscreteField::value(int e, const Eigen::Vector3d& shape_values) const {
  const auto& el = mesh_->element(e);
  double s = 0.0;
  for (int v = 0; v < mesh_->vertices_per_element(); ++v) s += values_[el[v]] * shape_values[v];
  return s;
}

}  // namespace pq
