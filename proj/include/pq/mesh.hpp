#pragma once

#include "pq/types.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <vector>

namespace pq {

/// Structured simplicial mesh of an interval or a rectangle on a tensor grid.
///
/// Node (i, j) has index i + j * nx. In 2D each cell is split into two
/// counterclockwise triangles; the diagonal alternates with the parity of
/// i + j (criss-cross). In 1D elements are segments. Unknowns are the
/// interior nodes, numbered in node order.
class Mesh {
 public:
  static constexpr int kMaxVertices = 3;
  using Element = std::array<int, kMaxVertices>;

  Mesh(int dim, Box box, std::vector<int> nodes_per_axis);

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const Box& box() const noexcept { return box_; }
  [[nodiscard]] int nodes_along(int axis) const { return nodes_[axis]; }
  [[nodiscard]] const std::vector<int>& nodes_per_axis() const noexcept { return nodes_; }
  [[nodiscard]] double spacing(int axis) const { return h_[axis]; }
  [[nodiscard]] double max_spacing() const;

  [[nodiscard]] int num_nodes() const noexcept { return static_cast<int>(coords_.size()); }
  [[nodiscard]] const Vector& node(int i) const { return coords_[i]; }
  [[nodiscard]] bool is_boundary(int i) const { return boundary_[i] != 0; }
  [[nodiscard]] std::vector<int> boundary_nodes() const;

  /// Grid index -> node index. j is ignored in 1D.
  [[nodiscard]] int node_at(int i, int j = 0) const { return i + j * nodes_[0]; }
  [[nodiscard]] std::array<int, 2> grid_index(int node) const;

  [[nodiscard]] int num_elements() const noexcept { return static_cast<int>(elements_.size()); }
  [[nodiscard]] int vertices_per_element() const noexcept { return dim_ + 1; }
  [[nodiscard]] const Element& element(int e) const { return elements_[e]; }
  [[nodiscard]] double element_measure(int e) const { return measure_[e]; }
  [[nodiscard]] Vector element_centroid(int e) const;
  /// Gradients of the element's hat functions, one column per local vertex.
  [[nodiscard]] const Matrix& shape_gradients(int e) const { return grads_[e]; }

  [[nodiscard]] int num_dofs() const noexcept { return static_cast<int>(dof_to_node_.size()); }
  /// -1 for boundary nodes.
  [[nodiscard]] int dof(int node) const { return node_to_dof_[node]; }
  [[nodiscard]] int dof_node(int d) const { return dof_to_node_[d]; }

 private:
  int dim_;
  Box box_;
  std::vector<int> nodes_;
  std::array<double, 2> h_{};
  std::vector<Vector> coords_;
  std::vector<char> boundary_;
  std::vector<Element> elements_;
  std::vector<double> measure_;
  std::vector<Matrix> grads_;
  std::vector<int> node_to_dof_;
  std::vector<int> dof_to_node_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Throws MeshError for dim outside {1, 2}, a degenerate box, or fewer than 3
/// nodes along any axis.
MeshPtr build_mesh(int dim, const Box& box, const std::vector<int>& nodes_per_axis);

/// Quadrature on one element: points in physical coordinates, weights summing
/// to the element measure, and hat-function values (rows = points).
struct ElementQuadrature {
  int count = 0;
  std::array<Vector, 3> points;
  std::array<double, 3> weights{};
  Eigen::Matrix<double, 3, 3> shape;  // shape(k, v) = phi_v(points[k])
};

/// Edge-midpoint rule on triangles, 2-point Gauss on segments. Both are exact
/// for quadratics.
ElementQuadrature element_quadrature(const Mesh& mesh, int e);

/// Nodal values of a continuous piecewise-linear function on a mesh. Boundary
/// values are held at exactly zero.
class DiscreteField {
 public:
  explicit DiscreteField(MeshPtr mesh);
  DiscreteField(MeshPtr mesh, Eigen::VectorXd values);

  /// Nodal interpolant of f with boundary values forced to zero.
  static DiscreteField interpolate(MeshPtr mesh, const ScalarFunction& f);
  static DiscreteField from_dofs(MeshPtr mesh, const Eigen::VectorXd& dofs);

  [[nodiscard]] const Mesh& mesh() const noexcept { return *mesh_; }
  [[nodiscard]] const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
  [[nodiscard]] const Eigen::VectorXd& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::VectorXd dofs() const;
  void set_dofs(const Eigen::VectorXd& dofs);

  /// Constant gradient of the field on element e.
  [[nodiscard]] Vector gradient(int e) const;
  /// Value at a point of element e given the hat-function values there.
  [[nodiscard]] double value(int e, const Eigen::Vector3d& shape_values) const;

 private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

}  // namespace pq
