#include "pq/error.hpp"
#include "pq/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace pq {

Mesh::Mesh(int dim, Box box, std::vector<int> nodes_per_axis)
    : dim_(dim), box_(std::move(box)), nodes_(std::move(nodes_per_axis)) {
  raise_if(dim_ != 1 && dim_ != 2, ErrorCode::MeshError, "meshes are 1D or 2D");
  raise_if(box_.dim() != dim_, ErrorCode::MeshError, "box dimension differs from mesh dimension");
  raise_if(static_cast<int>(nodes_.size()) != dim_, ErrorCode::MeshError,
           "need one node count per axis");
  for (int a = 0; a < dim_; ++a) {
    raise_if(nodes_[a] < 3, ErrorCode::MeshError, "need at least 3 nodes per axis");
    raise_if(!(box_.width(a) > 0.0) || !std::isfinite(box_.width(a)), ErrorCode::MeshError,
             "degenerate box along axis " + std::to_string(a));
    h_[a] = box_.width(a) / (nodes_[a] - 1);
  }

  const int nx = nodes_[0];
  const int ny = dim_ == 2 ? nodes_[1] : 1;
  coords_.reserve(static_cast<std::size_t>(nx) * ny);
  boundary_.reserve(coords_.capacity());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      Vector x(dim_);
      // Last node pinned to hi so the box is reproduced exactly.
      x[0] = i == nx - 1 ? box_.hi[0] : box_.lo[0] + i * h_[0];
      bool on_boundary = i == 0 || i == nx - 1;
      if (dim_ == 2) {
        x[1] = j == ny - 1 ? box_.hi[1] : box_.lo[1] + j * h_[1];
        on_boundary = on_boundary || j == 0 || j == ny - 1;
      }
      coords_.push_back(x);
      boundary_.push_back(on_boundary ? 1 : 0);
    }
  }

  if (dim_ == 1) {
    for (int i = 0; i + 1 < nx; ++i) elements_.push_back({i, i + 1, -1});
  } else {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        const int a = node_at(i, j);
        const int b = node_at(i + 1, j);
        const int c = node_at(i + 1, j + 1);
        const int d = node_at(i, j + 1);
        if ((i + j) % 2 == 0) {
          elements_.push_back({a, b, c});
          elements_.push_back({a, c, d});
        } else {
          elements_.push_back({a, b, d});
          elements_.push_back({b, c, d});
        }
      }
    }
  }

  const int nv = dim_ + 1;
  measure_.reserve(elements_.size());
  grads_.reserve(elements_.size());
  for (const auto& el : elements_) {
    // Rows [1, x^T] per vertex; the inverse maps nodal values to (c, grad).
    Matrix A(nv, nv);
    for (int v = 0; v < nv; ++v) {
      A(v, 0) = 1.0;
      A.block(v, 1, 1, dim_) = coords_[el[v]].transpose();
    }
    const double det = A.determinant();
    const double measure = dim_ == 1 ? det : 0.5 * det;
    raise_if(!(measure > 0.0), ErrorCode::MeshError, "element with non-positive measure");
    measure_.push_back(measure);
    const Matrix inv = A.inverse();
    grads_.push_back(inv.bottomRows(dim_));
  }

  node_to_dof_.assign(coords_.size(), -1);
  for (int i = 0; i < num_nodes(); ++i) {
    if (!boundary_[i]) {
      node_to_dof_[i] = static_cast<int>(dof_to_node_.size());
      dof_to_node_.push_back(i);
    }
  }
}

double Mesh::max_spacing() const {
  double h = h_[0];
  if (dim_ == 2) h = std::max(h, h_[1]);
  return h;
}

std::vector<int> Mesh::boundary_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < num_nodes(); ++i) {
    if (boundary_[i]) out.push_back(i);
  }
  return out;
}

std::array<int, 2> Mesh::grid_index(int node) const {
  return {node % nodes_[0], node / nodes_[0]};
}

Vector Mesh::element_centroid(int e) const {
  Vector c = Vector::Zero(dim_);
  const int nv = vertices_per_element();
  for (int v = 0; v < nv; ++v) c += coords_[elements_[e][v]];
  return c / nv;
}

MeshPtr build_mesh(int dim, const Box& box, const std::vector<int>& nodes_per_axis) {
  return std::make_shared<const Mesh>(dim, box, nodes_per_axis);
}

ElementQuadrature element_quadrature(const Mesh& mesh, int e) {
  ElementQuadrature q;
  q.shape.setZero();
  const auto& el = mesh.element(e);
  const double measure = mesh.element_measure(e);
  if (mesh.dim() == 1) {
    const double g = 0.5 / std::sqrt(3.0);
    const Vector& a = mesh.node(el[0]);
    const Vector& b = mesh.node(el[1]);
    q.count = 2;
    for (int k = 0; k < 2; ++k) {
      const double t = 0.5 + (k == 0 ? -g : g);
      q.points[k] = (1.0 - t) * a + t * b;
      q.weights[k] = 0.5 * measure;
      q.shape(k, 0) = 1.0 - t;
      q.shape(k, 1) = t;
    }
  } else {
    q.count = 3;
    for (int k = 0; k < 3; ++k) {
      // Midpoint of the edge opposite vertex k.
      const int v1 = (k + 1) % 3;
      const int v2 = (k + 2) % 3;
      q.points[k] = 0.5 * (mesh.node(el[v1]) + mesh.node(el[v2]));
      q.weights[k] = measure / 3.0;
      q.shape(k, v1) = 0.5;
      q.shape(k, v2) = 0.5;
    }
  }
  return q;
}

}  // namespace pq
