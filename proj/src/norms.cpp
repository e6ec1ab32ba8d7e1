#include "pq/assembly.hpp"
#include "pq/error.hpp"

#include <algorithm>
#include <cmath>

namespace pq {

namespace {

void require_delta(const Mesh& mesh, double delta) {
  raise_if(!(delta > 0.0 && delta < 0.5 * mesh.box().min_width()), ErrorCode::InvalidArgument,
           "delta must lie in (0, half the smallest box width)");
}

template <class Select>
double max_gradient(const DiscreteField& U, Select&& selected) {
  const Mesh& mesh = U.mesh();
  double best = -1.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (selected(mesh.element_centroid(e))) best = std::max(best, U.gradient(e).norm());
  }
  raise_if(best < 0.0, ErrorCode::MeshError, "no element centroid in the selected region");
  return best;
}

// Sum of squared second difference quotients at selected interior nodes,
// weighted by the cell measure.
template <class Select>
double h2_squared(const DiscreteField& U, Select&& selected) {
  const Mesh& mesh = U.mesh();
  const auto& v = U.values();
  const double hx = mesh.spacing(0);
  const double hy = mesh.dim() == 2 ? mesh.spacing(1) : 1.0;
  const double cell = mesh.dim() == 2 ? hx * hy : hx;
  double sum = 0.0;
  int count = 0;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.is_boundary(n) || !selected(mesh.node(n))) continue;
    const auto [i, j] = mesh.grid_index(n);
    const double c = v[n];
    const double uxx = (v[mesh.node_at(i + 1, j)] - 2.0 * c + v[mesh.node_at(i - 1, j)]) / (hx * hx);
    double local = uxx * uxx;
    if (mesh.dim() == 2) {
      const double uyy =
          (v[mesh.node_at(i, j + 1)] - 2.0 * c + v[mesh.node_at(i, j - 1)]) / (hy * hy);
      const double uxy = (v[mesh.node_at(i + 1, j + 1)] - v[mesh.node_at(i + 1, j - 1)] -
                          v[mesh.node_at(i - 1, j + 1)] + v[mesh.node_at(i - 1, j - 1)]) /
                         (4.0 * hx * hy);
      local += uyy * uyy + 2.0 * uxy * uxy;
    }
    sum += local * cell;
    ++count;
  }
  raise_if(count == 0, ErrorCode::MeshError, "no interior node in the selected region");
  return sum;
}

auto in_ball(const Vector& center, double radius) {
  return [center, radius](const Vector& x) { return (x - center).norm() < radius; };
}

auto away_from_boundary(const Box& box, double delta) {
  return [&box, delta](const Vector& x) { return box.distance_to_boundary(x) >= delta; };
}

}  // namespace

double lp_gradient_norm(const DiscreteField& U, double p) {
  raise_if(!(p >= 1.0), ErrorCode::InvalidArgument, "need p >= 1");
  const Mesh& mesh = U.mesh();
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    sum += std::pow(U.gradient(e).norm(), p) * mesh.element_measure(e);
  }
  return std::pow(sum, 1.0 / p);
}

double lp_norm(const DiscreteField& U, double p) {
  raise_if(!(p >= 1.0), ErrorCode::InvalidArgument, "need p >= 1");
  const Mesh& mesh = U.mesh();
  double sum = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const ElementQuadrature q = element_quadrature(mesh, e);
    for (int k = 0; k < q.count; ++k) {
      sum += q.weights[k] * std::pow(std::abs(U.value(e, q.shape.row(k).transpose())), p);
    }
  }
  return std::pow(sum, 1.0 / p);
}

double linf_gradient_interior(const DiscreteField& U, double delta) {
  require_delta(U.mesh(), delta);
  return max_gradient(U, away_from_boundary(U.mesh().box(), delta));
}

double linf_interior(const DiscreteField& U, double delta) {
  const Mesh& mesh = U.mesh();
  require_delta(mesh, delta);
  double best = -1.0;
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.box().distance_to_boundary(mesh.node(n)) >= delta) {
      best = std::max(best, std::abs(U.values()[n]));
    }
  }
  raise_if(best < 0.0, ErrorCode::MeshError, "delta leaves no interior node");
  return best;
}

double h2_seminorm_interior(const DiscreteField& U, double delta) {
  require_delta(U.mesh(), delta);
  return std::sqrt(h2_squared(U, away_from_boundary(U.mesh().box(), delta)));
}

double w12_norm(const DiscreteField& U) {
  const double l2 = lp_norm(U, 2.0);
  const double g = lp_gradient_norm(U, 2.0);
  return std::sqrt(l2 * l2 + g * g);
}

double linf_gradient_ball(const DiscreteField& U, const Vector& center, double radius) {
  return max_gradient(U, in_ball(center, radius));
}

double h2_seminorm_ball(const DiscreteField& U, const Vector& center, double radius) {
  return std::sqrt(h2_squared(U, in_ball(center, radius)));
}

double energy_integral_ball(const DiscreteField& U, double s, const Vector& center,
                            double radius) {
  const Mesh& mesh = U.mesh();
  const auto inside = in_ball(center, radius);
  double sum = 0.0;
  int count = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    if (!inside(mesh.element_centroid(e))) continue;
    sum += std::pow(1.0 + U.gradient(e).squaredNorm(), 0.5 * s) * mesh.element_measure(e);
    ++count;
  }
  raise_if(count == 0, ErrorCode::MeshError, "no element centroid in the ball");
  return sum;
}

}  // namespace pq
