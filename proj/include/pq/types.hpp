#pragma once

#include <Eigen/Core>

#include <functional>
#include <initializer_list>

namespace pq {

/// Largest space dimension supported by operators. Meshes are limited to 1D
/// and 2D; the structural checks work up to this bound.
inline constexpr int kMaxDim = 3;

/// Small fixed-capacity vector/matrix types: operator evaluation never
/// touches the heap.
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

inline Vector make_vector(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

using ScalarFunction = std::function<double(const Vector&)>;

/// Axis-aligned box domain.
struct Box {
  Vector lo;
  Vector hi;

  Box() = default;
  Box(Vector lo_, Vector hi_);

  static Box unit(int dim);

  [[nodiscard]] int dim() const noexcept { return static_cast<int>(lo.size()); }
  [[nodiscard]] double width(int axis) const { return hi[axis] - lo[axis]; }
  [[nodiscard]] double min_width() const;
  [[nodiscard]] double measure() const;
  [[nodiscard]] Vector center() const { return 0.5 * (lo + hi); }
  [[nodiscard]] bool contains(const Vector& x) const;
  /// True when the closure of `inner` lies in the open box.
  [[nodiscard]] bool strictly_contains(const Box& inner) const;
  /// Distance from an interior point to the boundary of the box.
  [[nodiscard]] double distance_to_boundary(const Vector& x) const;
};

}  // namespace pq
