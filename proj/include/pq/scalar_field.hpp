#pragma once

#include "pq/types.hpp"

#include <functional>

namespace pq {

/// A smooth (or Lipschitz) scalar function of x with its gradient. Used for
/// variable exponents p(x) and double-phase weights a(x).
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  ScalarField();  // constant zero

  static ScalarField constant(double value);
  static ScalarField affine(double offset, Vector gradient);
  /// slope * max(0, x[axis] - offset): Lipschitz, vanishes on a slab.
  static ScalarField ramp(int axis, double offset, double slope);
  static ScalarField custom(ValueFn value, GradientFn gradient);

  [[nodiscard]] double value(const Vector& x) const { return value_(x); }
  [[nodiscard]] Vector gradient(const Vector& x) const { return gradient_(x); }
  [[nodiscard]] bool is_constant() const noexcept { return constant_; }

 private:
  ScalarField(ValueFn value, GradientFn gradient, bool constant);

  ValueFn value_;
  GradientFn gradient_;
  bool constant_ = false;
};

/// Probes f on the (points_per_axis)^n lattice spanning the closed box
/// (corners included) and returns {min, max}.
std::pair<double, double> probe_range(const ScalarField& f, const Box& box, int points_per_axis = 32);

}  // namespace pq
