#include "pq/scalar_field.hpp"

#include "pq/error.hpp"

#include <algorithm>
#include <limits>

namespace pq {

ScalarField::ScalarField() : ScalarField(constant(0.0)) {}

ScalarField::ScalarField(ValueFn value, GradientFn gradient, bool constant)
    : value_(std::move(value)), gradient_(std::move(gradient)), constant_(constant) {}

ScalarField ScalarField::constant(double value) {
  return ScalarField([value](const Vector&) { return value; },
                     [](const Vector& x) { return Vector(Vector::Zero(x.size())); }, true);
}

ScalarField ScalarField::affine(double offset, Vector gradient) {
  return ScalarField(
      [offset, gradient](const Vector& x) {
        raise_if(x.size() != gradient.size(), ErrorCode::DimensionMismatch,
                 "affine field gradient has wrong length");
        return offset + gradient.dot(x);
      },
      [gradient](const Vector&) { return gradient; }, gradient.isZero(0.0));
}

ScalarField ScalarField::ramp(int axis, double offset, double slope) {
  raise_if(axis < 0 || axis >= kMaxDim, ErrorCode::InvalidArgument, "ramp axis out of range");
  return ScalarField(
      [axis, offset, slope](const Vector& x) { return slope * std::max(0.0, x[axis] - offset); },
      [axis, offset, slope](const Vector& x) {
        Vector g = Vector::Zero(x.size());
        if (x[axis] > offset) g[axis] = slope;
        return g;
      },
      slope == 0.0);
}

ScalarField ScalarField::custom(ValueFn value, GradientFn gradient) {
  return ScalarField(std::move(value), std::move(gradient), false);
}

std::pair<double, double> probe_range(const ScalarField& f, const Box& box, int points_per_axis) {
  const int n = box.dim();
  long total = 1;
  for (int a = 0; a < n; ++a) total *= points_per_axis;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  Vector x(n);
  for (long k = 0; k < total; ++k) {
    long rest = k;
    for (int a = 0; a < n; ++a) {
      const int i = static_cast<int>(rest % points_per_axis);
      rest /= points_per_axis;
      x[a] = box.lo[a] + box.width(a) * i / (points_per_axis - 1);
    }
    const double v = f.value(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace pq
