#include "pq/types.hpp"

#include "pq/error.hpp"

#include <algorithm>
#include <limits>

namespace pq {

Box::Box(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  raise_if(lo.size() != hi.size() || lo.size() < 1 || lo.size() > kMaxDim,
           ErrorCode::DimensionMismatch, "box corners must have equal dimension in [1, 3]");
}

Box Box::unit(int dim) {
  return Box(Vector::Zero(dim), Vector::Ones(dim));
}

double Box::min_width() const {
  double w = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim(); ++a) w = std::min(w, width(a));
  return w;
}

double Box::measure() const {
  double m = 1.0;
  for (int a = 0; a < dim(); ++a) m *= width(a);
  return m;
}

bool Box::contains(const Vector& x) const {
  if (x.size() != lo.size()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  }
  return true;
}

bool Box::strictly_contains(const Box& inner) const {
  if (inner.dim() != dim()) return false;
  for (int a = 0; a < dim(); ++a) {
    if (!(inner.lo[a] > lo[a] && inner.hi[a] < hi[a])) return false;
  }
  return true;
}

double Box::distance_to_boundary(const Vector& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim(); ++a) d = std::min({d, x[a] - lo[a], hi[a] - x[a]});
  return d;
}

}  // namespace pq
