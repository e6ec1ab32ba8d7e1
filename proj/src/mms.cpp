#include "pq/mms.hpp"

#include <cmath>
#include <limits>

namespace pq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kProbes = 16;

ExactSolution sine2d() {
  return {"sine2d", Box::unit(2),
          [](const Vector& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); },
          [](const Vector& x) {
            return make_vector({kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
                                kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1])});
          },
          [](const Vector& x) {
            const double s0 = std::sin(kPi * x[0]), c0 = std::cos(kPi * x[0]);
            const double s1 = std::sin(kPi * x[1]), c1 = std::cos(kPi * x[1]);
            Matrix H(2, 2);
            H << -kPi * kPi * s0 * s1, kPi * kPi * c0 * c1, kPi * kPi * c0 * c1,
                -kPi * kPi * s0 * s1;
            return H;
          }};
}

ExactSolution bubble2d() {
  return {"bubble2d", Box::unit(2),
          [](const Vector& x) { return 16.0 * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]); },
          [](const Vector& x) {
            const double gx = x[0] * (1.0 - x[0]), gy = x[1] * (1.0 - x[1]);
            return make_vector({16.0 * (1.0 - 2.0 * x[0]) * gy, 16.0 * gx * (1.0 - 2.0 * x[1])});
          },
          [](const Vector& x) {
            const double gx = x[0] * (1.0 - x[0]), gy = x[1] * (1.0 - x[1]);
            const double mixed = 16.0 * (1.0 - 2.0 * x[0]) * (1.0 - 2.0 * x[1]);
            Matrix H(2, 2);
            H << -32.0 * gy, mixed, mixed, -32.0 * gx;
            return H;
          }};
}

ExactSolution quadratic1d() {
  return {"quadratic1d", Box::unit(1), [](const Vector& x) { return x[0] * (1.0 - x[0]); },
          [](const Vector& x) { return make_vector({1.0 - 2.0 * x[0]}); },
          [](const Vector&) {
            Matrix H(1, 1);
            H(0, 0) = -2.0;
            return H;
          }};
}

ExactSolution sine1d() {
  return {"sine1d", Box::unit(1), [](const Vector& x) { return std::sin(kPi * x[0]); },
          [](const Vector& x) { return make_vector({kPi * std::cos(kPi * x[0])}); },
          [](const Vector& x) {
            Matrix H(1, 1);
            H(0, 0) = -kPi * kPi * std::sin(kPi * x[0]);
            return H;
          }};
}

Vector flux_along(const Operator& op, const ExactSolution& ex, const Vector& y) {
  return op.flux(y, ex.u(y), ex.du(y));
}

double analytic_divergence(const Operator& op, const ExactSolution& ex, const Vector& x) {
  const double u = ex.u(x);
  const Vector xi = ex.du(x);
  const Matrix H = ex.hessian(x);
  const Matrix J = op.dflux_dxi(x, u, xi);
  double b = op.dflux_du(x, u, xi).dot(xi) + (J * H).trace();
  for (int s = 0; s < op.dim(); ++s) b += op.dflux_dx(x, u, xi, s)[s];
  return b;
}

// 16 interior probes on a regular lattice plus 16 boundary probes.
std::vector<Vector> interior_probes(const Box& box) {
  std::vector<Vector> out;
  const int n = box.dim();
  const int per_axis = n == 1 ? kProbes : 4;
  for (int j = 0; j < (n == 1 ? 1 : per_axis); ++j) {
    for (int i = 0; i < per_axis; ++i) {
      Vector x(n);
      x[0] = box.lo[0] + box.width(0) * (i + 0.5) / per_axis;
      if (n == 2) x[1] = box.lo[1] + box.width(1) * (j + 0.37) / per_axis;
      out.push_back(x);
    }
  }
  return out;
}

std::vector<Vector> boundary_probes(const Box& box) {
  std::vector<Vector> out;
  if (box.dim() == 1) {
    out.push_back(box.lo);
    out.push_back(box.hi);
    return out;
  }
  for (int k = 0; k < 4; ++k) {
    const double t = (k + 0.3) / 4.0;
    for (int side = 0; side < 4; ++side) {
      Vector x = box.lo;
      const int axis = side % 2;
      const int other = 1 - axis;
      x[other] = box.lo[other] + t * box.width(other);
      x[axis] = side < 2 ? box.lo[axis] : box.hi[axis];
      out.push_back(x);
    }
  }
  return out;
}

void spot_check(const Operator& op, const ExactSolution& ex, const RhsFunction& b, bool analytic,
                double h_div) {
  const Box& box = ex.domain;
  for (const Vector& x : boundary_probes(box)) {
    raise_if(std::abs(ex.u(x)) > 1e-12, ErrorCode::InconsistentExactData,
             ex.name + ": exact solution does not vanish on the boundary");
  }
  for (const Vector& x : interior_probes(box)) {
    const Vector du = ex.du(x);
    for (int a = 0; a < box.dim(); ++a) {
      const double h = 1e-6 * box.width(a);
      Vector plus = x, minus = x;
      plus[a] += h;
      minus[a] -= h;
      const double fd = (ex.u(plus) - ex.u(minus)) / (2.0 * h);
      raise_if(std::abs(fd - du[a]) > 1e-5 * std::max(1.0, std::abs(du[a])),
               ErrorCode::InconsistentExactData, ex.name + ": gradient disagrees with u");
    }
    const double bx = b(x);
    // Analytic b against the divergence at h_div; numeric b against half the step.
    const double ref = numeric_divergence(op, ex, x, analytic ? h_div : 0.5 * h_div);
    const double tol = analytic ? 1e-6 : 1e-5;
    raise_if(!std::isfinite(bx) || std::abs(bx - ref) > tol * std::max(1.0, std::abs(ref)),
             ErrorCode::InconsistentExactData,
             ex.name + ": right-hand side disagrees with the divergence of the flux");
  }
}

// Refines element e once (4 triangles or 2 segments) and applies the base rule
// on each piece. Calls f(point, weight).
template <class F>
void refined_quadrature(const Mesh& mesh, int e, F&& f) {
  const auto& el = mesh.element(e);
  if (mesh.dim() == 1) {
    const Vector& a = mesh.node(el[0]);
    const Vector& b = mesh.node(el[1]);
    const double half = 0.5 * mesh.element_measure(e);
    const double g = 0.5 / std::sqrt(3.0);
    for (int piece = 0; piece < 2; ++piece) {
      for (double t : {0.5 - g, 0.5 + g}) {
        const double s = 0.5 * (piece + t);
        f(Vector((1.0 - s) * a + s * b), 0.5 * half);
      }
    }
    return;
  }
  const Vector& v0 = mesh.node(el[0]);
  const Vector& v1 = mesh.node(el[1]);
  const Vector& v2 = mesh.node(el[2]);
  const Vector m01 = 0.5 * (v0 + v1), m12 = 0.5 * (v1 + v2), m20 = 0.5 * (v2 + v0);
  const std::array<std::array<Vector, 3>, 4> pieces{{{v0, m01, m20}, {m01, v1, m12},
                                                     {m20, m12, v2}, {m01, m12, m20}}};
  const double w = mesh.element_measure(e) / 12.0;  // quarter area / 3 points
  for (const auto& t : pieces) {
    for (int k = 0; k < 3; ++k) f(Vector(0.5 * (t[(k + 1) % 3] + t[(k + 2) % 3])), w);
  }
}

}  // namespace

ExactSolution builtin_case(const std::string& name) {
  if (name == "sine2d") return sine2d();
  if (name == "quadratic1d") return quadratic1d();
  if (name == "bubble2d") return bubble2d();
  if (name == "sine1d") return sine1d();
  raise(ErrorCode::InvalidArgument, "unknown manufactured case '" + name + "'");
}

std::vector<std::string> builtin_case_names() {
  return {"sine2d", "quadratic1d", "bubble2d", "sine1d"};
}

double numeric_divergence(const Operator& op, const ExactSolution& exact, const Vector& x,
                          double h) {
  double div = 0.0;
  for (int s = 0; s < op.dim(); ++s) {
    Vector plus = x, minus = x;
    plus[s] += h;
    minus[s] -= h;
    div += (flux_along(op, exact, plus)[s] - flux_along(op, exact, minus)[s]) / (2.0 * h);
  }
  return div;
}

ManufacturedCase make_manufactured(const OperatorPtr& op, const ExactSolution& exact) {
  raise_if(!op, ErrorCode::InvalidArgument, "null operator");
  raise_if(op->dim() != exact.domain.dim(), ErrorCode::DimensionMismatch,
           "operator and exact solution dimensions differ");
  raise_if(!exact.u || !exact.du, ErrorCode::InvalidArgument, "exact solution needs u and du");

  ManufacturedCase mc;
  mc.exact = exact;
  const double h_div = 1e-4 * exact.domain.min_width();
  const bool analytic = op->has_analytic_derivatives() && static_cast<bool>(exact.hessian);
  if (analytic) {
    mc.provenance = "analytic";
    mc.b = [op, exact](const Vector& x) { return analytic_divergence(*op, exact, x); };
  } else {
    mc.provenance = "numeric-divergence";
    mc.b = [op, exact, h_div](const Vector& x) { return numeric_divergence(*op, exact, x, h_div); };
  }
  spot_check(*op, exact, mc.b, analytic, h_div);
  return mc;
}

FieldError field_error(const DiscreteField& U, const ExactSolution& exact) {
  const Mesh& mesh = U.mesh();
  FieldError err;
  double l2 = 0.0;
  double h1 = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Vector g = U.gradient(e);
    const int v0 = mesh.element(e)[0];
    const Vector& x0 = mesh.node(v0);
    const double u0 = U.values()[v0];
    refined_quadrature(mesh, e, [&](const Vector& y, double w) {
      const double diff = u0 + g.dot(y - x0) - exact.u(y);
      l2 += w * diff * diff;
      h1 += w * (g - exact.du(y)).squaredNorm();
    });
  }
  err.l2 = std::sqrt(l2);
  err.w12 = std::sqrt(l2 + h1);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    err.nodal = std::max(err.nodal, std::abs(U.values()[i] - exact.u(mesh.node(i))));
  }
  return err;
}

std::vector<ConvergenceRow> convergence_study(const OperatorPtr& op, const ManufacturedCase& mc,
                                              const std::vector<int>& grid_sizes,
                                              const NewtonConfig& cfg) {
  raise_if(grid_sizes.size() < 3, ErrorCode::InvalidArgument, "need at least 3 grid sizes");
  for (std::size_t k = 1; k < grid_sizes.size(); ++k) {
    raise_if(grid_sizes[k] <= grid_sizes[k - 1], ErrorCode::InvalidArgument,
             "grid sizes must be strictly increasing");
  }
  const Box& box = mc.exact.domain;
  const int dim = box.dim();
  std::vector<ConvergenceRow> rows;
  for (int N : grid_sizes) {
    const MeshPtr mesh = build_mesh(dim, box, std::vector<int>(static_cast<std::size_t>(dim), N));
    const SolveResult sol = newton_solve(*op, mc.b, DiscreteField(mesh), cfg);
    const FieldError err = field_error(sol.U, mc.exact);
    ConvergenceRow row;
    row.nodes = N;
    row.h = mesh->max_spacing();
    row.l2_error = err.l2;
    row.w12_error = err.w12;
    row.nodal_error = err.nodal;
    row.iterations = sol.stats.iterations;
    row.l2_order = std::numeric_limits<double>::quiet_NaN();
    row.w12_order = std::numeric_limits<double>::quiet_NaN();
    if (!rows.empty()) {
      const auto& prev = rows.back();
      const double hr = std::log(prev.h / row.h);
      row.l2_order = std::log(prev.l2_error / row.l2_error) / hr;
      row.w12_order = std::log(prev.w12_error / row.w12_error) / hr;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pq
