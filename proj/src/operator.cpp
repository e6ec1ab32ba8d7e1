#include "pq/operator.hpp"

#include "pq/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pq {

namespace {

constexpr double kFdRelativeStep = 1e-5;

std::string fmt_exponents(double p, double q) {
  return "p=" + std::to_string(p) + ", q=" + std::to_string(q);
}

}  // namespace

std::string_view family_name(Family family) noexcept {
  switch (family) {
    case Family::PLaplacian: return "p_laplacian";
    case Family::DegeneratePLaplacian: return "degenerate_p_laplacian";
    case Family::Log: return "log";
    case Family::DegenerateLog: return "degenerate_log";
    case Family::VariableExponent: return "variable_exponent";
    case Family::DegenerateVariableExponent: return "degenerate_variable_exponent";
    case Family::Anisotropic: return "anisotropic";
    case Family::DegenerateAnisotropic: return "degenerate_anisotropic";
    case Family::DoublePhase: return "double_phase";
    case Family::DegenerateDoublePhase: return "degenerate_double_phase";
    case Family::Regularized: return "regularized";
    case Family::Custom: return "custom";
  }
  return "custom";
}

std::optional<Family> family_from_name(std::string_view name) noexcept {
  for (Family f : {Family::PLaplacian, Family::DegeneratePLaplacian, Family::Log,
                   Family::DegenerateLog, Family::VariableExponent,
                   Family::DegenerateVariableExponent, Family::Anisotropic,
                   Family::DegenerateAnisotropic, Family::DoublePhase,
                   Family::DegenerateDoublePhase}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

void require_admissible_exponents(double p, double q) {
  raise_if(!(std::isfinite(p) && std::isfinite(q)), ErrorCode::InvalidExponents,
           "exponents must be finite");
  raise_if(!(p >= 2.0), ErrorCode::InvalidExponents, "need p >= 2 (" + fmt_exponents(p, q) + ")");
  raise_if(!(q >= p), ErrorCode::InvalidExponents, "need q >= p (" + fmt_exponents(p, q) + ")");
  raise_if(!(q < p + 1.0), ErrorCode::InvalidExponents,
           "need q < p + 1 (" + fmt_exponents(p, q) + ")");
}

// --- Operator ---------------------------------------------------------------

Operator::Operator(Box domain, StructuralConstants constants, Family family)
    : domain_(std::move(domain)), constants_(constants), family_(family) {}

void Operator::check_args(const Vector& x, const Vector& xi) const {
  if (xi.size() != dim() || x.size() != dim()) {
    raise(ErrorCode::DimensionMismatch, "operator of dimension " + std::to_string(dim()) +
                                            " evaluated with |x|=" + std::to_string(x.size()) +
                                            ", |xi|=" + std::to_string(xi.size()));
  }
}

Vector Operator::flux(const Vector& x, double u, const Vector& xi) const {
  check_args(x, xi);
  return do_flux(x, u, xi);
}

Matrix Operator::dflux_dxi(const Vector& x, double u, const Vector& xi) const {
  check_args(x, xi);
  return do_dflux_dxi(x, u, xi);
}

Vector Operator::dflux_du(const Vector& x, double u, const Vector& xi) const {
  check_args(x, xi);
  return do_dflux_du(x, u, xi);
}

Vector Operator::dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const {
  check_args(x, xi);
  raise_if(axis < 0 || axis >= dim(), ErrorCode::DimensionMismatch, "axis index out of range");
  return do_dflux_dx(x, u, xi, axis);
}

std::optional<double> Operator::scalar_weight(const Vector&, double, const Vector&) const {
  return std::nullopt;
}

Matrix Operator::do_dflux_dxi(const Vector& x, double u, const Vector& xi) const {
  return fd_dflux_dxi(x, u, xi);
}

Vector Operator::do_dflux_du(const Vector& x, double u, const Vector& xi) const {
  return fd_dflux_du(x, u, xi);
}

Vector Operator::do_dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const {
  return fd_dflux_dx(x, u, xi, axis);
}

Matrix Operator::fd_dflux_dxi(const Vector& x, double u, const Vector& xi) const {
  const int n = dim();
  const double h = kFdRelativeStep * std::max(1.0, xi.norm());
  Matrix J(n, n);
  for (int j = 0; j < n; ++j) {
    Vector plus = xi;
    Vector minus = xi;
    plus[j] += h;
    minus[j] -= h;
    J.col(j) = (do_flux(x, u, plus) - do_flux(x, u, minus)) / (2.0 * h);
  }
  return J;
}

Vector Operator::fd_dflux_du(const Vector& x, double u, const Vector& xi) const {
  const double h = kFdRelativeStep * std::max(1.0, std::abs(u));
  return (do_flux(x, u + h, xi) - do_flux(x, u - h, xi)) / (2.0 * h);
}

Vector Operator::fd_dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const {
  const double h = kFdRelativeStep * std::max(1.0, std::abs(x[axis]));
  Vector plus = x;
  Vector minus = x;
  plus[axis] += h;
  minus[axis] -= h;
  return (do_flux(plus, u, xi) - do_flux(minus, u, xi)) / (2.0 * h);
}

// --- Regularization ---------------------------------------------------------

RegularizedOperator::RegularizedOperator(OperatorPtr base, double eps, double eps0)
    : Operator(base->domain(), base->constants(), Family::Regularized),
      base_(std::move(base)),
      eps_(eps),
      eps0_(eps0),
      base_q_(base_->q()) {
  auto& c = mutable_constants();
  c.q = base_q_ + eps_;
  // The added Jacobian is bounded by eps (q+eps-1) (1+|xi|^2)^((q+eps-2)/2).
  c.M = base_->constants().M + eps_ * (base_q_ + eps_ - 1.0);
}

Vector RegularizedOperator::do_flux(const Vector& x, double u, const Vector& xi) const {
  const double s = 0.5 * (base_q_ + eps_ - 2.0);
  return base_->flux(x, u, xi) + eps_ * std::pow(1.0 + xi.squaredNorm(), s) * xi;
}

Matrix RegularizedOperator::do_dflux_dxi(const Vector& x, double u, const Vector& xi) const {
  const int n = dim();
  const double s = 0.5 * (base_q_ + eps_ - 2.0);
  const double t = 1.0 + xi.squaredNorm();
  Matrix J = base_->dflux_dxi(x, u, xi);
  J += eps_ * std::pow(t, s) * Matrix::Identity(n, n);
  J += 2.0 * eps_ * s * std::pow(t, s - 1.0) * (xi * xi.transpose());
  return J;
}

Vector RegularizedOperator::do_dflux_du(const Vector& x, double u, const Vector& xi) const {
  return base_->dflux_du(x, u, xi);
}

Vector RegularizedOperator::do_dflux_dx(const Vector& x, double u, const Vector& xi,
                                        int axis) const {
  return base_->dflux_dx(x, u, xi, axis);
}

std::optional<double> RegularizedOperator::scalar_weight(const Vector& x, double u,
                                                         const Vector& xi) const {
  const auto w = base_->scalar_weight(x, u, xi);
  if (!w) return std::nullopt;
  return *w + eps_ * std::pow(1.0 + xi.squaredNorm(), 0.5 * (base_q_ + eps_ - 2.0));
}

std::shared_ptr<const RegularizedOperator> regularize(OperatorPtr op, double eps, double eps0) {
  raise_if(op == nullptr, ErrorCode::InvalidArgument, "null operator");
  raise_if(!(eps > 0.0 && eps <= eps0), ErrorCode::InvalidExponents,
           "need 0 < eps <= eps0 (eps=" + std::to_string(eps) + ", eps0=" + std::to_string(eps0) +
               ")");
  const double n = op->dim();
  raise_if(!((op->q() + eps0) / op->p() < 1.0 + 1.0 / n), ErrorCode::InvalidExponents,
           "need (q + eps0)/p < 1 + 1/n (q=" + std::to_string(op->q()) + ", eps0=" +
               std::to_string(eps0) + ", p=" + std::to_string(op->p()) + ")");
  return std::make_shared<RegularizedOperator>(std::move(op), eps, eps0);
}

// --- Custom -----------------------------------------------------------------

namespace {

class CustomOperator final : public Operator {
 public:
  explicit CustomOperator(CustomOperatorSpec spec)
      : Operator(spec.domain, spec.constants, Family::Custom), spec_(std::move(spec)) {
    raise_if(!spec_.flux, ErrorCode::InvalidArgument, "custom operator needs a flux");
  }

  std::optional<double> scalar_weight(const Vector& x, double u, const Vector& xi) const override {
    if (!spec_.scalar_weight) return std::nullopt;
    return spec_.scalar_weight(x, u, xi);
  }

  bool has_analytic_derivatives() const override {
    return spec_.dflux_dxi && spec_.dflux_du && spec_.dflux_dx;
  }

 protected:
  Vector do_flux(const Vector& x, double u, const Vector& xi) const override {
    return spec_.flux(x, u, xi);
  }

  Matrix do_dflux_dxi(const Vector& x, double u, const Vector& xi) const override {
    if (spec_.dflux_dxi) return spec_.dflux_dxi(x, u, xi);
    require_fallback("dflux_dxi");
    return fd_dflux_dxi(x, u, xi);
  }

  Vector do_dflux_du(const Vector& x, double u, const Vector& xi) const override {
    if (spec_.dflux_du) return spec_.dflux_du(x, u, xi);
    require_fallback("dflux_du");
    return fd_dflux_du(x, u, xi);
  }

  Vector do_dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const override {
    if (spec_.dflux_dx) return spec_.dflux_dx(x, u, xi, axis);
    require_fallback("dflux_dx");
    return fd_dflux_dx(x, u, xi, axis);
  }

 private:
  void require_fallback(const char* what) const {
    raise_if(!spec_.allow_fd_fallback, ErrorCode::DerivativeUnavailable,
             std::string(what) + " not supplied and finite-difference fallback disabled");
  }

  CustomOperatorSpec spec_;
};

}  // namespace

OperatorPtr make_custom(CustomOperatorSpec spec) {
  return std::make_shared<CustomOperator>(std::move(spec));
}

}  // namespace pq
