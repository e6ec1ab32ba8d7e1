#include "pq/error.hpp"
#include "pq/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pq {

namespace {

// w(x, r) with r = |xi|^2, its r-derivative and its x-gradient.
struct RadialWeight {
  double w = 0.0;
  double dw_dr = 0.0;
  Vector dw_dx;
};

// Fluxes of the form a = w(x, |xi|^2) xi, u-independent.
class RadialOperator : public Operator {
 public:
  using Operator::Operator;

  std::optional<double> scalar_weight(const Vector& x, double, const Vector& xi) const override {
    return weight(x, xi.squaredNorm()).w;
  }

  // Spectral bound of the Jacobian w I + 2 w' xi xi^T at |xi|^2 = r.
  double jacobian_spectral_bound(const Vector& x, double r) const {
    const RadialWeight rw = weight(x, r);
    const double radial = r > 0.0 ? rw.w + 2.0 * rw.dw_dr * r : rw.w;
    return std::max(std::abs(rw.w), std::abs(radial));
  }

 protected:
  virtual RadialWeight weight(const Vector& x, double r) const = 0;

  Vector do_flux(const Vector& x, double, const Vector& xi) const override {
    return weight(x, xi.squaredNorm()).w * xi;
  }

  Matrix do_dflux_dxi(const Vector& x, double, const Vector& xi) const override {
    const int n = dim();
    const double r = xi.squaredNorm();
    const RadialWeight rw = weight(x, r);
    Matrix J = rw.w * Matrix::Identity(n, n);
    // At xi = 0 the rank-one term vanishes even where w' is unbounded.
    if (r > 0.0) J += 2.0 * rw.dw_dr * (xi * xi.transpose());
    return J;
  }

  Vector do_dflux_du(const Vector&, double, const Vector& xi) const override {
    return Vector::Zero(xi.size());
  }

  Vector do_dflux_dx(const Vector& x, double, const Vector& xi, int axis) const override {
    const double r = xi.squaredNorm();
    if (r == 0.0) return Vector::Zero(xi.size());
    return weight(x, r).dw_dx[axis] * xi;
  }
};

// (1+r)^s or r^s with s = (e-2)/2, plus d/dr.
struct Power {
  double value;
  double derivative;
};

Power nondegenerate_power(double r, double exponent) {
  const double s = 0.5 * (exponent - 2.0);
  const double base = std::pow(1.0 + r, s - 1.0);
  return {base * (1.0 + r), s * base};
}

Power degenerate_power(double r, double exponent) {
  const double s = 0.5 * (exponent - 2.0);
  if (s == 0.0) return {1.0, 0.0};
  if (r == 0.0) return {0.0, 0.0};
  const double base = std::pow(r, s - 1.0);
  return {base * r, s * base};
}

class PLaplacian final : public RadialOperator {
 public:
  PLaplacian(Box domain, StructuralConstants c, bool degenerate)
      : RadialOperator(std::move(domain), c,
                       degenerate ? Family::DegeneratePLaplacian : Family::PLaplacian),
        degenerate_(degenerate) {}

 protected:
  RadialWeight weight(const Vector& x, double r) const override {
    const Power pw = degenerate_ ? degenerate_power(r, p()) : nondegenerate_power(r, p());
    return {pw.value, pw.derivative, Vector::Zero(x.size())};
  }

 private:
  bool degenerate_;
};

class LogForm final : public RadialOperator {
 public:
  LogForm(Box domain, StructuralConstants c, bool degenerate)
      : RadialOperator(std::move(domain), c, degenerate ? Family::DegenerateLog : Family::Log),
        degenerate_(degenerate) {}

 protected:
  RadialWeight weight(const Vector& x, double r) const override {
    // log(1 + rho) rho'^((p-2)/2) with rho = r (degenerate) or 1 + r.
    const double shift = degenerate_ ? 1.0 : 2.0;
    const double L = std::log(shift + r);
    const Power pw = degenerate_ ? degenerate_power(r, p()) : nondegenerate_power(r, p());
    return {L * pw.value, pw.value / (shift + r) + L * pw.derivative, Vector::Zero(x.size())};
  }

 private:
  bool degenerate_;
};

class VariableExponent final : public RadialOperator {
 public:
  VariableExponent(Box domain, StructuralConstants c, ScalarField exponent, bool degenerate)
      : RadialOperator(std::move(domain), c,
                       degenerate ? Family::DegenerateVariableExponent : Family::VariableExponent),
        exponent_(std::move(exponent)),
        degenerate_(degenerate) {}

 protected:
  RadialWeight weight(const Vector& x, double r) const override {
    const double px = exponent_.value(x);
    const Power pw = degenerate_ ? degenerate_power(r, px) : nondegenerate_power(r, px);
    // d/dx_s rho^((p(x)-2)/2) = rho^(...) * log(rho)/2 * dp/dx_s.
    const double rho = degenerate_ ? r : 1.0 + r;
    Vector dw_dx = Vector::Zero(x.size());
    if (rho > 0.0) dw_dx = pw.value * 0.5 * std::log(rho) * exponent_.gradient(x);
    return {pw.value, pw.derivative, dw_dx};
  }

 private:
  ScalarField exponent_;
  bool degenerate_;
};

class DoublePhase final : public RadialOperator {
 public:
  DoublePhase(Box domain, StructuralConstants c, ScalarField weight, bool degenerate)
      : RadialOperator(std::move(domain), c,
                       degenerate ? Family::DegenerateDoublePhase : Family::DoublePhase),
        weight_(std::move(weight)),
        degenerate_(degenerate) {}

 protected:
  RadialWeight weight(const Vector& x, double r) const override {
    const Power lower = degenerate_ ? degenerate_power(r, p()) : nondegenerate_power(r, p());
    const Power upper = degenerate_ ? degenerate_power(r, q()) : nondegenerate_power(r, q());
    const double a = weight_.value(x);
    return {lower.value + a * upper.value, lower.derivative + a * upper.derivative,
            upper.value * weight_.gradient(x)};
  }

 private:
  ScalarField weight_;
  bool degenerate_;
};

// a^i = rho_i^((p_i-2)/2) xi_i with rho_i = 1 + xi_i^2 or xi_i^2.
class Anisotropic final : public Operator {
 public:
  Anisotropic(Box domain, StructuralConstants c, std::vector<double> exponents, bool degenerate)
      : Operator(std::move(domain), c,
                 degenerate ? Family::DegenerateAnisotropic : Family::Anisotropic),
        exponents_(std::move(exponents)),
        degenerate_(degenerate) {}

 protected:
  Vector do_flux(const Vector&, double, const Vector& xi) const override {
    Vector a(xi.size());
    for (int i = 0; i < xi.size(); ++i) a[i] = component(i, xi[i]).value * xi[i];
    return a;
  }

  Matrix do_dflux_dxi(const Vector&, double, const Vector& xi) const override {
    const int n = dim();
    Matrix J = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const double r = xi[i] * xi[i];
      const Power pw = component(i, xi[i]);
      J(i, i) = pw.value + (r > 0.0 ? 2.0 * pw.derivative * r : 0.0);
    }
    return J;
  }

  Vector do_dflux_du(const Vector&, double, const Vector& xi) const override {
    return Vector::Zero(xi.size());
  }

  Vector do_dflux_dx(const Vector&, double, const Vector& xi, int) const override {
    return Vector::Zero(xi.size());
  }

 private:
  Power component(int i, double xi_i) const {
    const double r = xi_i * xi_i;
    return degenerate_ ? degenerate_power(r, exponents_[i]) : nondegenerate_power(r, exponents_[i]);
  }

  std::vector<double> exponents_;
  bool degenerate_;
};

// sup over r >= 0 of the Jacobian spectral bound divided by
// (1+r)^((q-2)/2), on a dense logarithmic grid reaching r = 1e16.
double fit_radial_growth_constant(const RadialOperator& op, double q) {
  const Vector x = op.domain().center();
  double best = op.jacobian_spectral_bound(x, 0.0);
  constexpr int kSamples = 20000;
  for (int k = 0; k <= kSamples; ++k) {
    const double r = std::pow(10.0, -8.0 + 24.0 * k / kSamples);
    const double ratio = op.jacobian_spectral_bound(x, r) / std::pow(1.0 + r, 0.5 * (q - 2.0));
    best = std::max(best, ratio);
  }
  return best * (1.0 + 1e-3);
}

StructuralConstants base_constants(const FamilyParams& params, double p, double q) {
  StructuralConstants c;
  c.p = p;
  c.q = q;
  c.growth_alpha = params.growth_alpha;
  c.beta = params.beta;
  return c;
}

void apply_overrides(StructuralConstants& c, const FamilyParams& params) {
  if (params.m) c.m = *params.m;
  if (params.M) c.M = *params.M;
  raise_if(!(c.m > 0.0 && c.M > 0.0), ErrorCode::InvalidArgument, "m and M must be positive");
}

}  // namespace

OperatorPtr make_family(Family family, const FamilyParams& params) {
  const Box& domain = params.domain;
  const int n = domain.dim();

  switch (family) {
    case Family::PLaplacian:
    case Family::DegeneratePLaplacian: {
      const double q = params.q.value_or(params.p);
      require_admissible_exponents(params.p, q);
      StructuralConstants c = base_constants(params, params.p, q);
      c.m = 1.0;
      c.M = std::max(1.0, params.p - 1.0);
      apply_overrides(c, params);
      return std::make_shared<PLaplacian>(domain, c, family == Family::DegeneratePLaplacian);
    }

    case Family::Log:
    case Family::DegenerateLog: {
      raise_if(!params.q, ErrorCode::InvalidExponents, "log form needs an explicit q > p");
      const double q = *params.q;
      require_admissible_exponents(params.p, q);
      raise_if(!(q > params.p), ErrorCode::InvalidExponents,
               "log form grows faster than any |xi|^(p-1); need q > p");
      StructuralConstants c = base_constants(params, params.p, q);
      c.m = std::log(2.0);
      auto op = std::make_shared<LogForm>(domain, c, family == Family::DegenerateLog);
      if (!params.M) {
        c.M = fit_radial_growth_constant(*op, q);
        apply_overrides(c, params);
        return std::make_shared<LogForm>(domain, c, family == Family::DegenerateLog);
      }
      apply_overrides(c, params);
      return std::make_shared<LogForm>(domain, c, family == Family::DegenerateLog);
    }

    case Family::VariableExponent:
    case Family::DegenerateVariableExponent: {
      const auto [lo, hi] = probe_range(params.exponent, domain);
      double p = params.p;
      double q = params.q.value_or(p);
      if (params.exponent.is_constant()) {
        p = lo;
        q = hi;
      }
      require_admissible_exponents(p, q);
      constexpr double kProbeSlack = 1e-12;
      raise_if(lo < p - kProbeSlack || hi > q + kProbeSlack, ErrorCode::InvalidExponents,
               "p(x) leaves the declared range [" + std::to_string(p) + ", " + std::to_string(q) +
                   "] on the probe lattice (observed [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "])");
      StructuralConstants c = base_constants(params, p, q);
      c.m = 1.0;
      c.M = std::max(1.0, q - 1.0);
      apply_overrides(c, params);
      return std::make_shared<VariableExponent>(domain, c, params.exponent,
                                                family == Family::DegenerateVariableExponent);
    }

    case Family::Anisotropic:
    case Family::DegenerateAnisotropic: {
      raise_if(static_cast<int>(params.exponents.size()) != n, ErrorCode::DimensionMismatch,
               "anisotropic family needs one exponent per axis");
      const auto [pmin, pmax] = std::minmax_element(params.exponents.begin(), params.exponents.end());
      require_admissible_exponents(*pmin, *pmax);
      StructuralConstants c = base_constants(params, *pmin, *pmax);
      c.m = 1.0;
      c.M = std::max(1.0, *pmax - 1.0);
      apply_overrides(c, params);
      return std::make_shared<Anisotropic>(domain, c, params.exponents,
                                           family == Family::DegenerateAnisotropic);
    }

    case Family::DoublePhase:
    case Family::DegenerateDoublePhase: {
      const double q = params.q.value_or(params.p);
      require_admissible_exponents(params.p, q);
      const auto [amin, amax] = probe_range(params.weight, domain);
      raise_if(amin < 0.0, ErrorCode::NonnegativityViolation,
               "double-phase weight is negative at a probe point (min " + std::to_string(amin) +
                   ")");
      StructuralConstants c = base_constants(params, params.p, q);
      c.m = 1.0;
      c.M = (params.p - 1.0) + amax * (q - 1.0);
      apply_overrides(c, params);
      return std::make_shared<DoublePhase>(domain, c, params.weight,
                                           family == Family::DegenerateDoublePhase);
    }

    case Family::Regularized:
    case Family::Custom:
      break;
  }
  raise(ErrorCode::InvalidArgument, "make_family: not a built-in family");
}

}  // namespace pq
