#pragma once

#include "pq/scalar_field.hpp"
#include "pq/types.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace pq {

enum class Family {
  PLaplacian,
  DegeneratePLaplacian,
  Log,
  DegenerateLog,
  VariableExponent,
  DegenerateVariableExponent,
  Anisotropic,
  DegenerateAnisotropic,
  DoublePhase,
  DegenerateDoublePhase,
  Regularized,
  Custom,
};

std::string_view family_name(Family family) noexcept;
std::optional<Family> family_from_name(std::string_view name) noexcept;

/// Declared structural constants of a vector field a(x,u,xi).
///   ellipticity  sum_ij da^i/dxi_j l_i l_j >= m (1+|xi|^2)^((p-2)/2) |l|^2
///   growth       |da^i/dxi_j| <= M (1+|xi|^2)^((q-2)/2) + M |u|^alpha
///                |da^i/du|    <= M (1+|xi|^2)^((p+q-4)/4) + M |u|^(beta-1)
struct StructuralConstants {
  double p = 2.0;
  double q = 2.0;
  double m = 1.0;
  double M = 1.0;
  double growth_alpha = 0.0;
  double beta = 0.0;
};

/// Throws InvalidExponents unless 2 <= p <= q < p + 1.
void require_admissible_exponents(double p, double q);

/// A Caratheodory vector field a : Omega x R x R^n -> R^n with derivatives.
///
/// Evaluation is pure: an Operator may be shared across threads. Subclasses
/// override the do_* hooks; the default derivative hooks fall back to
/// centered finite differences of the flux with step 1e-5 * max(1, |arg|).
class Operator {
 public:
  Operator(Box domain, StructuralConstants constants, Family family);
  virtual ~Operator() = default;

  Operator(const Operator&) = delete;
  Operator& operator=(const Operator&) = delete;

  [[nodiscard]] int dim() const noexcept { return domain_.dim(); }
  [[nodiscard]] const Box& domain() const noexcept { return domain_; }
  [[nodiscard]] const StructuralConstants& constants() const noexcept { return constants_; }
  [[nodiscard]] double p() const noexcept { return constants_.p; }
  [[nodiscard]] double q() const noexcept { return constants_.q; }
  [[nodiscard]] Family family() const noexcept { return family_; }

  [[nodiscard]] Vector flux(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] Matrix dflux_dxi(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] Vector dflux_du(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] Vector dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const;

  /// Returns w when the flux has the form a = w(x,u,xi) * xi.
  [[nodiscard]] virtual std::optional<double> scalar_weight(const Vector& x, double u,
                                                            const Vector& xi) const;

  /// True when all three derivatives are closed-form.
  [[nodiscard]] virtual bool has_analytic_derivatives() const { return true; }

  // Finite-difference derivatives of the flux, independent of any override.
  [[nodiscard]] Matrix fd_dflux_dxi(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] Vector fd_dflux_du(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] Vector fd_dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const;

 protected:
  [[nodiscard]] virtual Vector do_flux(const Vector& x, double u, const Vector& xi) const = 0;
  [[nodiscard]] virtual Matrix do_dflux_dxi(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] virtual Vector do_dflux_du(const Vector& x, double u, const Vector& xi) const;
  [[nodiscard]] virtual Vector do_dflux_dx(const Vector& x, double u, const Vector& xi,
                                           int axis) const;

  StructuralConstants& mutable_constants() noexcept { return constants_; }

 private:
  void check_args(const Vector& x, const Vector& xi) const;

  Box domain_;
  StructuralConstants constants_;
  Family family_;
};

using OperatorPtr = std::shared_ptr<const Operator>;

/// Parameters for make_family. Fields not used by a family are ignored.
struct FamilyParams {
  Box domain = Box::unit(2);
  double p = 2.0;
  std::optional<double> q;  // defaults to p where meaningful
  std::optional<double> m;  // defaults derived per family
  std::optional<double> M;
  double growth_alpha = 0.0;
  double beta = 0.0;
  ScalarField exponent;          // variable-exponent families: p(x)
  std::vector<double> exponents;  // anisotropic families: p_i
  ScalarField weight;            // double-phase families: a(x) >= 0
};

/// Built-in operator families. Nondegenerate variants replace |xi| by
/// (1+|xi|^2)^(1/2); degenerate variants exist as negative controls.
///
///   PLaplacian        (1+|xi|^2)^((p-2)/2) xi
///   Log               log(2+|xi|^2) (1+|xi|^2)^((p-2)/2) xi     (needs q > p)
///   VariableExponent  (1+|xi|^2)^((p(x)-2)/2) xi, declared p = min, q = max
///   Anisotropic       a^i = (1+xi_i^2)^((p_i-2)/2) xi_i, p = min p_i, q = max p_i
///   DoublePhase       ((1+|xi|^2)^((p-2)/2) + a(x)(1+|xi|^2)^((q-2)/2)) xi
/// and the Degenerate* counterparts with |xi| in place of (1+|xi|^2)^(1/2).
OperatorPtr make_family(Family family, const FamilyParams& params);

/// a_eps = a + eps (1+|xi|^2)^((q+eps-2)/2) xi with declared growth q + eps.
class RegularizedOperator final : public Operator {
 public:
  RegularizedOperator(OperatorPtr base, double eps, double eps0);

  [[nodiscard]] const Operator& base() const noexcept { return *base_; }
  [[nodiscard]] const OperatorPtr& base_ptr() const noexcept { return base_; }
  [[nodiscard]] double eps() const noexcept { return eps_; }
  [[nodiscard]] double eps0() const noexcept { return eps0_; }

  [[nodiscard]] std::optional<double> scalar_weight(const Vector& x, double u,
                                                    const Vector& xi) const override;
  [[nodiscard]] bool has_analytic_derivatives() const override {
    return base_->has_analytic_derivatives();
  }

 protected:
  Vector do_flux(const Vector& x, double u, const Vector& xi) const override;
  Matrix do_dflux_dxi(const Vector& x, double u, const Vector& xi) const override;
  Vector do_dflux_du(const Vector& x, double u, const Vector& xi) const override;
  Vector do_dflux_dx(const Vector& x, double u, const Vector& xi, int axis) const override;

 private:
  OperatorPtr base_;
  double eps_;
  double eps0_;
  double base_q_;
};

/// Throws InvalidExponents unless 0 < eps <= eps0 and (q + eps0)/p < 1 + 1/n.
std::shared_ptr<const RegularizedOperator> regularize(OperatorPtr op, double eps, double eps0);

/// User-supplied field. Missing derivatives use finite differences unless
/// `allow_fd_fallback` is false, in which case they raise DerivativeUnavailable.
struct CustomOperatorSpec {
  Box domain = Box::unit(2);
  StructuralConstants constants;
  std::function<Vector(const Vector&, double, const Vector&)> flux;
  std::function<Matrix(const Vector&, double, const Vector&)> dflux_dxi;
  std::function<Vector(const Vector&, double, const Vector&)> dflux_du;
  std::function<Vector(const Vector&, double, const Vector&, int)> dflux_dx;
  std::function<double(const Vector&, double, const Vector&)> scalar_weight;
  bool allow_fd_fallback = true;
};

OperatorPtr make_custom(CustomOperatorSpec spec);

}  // namespace pq
