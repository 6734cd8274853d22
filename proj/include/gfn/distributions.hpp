#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gfn/common.hpp"
#include "gfn/diffeomorphism.hpp"
#include "gfn/testfunc.hpp"

namespace gfn {

/// d^beta f(x) for a smooth density; beta = 0 is the value.
using DensityJet = std::function<Complex(const Point&, const MultiIndex&)>;
using Density = std::function<Complex(const Point&)>;

/// A distribution on an open box Omega, given by its action on test functions.
class Distribution {
 public:
  enum class Kind { SmoothDensity, Dirac, Heaviside, PrincipalValue, Combination, Derivative };

  /// Density with closed-form derivatives; derivative() stays a density.
  static Distribution smooth(int dim, DensityJet jet, std::string label = "f");
  /// Density known only by value; derivative() becomes the generic -<w, d psi>.
  static Distribution smooth(int dim, Density f, std::string label = "f");
  /// (-1)^|alpha| d^alpha psi(a).
  static Distribution dirac(int dim, MultiIndex alpha = {0, 0}, Point at = {0.0, 0.0});
  static Distribution dirac_derivative(int k, double at = 0.0);
  static Distribution heaviside();
  /// vp(1/x).
  static Distribution principal_value();
  static Distribution combination(std::vector<std::pair<Complex, Distribution>> parts);
  static Distribution zero(int dim);

  Kind kind() const;
  int dim() const;
  const std::string& label() const;
  const Box& domain() const;
  /// Same distribution restricted to Omega; pairing outside raises DomainError.
  Distribution on(const Box& omega) const;
  Distribution with_grid(QuadratureGrid grid) const;

  /// Dirac parameters (kind() == Dirac).
  const MultiIndex& dirac_order() const;
  const Point& dirac_position() const;

  Complex pair(const TestFunction& psi) const;
  Distribution derivative(int axis) const;

 private:
  struct Impl;
  explicit Distribution(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

Distribution operator+(const Distribution& a, const Distribution& b);
Distribution operator-(const Distribution& a, const Distribution& b);
Distribution operator*(Complex c, const Distribution& a);

/// xi -> psi(mu^{-1} xi) |det D mu^{-1}(xi)|, supported in mu(supp psi).
TestFunction push_forward(const Diffeomorphism& mu, const TestFunction& psi);

/// <mu^* u, psi> = <u, (psi o mu^{-1}) |det D mu^{-1}|>.
Complex classical_pullback(const Diffeomorphism& mu, const Distribution& u,
                           const TestFunction& psi);

/// Smooth catalog for embedding checks: sin, cos, exp, one, x, x^2, x^3, x^4.
Distribution smooth_by_name(const std::string& name);
/// The same functions as plain jets.
DensityJet smooth_jet_by_name(const std::string& name);

}  // namespace gfn
