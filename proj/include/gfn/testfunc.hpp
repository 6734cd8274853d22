#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gfn/common.hpp"
#include "gfn/quadrature.hpp"

namespace gfn {

/// Unnormalized standard bump B(t) = exp(-1/(1-|t|^2)) on the unit ball,
/// written in terms of u = |t|^2.
double bump_of_squared_radius(double u);

struct Monomial {
  MultiIndex power{0, 0};
  double coef = 0.0;
};

/// amplitude * P(t) * B(t) with t = (xi - center) / radius.
struct BumpTerm {
  Point center{0.0, 0.0};
  double radius = 1.0;
  double amplitude = 1.0;
  std::vector<Monomial> poly{Monomial{{0, 0}, 1.0}};
};

/// A compactly supported smooth function on R^s (s = 1, 2) whose support
/// lies in the closed ball B(center, radius).
///
/// Two representations share this handle.  Parametric test functions are
/// finite sums of bump-monomial terms, optionally differentiated by a fixed
/// multi-index; they evaluate exactly and differentiate exactly through
/// Taylor jets.  Opaque test functions wrap an evaluator (pullbacks,
/// transformed test objects) together with a support-ball bound.
///
/// Values are immutable and cheap to copy.
class TestFunction {
 public:
  using Evaluator = std::function<double(const Point&)>;

  TestFunction();  // zero function in one dimension

  static TestFunction from_terms(int dim, std::vector<BumpTerm> terms,
                                 MultiIndex derivative = {0, 0});
  static TestFunction from_evaluator(int dim, Point center, double radius, Evaluator f);
  static TestFunction zero(int dim);

  int dim() const;
  const Point& center() const;
  double radius() const;
  bool parametric() const;
  const std::vector<BumpTerm>& terms() const;
  const MultiIndex& derivative_order() const;

  double operator()(const Point& xi) const;
  double operator()(double xi) const { return (*this)(Point{xi, 0.0}); }

  /// d^beta of this function at xi.  Exact for parametric functions;
  /// Richardson-extrapolated central differences (base step 1e-4 r) otherwise.
  double partial(const Point& xi, const MultiIndex& beta) const;

  TestFunction derivative(int axis) const;

  /// Max |value| over the nodes of the support-box grid.
  double sup_norm(const QuadratureGrid& grid) const;
  double sup_norm() const;

 private:
  struct Impl;
  explicit TestFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend TestFunction scale(const TestFunction&, double);
  friend TestFunction translate(const TestFunction&, const Point&);
  friend TestFunction linear_combination(std::span<const std::pair<double, TestFunction>>);
};

/// S_eps phi: xi -> eps^{-s} phi(xi / eps).
TestFunction scale(const TestFunction& phi, double eps);

/// xi -> phi(xi - x).
TestFunction translate(const TestFunction& phi, const Point& x);

TestFunction linear_combination(std::span<const std::pair<double, TestFunction>> terms);
TestFunction operator+(const TestFunction& a, const TestFunction& b);
TestFunction operator-(const TestFunction& a, const TestFunction& b);
TestFunction operator*(double s, const TestFunction& a);

/// Integral of weight(xi) * phi(xi) over the support box of phi.
template <class Weight>
auto integrate_against(const TestFunction& phi, Weight&& weight, const QuadratureGrid& grid) {
  const Point& c = phi.center();
  const double r = phi.radius();
  if (phi.dim() == 1) {
    return trapezoid([&](double t) {
      const Point xi{t, 0.0};
      return weight(xi) * phi(xi);
    }, c[0] - r, c[0] + r, grid.nodes);
  }
  return trapezoid_2d([&](const Point& xi) { return weight(xi) * phi(xi); },
                      Point{c[0] - r, c[1] - r}, Point{c[0] + r, c[1] + r}, grid.nodes);
}

constexpr int kMomentOrderCap = 16;

struct MomentEstimate {
  double value = 0.0;
  double error = 0.0;  // |I_N - I_2N|
};

/// int xi^alpha phi(xi) dxi by trapezoid quadrature over the support box.
double moment(const TestFunction& phi, const MultiIndex& alpha, const QuadratureGrid& grid);
double moment(const TestFunction& phi, const MultiIndex& alpha);
double moment(const TestFunction& phi, int k);  // s = 1 shorthand

/// Several moments from one pass over the grid nodes.
std::vector<double> moments(const TestFunction& phi, std::span<const MultiIndex> alphas,
                            const QuadratureGrid& grid);

/// Moment at the requested grid and at the doubled grid; value is the fine one.
MomentEstimate moment_estimate(const TestFunction& phi, const MultiIndex& alpha,
                               const QuadratureGrid& grid);

/// int xi^beta d^gamma phi by parts: (-1)^|gamma| int d^gamma(xi^beta) phi.
double derivative_moment(const TestFunction& phi, const MultiIndex& beta, const MultiIndex& gamma,
                         const QuadratureGrid& grid);
double derivative_moment(const TestFunction& phi, const MultiIndex& beta, const MultiIndex& gamma);

/// Membership test for A_q: unit mass and vanishing moments 1 <= |alpha| <= q.
struct MomentSpec {
  int order = 0;
  double tolerance = 1e-10;

  void validate() const;
  /// Largest deviation from the A_q conditions (mass - 1 included).
  double violation(const TestFunction& phi) const;
  bool admits(const TestFunction& phi) const { return violation(phi) <= tolerance; }
};

/// Multi-indices alpha with lo <= |alpha| <= hi in the given dimension.
std::vector<MultiIndex> multi_indices(int dim, int lo, int hi);

/// Free coefficients beyond degree q (s = 1): prescribing them yields
/// asymmetric members of A_q with the same support.
struct MollifierShape {
  std::vector<double> extra_coefficients;
};

/// Unit-mass phi supported in B(0, radius) with int xi^alpha phi = 0 for
/// 1 <= |alpha| <= q, obtained by solving the moment system over the
/// bump-monomial basis {t^k B(t)}.
TestFunction build_mollifier(int q, int dim = 1, double radius = 1.0,
                             const MollifierShape& shape = {});

/// Positive unit-mass bump with the given center and radius.
TestFunction unit_bump(int dim, const Point& center, double radius);

/// Condition threshold above which the moment system is rejected.
constexpr double kMomentConditionLimit = 1e12;

}  // namespace gfn
