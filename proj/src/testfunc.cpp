#include "gfn/testfunc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "gfn/taylor.hpp"

namespace gfn {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

int max_power(const BumpTerm& term, int axis) {
  int p = 0;
  for (const auto& m : term.poly) p = std::max(p, m.power[axis]);
  return p;
}

double term_value(const BumpTerm& term, const Point& xi, int dim) {
  const double t0 = (xi[0] - term.center[0]) / term.radius;
  double u = t0 * t0;
  double t1 = 0.0;
  if (dim == 2) {
    t1 = (xi[1] - term.center[1]) / term.radius;
    u += t1 * t1;
  }
  if (u >= 1.0) return 0.0;
  const double b = std::exp(-1.0 / (1.0 - u));
  double p = 0.0;
  for (const auto& m : term.poly) {
    double v = m.coef;
    for (int k = 0; k < m.power[0]; ++k) v *= t0;
    for (int k = 0; k < m.power[1]; ++k) v *= t1;
    p += v;
  }
  return term.amplitude * p * b;
}

// m-th derivative of s -> term(xi + s v) at s = 0.
double term_directional(const BumpTerm& term, const Point& xi, const Point& v, int m, int dim) {
  Taylor t0(m, (xi[0] - term.center[0]) / term.radius);
  if (m >= 1) t0[1] = v[0] / term.radius;
  Taylor u = t0 * t0;
  Taylor t1(m, 0.0);
  if (dim == 2) {
    t1 = Taylor(m, (xi[1] - term.center[1]) / term.radius);
    if (m >= 1) t1[1] = v[1] / term.radius;
    u += t1 * t1;
  }
  if (u[0] >= 1.0) return 0.0;
  Taylor one_minus(m, 1.0);
  one_minus -= u;
  const Taylor b = exp(-1.0 * reciprocal(one_minus));

  const int p0 = max_power(term, 0);
  const int p1 = max_power(term, 1);
  std::vector<Taylor> pow0(p0 + 1, Taylor(m, 1.0));
  std::vector<Taylor> pow1(p1 + 1, Taylor(m, 1.0));
  for (int k = 1; k <= p0; ++k) pow0[k] = pow0[k - 1] * t0;
  for (int k = 1; k <= p1; ++k) pow1[k] = pow1[k - 1] * t1;
  Taylor p(m, 0.0);
  for (const auto& mono : term.poly) {
    p += mono.coef * (pow0[mono.power[0]] * pow1[mono.power[1]]);
  }
  return term.amplitude * (p * b).derivative(m);
}

struct Ball {
  Point center{0.0, 0.0};
  double radius = 0.0;
};

Ball enclosing_ball(int dim, std::span<const Ball> balls) {
  if (balls.empty()) return {};
  Point lo{balls[0].center[0] - balls[0].radius, balls[0].center[1] - balls[0].radius};
  Point hi{balls[0].center[0] + balls[0].radius, balls[0].center[1] + balls[0].radius};
  for (const auto& b : balls) {
    for (int i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], b.center[i] - b.radius);
      hi[i] = std::max(hi[i], b.center[i] + b.radius);
    }
  }
  Ball out;
  for (int i = 0; i < dim; ++i) out.center[i] = 0.5 * (lo[i] + hi[i]);
  if (dim == 1) {
    out.radius = 0.5 * (hi[0] - lo[0]);
  } else {
    for (const auto& b : balls) {
      out.radius = std::max(out.radius, norm(b.center - out.center, dim) + b.radius);
    }
  }
  return out;
}

// Central difference of order |g| with half-step stencil, O(h^2).
double central_difference(const TestFunction::Evaluator& f, const Point& xi, const MultiIndex& g,
                          double h) {
  double acc = 0.0;
  for (int j0 = 0; j0 <= g[0]; ++j0) {
    for (int j1 = 0; j1 <= g[1]; ++j1) {
      const double sign = ((j0 + j1) % 2 == 0) ? 1.0 : -1.0;
      const Point p{xi[0] + (0.5 * g[0] - j0) * h, xi[1] + (0.5 * g[1] - j1) * h};
      acc += sign * binomial(g[0], j0) * binomial(g[1], j1) * f(p);
    }
  }
  return acc / std::pow(h, total_order(g));
}

double richardson_difference(const TestFunction::Evaluator& f, const Point& xi,
                             const MultiIndex& g, double h) {
  const double d0 = central_difference(f, xi, g, h);
  const double d1 = central_difference(f, xi, g, 0.5 * h);
  const double d2 = central_difference(f, xi, g, 0.25 * h);
  const double r0 = (4.0 * d1 - d0) / 3.0;
  const double r1 = (4.0 * d2 - d1) / 3.0;
  return (16.0 * r1 - r0) / 15.0;
}

double fd_base_step(int order, double radius) {
  if (order <= 1) return 1e-4 * radius;
  if (order == 2) return 2e-3 * radius;
  return 1e-2 * radius;
}

}  // namespace

double bump_of_squared_radius(double u) {
  if (u >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u));
}

struct TestFunction::Impl {
  int dim = 1;
  Point center{0.0, 0.0};
  double radius = 0.0;
  std::vector<BumpTerm> terms;
  MultiIndex deriv{0, 0};
  Evaluator evaluator;  // set for opaque functions

  bool parametric() const { return !evaluator; }

  double directional(const Point& xi, const Point& v, int m) const {
    double s = 0.0;
    for (const auto& t : terms) s += term_directional(t, xi, v, m, dim);
    return s;
  }

  double exact_partial(const Point& xi, const MultiIndex& g) const {
    const int k = total_order(g);
    if (k > Taylor::kMaxOrder) {
      throw PreconditionError("derivative order " + std::to_string(k) + " exceeds jet capacity");
    }
    if (k == 0) {
      double s = 0.0;
      for (const auto& t : terms) s += term_value(t, xi, dim);
      return s;
    }
    if (dim == 1 || g[1] == 0) return directional(xi, Point{1.0, 0.0}, k);
    if (g[0] == 0) return directional(xi, Point{0.0, 1.0}, k);
    // Mixed partial in two variables: polarize k+1 directional derivatives.
    Eigen::MatrixXd a(k + 1, k + 1);
    Eigen::VectorXd d(k + 1);
    for (int j = 0; j <= k; ++j) {
      const double th = (j + 0.5) * M_PI / (k + 1);
      const double c = std::cos(th), s = std::sin(th);
      for (int i = 0; i <= k; ++i) a(j, i) = binomial(k, i) * std::pow(c, k - i) * std::pow(s, i);
      d(j) = directional(xi, Point{c, s}, k);
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(d);
    return x(g[1]);
  }
};

TestFunction::TestFunction() : TestFunction(zero(1)) {}

TestFunction::TestFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

TestFunction TestFunction::from_terms(int dim, std::vector<BumpTerm> terms, MultiIndex derivative) {
  if (dim != 1 && dim != 2) throw PreconditionError("test functions live in dimension 1 or 2");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  std::vector<Ball> balls;
  for (const auto& t : terms) {
    if (!(t.radius > 0.0) || !std::isfinite(t.radius)) {
      throw PreconditionError("bump term radius must be positive and finite");
    }
    balls.push_back({t.center, t.radius});
  }
  const Ball b = enclosing_ball(dim, balls);
  impl->center = b.center;
  impl->radius = b.radius;
  impl->terms = std::move(terms);
  impl->deriv = derivative;
  return TestFunction(std::move(impl));
}

TestFunction TestFunction::from_evaluator(int dim, Point center, double radius, Evaluator f) {
  if (dim != 1 && dim != 2) throw PreconditionError("test functions live in dimension 1 or 2");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw PreconditionError("support radius must be finite and non-negative");
  }
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->center = center;
  impl->radius = radius;
  Point c = center;
  double r = radius;
  impl->evaluator = [f = std::move(f), c, r, dim](const Point& xi) {
    return norm(xi - c, dim) >= r ? 0.0 : f(xi);
  };
  return TestFunction(std::move(impl));
}

TestFunction TestFunction::zero(int dim) { return from_terms(dim, {}); }

int TestFunction::dim() const { return impl_->dim; }
const Point& TestFunction::center() const { return impl_->center; }
double TestFunction::radius() const { return impl_->radius; }
bool TestFunction::parametric() const { return impl_->parametric(); }
const std::vector<BumpTerm>& TestFunction::terms() const { return impl_->terms; }
const MultiIndex& TestFunction::derivative_order() const { return impl_->deriv; }

double TestFunction::operator()(const Point& xi) const {
  const Impl& im = *impl_;
  if (!im.parametric()) return im.evaluator(xi);
  if (im.deriv[0] == 0 && im.deriv[1] == 0) {
    double s = 0.0;
    for (const auto& t : im.terms) s += term_value(t, xi, im.dim);
    return s;
  }
  return im.exact_partial(xi, im.deriv);
}

double TestFunction::partial(const Point& xi, const MultiIndex& beta) const {
  const Impl& im = *impl_;
  if (im.dim == 1 && beta[1] != 0) return 0.0;
  if (im.parametric()) {
    return im.exact_partial(xi, MultiIndex{im.deriv[0] + beta[0], im.deriv[1] + beta[1]});
  }
  if (total_order(beta) == 0) return im.evaluator(xi);
  return richardson_difference(im.evaluator, xi, beta,
                               fd_base_step(total_order(beta), std::max(im.radius, 1e-300)));
}

TestFunction TestFunction::derivative(int axis) const {
  if (axis < 0 || axis >= dim()) throw PreconditionError("derivative axis out of range");
  const Impl& im = *impl_;
  if (im.parametric()) {
    MultiIndex d = im.deriv;
    d[axis] += 1;
    auto impl = std::make_shared<Impl>(im);
    impl->deriv = d;
    return TestFunction(std::move(impl));
  }
  TestFunction self = *this;
  const MultiIndex e = unit_index(axis);
  return from_evaluator(im.dim, im.center, im.radius,
                        [self, e](const Point& xi) { return self.partial(xi, e); });
}

double TestFunction::sup_norm(const QuadratureGrid& grid) const {
  const Point& c = center();
  const double r = radius();
  const int n = grid.nodes;
  const double h = 2.0 * r / n;
  double s = 0.0;
  if (dim() == 1) {
    for (int i = 0; i <= n; ++i) s = std::max(s, std::abs((*this)(Point{c[0] - r + i * h, 0.0})));
  } else {
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j)
        s = std::max(s, std::abs((*this)(Point{c[0] - r + i * h, c[1] - r + j * h})));
  }
  return s;
}

double TestFunction::sup_norm() const { return sup_norm(QuadratureGrid::default_for(dim())); }

TestFunction scale(const TestFunction& phi, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw PreconditionError("scale requires eps in (0, 1]");
  if (eps == 1.0) return phi;
  const auto& im = *phi.impl_;
  const int s = im.dim;
  if (im.parametric()) {
    auto impl = std::make_shared<TestFunction::Impl>(im);
    const double amp = std::pow(eps, total_order(im.deriv) - s);
    for (auto& t : impl->terms) {
      t.center = eps * t.center;
      t.radius *= eps;
      t.amplitude *= amp;
    }
    impl->center = eps * im.center;
    impl->radius = eps * im.radius;
    return TestFunction(std::move(impl));
  }
  const double inv = 1.0 / eps;
  const double factor = std::pow(inv, s);
  auto f = im.evaluator;
  return TestFunction::from_evaluator(s, eps * im.center, eps * im.radius,
                                      [f, inv, factor](const Point& xi) {
                                        return factor * f(inv * xi);
                                      });
}

TestFunction translate(const TestFunction& phi, const Point& x) {
  if (x[0] == 0.0 && x[1] == 0.0) return phi;
  const auto& im = *phi.impl_;
  Point shift = x;
  if (im.dim == 1) shift[1] = 0.0;
  if (im.parametric()) {
    auto impl = std::make_shared<TestFunction::Impl>(im);
    for (auto& t : impl->terms) t.center = t.center + shift;
    impl->center = im.center + shift;
    return TestFunction(std::move(impl));
  }
  auto f = im.evaluator;
  return TestFunction::from_evaluator(im.dim, im.center + shift, im.radius,
                                      [f, shift](const Point& xi) { return f(xi - shift); });
}

TestFunction linear_combination(std::span<const std::pair<double, TestFunction>> parts) {
  if (parts.empty()) return TestFunction::zero(1);
  const int dim = parts.front().second.dim();
  bool all_parametric = true;
  for (const auto& [c, f] : parts) {
    if (f.dim() != dim) throw PreconditionError("linear combination mixes dimensions");
    all_parametric = all_parametric && f.parametric() &&
                     f.derivative_order() == parts.front().second.derivative_order();
  }
  if (all_parametric) {
    std::vector<BumpTerm> terms;
    for (const auto& [c, f] : parts) {
      if (c == 0.0) continue;
      for (BumpTerm t : f.terms()) {
        t.amplitude *= c;
        terms.push_back(std::move(t));
      }
    }
    return TestFunction::from_terms(dim, std::move(terms), parts.front().second.derivative_order());
  }
  std::vector<Ball> balls;
  for (const auto& [c, f] : parts) balls.push_back({f.center(), f.radius()});
  const Ball b = enclosing_ball(dim, balls);
  std::vector<std::pair<double, TestFunction>> copy(parts.begin(), parts.end());
  return TestFunction::from_evaluator(dim, b.center, b.radius, [copy](const Point& xi) {
    double s = 0.0;
    for (const auto& [c, f] : copy) s += c * f(xi);
    return s;
  });
}

TestFunction operator+(const TestFunction& a, const TestFunction& b) {
  const std::pair<double, TestFunction> parts[] = {{1.0, a}, {1.0, b}};
  return linear_combination(parts);
}

TestFunction operator-(const TestFunction& a, const TestFunction& b) {
  const std::pair<double, TestFunction> parts[] = {{1.0, a}, {-1.0, b}};
  return linear_combination(parts);
}

TestFunction operator*(double s, const TestFunction& a) {
  const std::pair<double, TestFunction> parts[] = {{s, a}};
  return linear_combination(parts);
}

double moment(const TestFunction& phi, const MultiIndex& alpha, const QuadratureGrid& grid) {
  grid.validate();
  if (total_order(alpha) > kMomentOrderCap) {
    throw PreconditionError("moment order " + std::to_string(total_order(alpha)) +
                            " exceeds cap " + std::to_string(kMomentOrderCap));
  }
  const int dim = phi.dim();
  return integrate_against(phi, [&](const Point& xi) { return monomial(xi, alpha, dim); }, grid);
}

double moment(const TestFunction& phi, const MultiIndex& alpha) {
  return moment(phi, alpha, QuadratureGrid::default_for(phi.dim()));
}

double moment(const TestFunction& phi, int k) { return moment(phi, MultiIndex{k, 0}); }

std::vector<double> moments(const TestFunction& phi, std::span<const MultiIndex> alphas,
                            const QuadratureGrid& grid) {
  grid.validate();
  for (const auto& a : alphas) {
    if (total_order(a) > kMomentOrderCap) {
      throw PreconditionError("moment order " + std::to_string(total_order(a)) +
                              " exceeds cap " + std::to_string(kMomentOrderCap));
    }
  }
  const int dim = phi.dim();
  const int n = grid.nodes;
  const Point& c = phi.center();
  const double r = phi.radius();
  const double h = 2.0 * r / n;
  std::vector<CompensatedSum> acc(alphas.size());
  auto visit = [&](const Point& xi, double w) {
    const double v = w * phi(xi);
    if (v == 0.0) return;
    for (std::size_t j = 0; j < alphas.size(); ++j) acc[j].add(v * monomial(xi, alphas[j], dim));
  };
  if (dim == 1) {
    for (int i = 0; i <= n; ++i) {
      visit(Point{c[0] - r + i * h, 0.0}, (i == 0 || i == n) ? 0.5 : 1.0);
    }
  } else {
    for (int i = 0; i <= n; ++i) {
      const double wi = (i == 0 || i == n) ? 0.5 : 1.0;
      for (int j = 0; j <= n; ++j) {
        const double wj = (j == 0 || j == n) ? 0.5 : 1.0;
        visit(Point{c[0] - r + i * h, c[1] - r + j * h}, wi * wj);
      }
    }
  }
  std::vector<double> out(alphas.size());
  const double cell = dim == 1 ? h : h * h;
  for (std::size_t j = 0; j < alphas.size(); ++j) out[j] = acc[j].value() * cell;
  return out;
}

MomentEstimate moment_estimate(const TestFunction& phi, const MultiIndex& alpha,
                               const QuadratureGrid& grid) {
  const double coarse = moment(phi, alpha, grid);
  const double fine = moment(phi, alpha, grid.doubled());
  return {fine, std::abs(fine - coarse)};
}

double derivative_moment(const TestFunction& phi, const MultiIndex& beta, const MultiIndex& gamma,
                         const QuadratureGrid& grid) {
  double coef = 1.0;
  MultiIndex reduced{0, 0};
  for (int i = 0; i < kMaxDim; ++i) {
    if (gamma[i] > beta[i]) return 0.0;
    coef *= factorial(beta[i]) / factorial(beta[i] - gamma[i]);
    reduced[i] = beta[i] - gamma[i];
  }
  const double sign = (total_order(gamma) % 2 == 0) ? 1.0 : -1.0;
  return sign * coef * moment(phi, reduced, grid);
}

double derivative_moment(const TestFunction& phi, const MultiIndex& beta, const MultiIndex& gamma) {
  return derivative_moment(phi, beta, gamma, QuadratureGrid::default_for(phi.dim()));
}

void QuadratureGrid::validate() const {
  if (nodes < 64 || (nodes & (nodes - 1)) != 0) {
    throw PreconditionError("quadrature node count must be a power of two >= 64, got " +
                            std::to_string(nodes));
  }
}

void MomentSpec::validate() const {
  if (order < 0) throw PreconditionError("moment order must be >= 0");
  if (!(tolerance > 0.0)) throw PreconditionError("moment tolerance must be > 0");
}

double MomentSpec::violation(const TestFunction& phi) const {
  validate();
  double v = std::abs(moment(phi, MultiIndex{0, 0}) - 1.0);
  for (const auto& a : multi_indices(phi.dim(), 1, order)) {
    v = std::max(v, std::abs(moment(phi, a)));
  }
  return v;
}

std::vector<MultiIndex> multi_indices(int dim, int lo, int hi) {
  std::vector<MultiIndex> out;
  for (int k = std::max(lo, 0); k <= hi; ++k) {
    if (dim == 1) {
      out.push_back({k, 0});
    } else {
      for (int j = k; j >= 0; --j) out.push_back({j, k - j});
    }
  }
  return out;
}

namespace {

// int t^gamma B(|t|) dt over the unit box, all gamma up to `max_power` per
// axis, on the same relative nodes that moment() uses for a radius-r box.
std::vector<double> reference_moments_1d(int max_power, int nodes) {
  std::vector<double> out(max_power + 1, 0.0);
  std::vector<CompensatedSum> acc(max_power + 1);
  const double h = 2.0 / nodes;
  for (int i = 1; i < nodes; ++i) {
    const double t = -1.0 + i * h;
    const double b = bump_of_squared_radius(t * t);
    double p = b;
    for (int k = 0; k <= max_power; ++k) {
      acc[k].add(p);
      p *= t;
    }
  }
  for (int k = 0; k <= max_power; ++k) out[k] = acc[k].value() * h;
  return out;
}

std::vector<std::vector<double>> reference_moments_2d(int max_power, int nodes) {
  std::vector<std::vector<CompensatedSum>> acc(max_power + 1,
                                               std::vector<CompensatedSum>(max_power + 1));
  const double h = 2.0 / nodes;
  std::vector<double> p0(max_power + 1), p1(max_power + 1);
  for (int i = 1; i < nodes; ++i) {
    const double t0 = -1.0 + i * h;
    for (int j = 1; j < nodes; ++j) {
      const double t1 = -1.0 + j * h;
      const double b = bump_of_squared_radius(t0 * t0 + t1 * t1);
      if (b == 0.0) continue;
      p0[0] = b;
      p1[0] = 1.0;
      for (int k = 1; k <= max_power; ++k) {
        p0[k] = p0[k - 1] * t0;
        p1[k] = p1[k - 1] * t1;
      }
      for (int a = 0; a <= max_power; ++a)
        for (int c = 0; c <= max_power; ++c) acc[a][c].add(p0[a] * p1[c]);
    }
  }
  std::vector<std::vector<double>> out(max_power + 1, std::vector<double>(max_power + 1));
  for (int a = 0; a <= max_power; ++a)
    for (int c = 0; c <= max_power; ++c) out[a][c] = acc[a][c].value() * h * h;
  return out;
}

double bump_mass(int dim) {
  static const double mass1 = reference_moments_1d(0, QuadratureGrid::default_for(1).nodes)[0];
  static const double mass2 = reference_moments_2d(0, QuadratureGrid::default_for(2).nodes)[0][0];
  return dim == 1 ? mass1 : mass2;
}

void check_condition(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu, int q) {
  const double rc = lu.rcond();
  if (!(rc > 0.0) || 1.0 / rc > kMomentConditionLimit) {
    std::ostringstream os;
    os << "moment system for q=" << q << " is ill-conditioned (condition estimate "
       << (rc > 0.0 ? 1.0 / rc : INFINITY) << " > " << kMomentConditionLimit << ")";
    throw ConstructionError(os.str());
  }
}

}  // namespace

TestFunction unit_bump(int dim, const Point& center, double radius) {
  BumpTerm t;
  t.center = center;
  if (dim == 1) t.center[1] = 0.0;
  t.radius = radius;
  t.amplitude = 1.0 / (std::pow(radius, dim) * bump_mass(dim));
  return TestFunction::from_terms(dim, {t});
}

TestFunction build_mollifier(int q, int dim, double radius, const MollifierShape& shape) {
  if (q < 0) throw PreconditionError("mollifier order q must be >= 0");
  if (dim != 1 && dim != 2) throw PreconditionError("mollifiers are built for s = 1 or 2");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("radius must be > 0");
  if (dim == 2 && !shape.extra_coefficients.empty()) {
    throw PreconditionError("shape coefficients are only supported for s = 1");
  }

  BumpTerm term;
  term.radius = radius;
  term.poly.clear();

  if (dim == 1) {
    const int extras = static_cast<int>(shape.extra_coefficients.size());
    const int top = q + extras;
    const auto h = reference_moments_1d(q + top, QuadratureGrid::default_for(1).nodes);
    Eigen::MatrixXd m(q + 1, q + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q + 1);
    for (int j = 0; j <= q; ++j) {
      for (int k = 0; k <= q; ++k) m(j, k) = h[j + k];
      for (int e = 0; e < extras; ++e) rhs(j) -= h[j + q + 1 + e] * shape.extra_coefficients[e];
    }
    rhs(0) += 1.0 / radius;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    check_condition(lu, q);
    const Eigen::VectorXd a = lu.solve(rhs);
    for (int k = 0; k <= q; ++k) {
      if (a(k) != 0.0) term.poly.push_back({{k, 0}, a(k)});
    }
    for (int e = 0; e < extras; ++e) {
      term.poly.push_back({{q + 1 + e, 0}, shape.extra_coefficients[e]});
    }
  } else {
    const auto basis = multi_indices(2, 0, q);
    const int n = static_cast<int>(basis.size());
    const auto h = reference_moments_2d(2 * q, QuadratureGrid::default_for(2).nodes);
    Eigen::MatrixXd m(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        m(j, k) = h[basis[j][0] + basis[k][0]][basis[j][1] + basis[k][1]];
    rhs(0) = 1.0 / (radius * radius);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    check_condition(lu, q);
    const Eigen::VectorXd a = lu.solve(rhs);
    for (int k = 0; k < n; ++k) {
      if (a(k) != 0.0) term.poly.push_back({basis[k], a(k)});
    }
  }

  // One renormalization step on the production grid absorbs solve rounding.
  TestFunction phi = TestFunction::from_terms(dim, {term});
  const double mass = moment(phi, MultiIndex{0, 0});
  term.amplitude /= mass;
  phi = TestFunction::from_terms(dim, {term});

  const double violation = MomentSpec{q, 1e-10}.violation(phi);
  if (!(violation <= 1e-10)) {
    std::ostringstream os;
    os << "mollifier for q=" << q << " misses its moment conditions by " << violation;
    throw ConstructionError(os.str());
  }
  return phi;
}

}  // namespace gfn
