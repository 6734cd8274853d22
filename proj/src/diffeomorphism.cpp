#include "gfn/diffeomorphism.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gfn {

namespace {

Matrix2 scalar_jacobian(double d) {
  Matrix2 m = Matrix2::Identity();
  m(0, 0) = d;
  return m;
}

double operator_norm(const Matrix2& m, int dim) {
  if (dim == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Matrix2> svd(m);
  return svd.singularValues()(0);
}

template <class J>
double sampled_sup_norm(const J& jac, const Point& c, double r, int dim) {
  constexpr int n = 64;
  double s = 0.0;
  if (dim == 1) {
    for (int i = 0; i <= n; ++i) {
      s = std::max(s, operator_norm(jac(Point{c[0] - r + 2.0 * r * i / n, 0.0}), 1));
    }
    return s;
  }
  for (int i = 0; i <= 16; ++i) {
    for (int j = 0; j <= 16; ++j) {
      const Point p{c[0] - r + 2.0 * r * i / 16, c[1] - r + 2.0 * r * j / 16};
      if (norm(p - c, 2) <= r) s = std::max(s, operator_norm(jac(p), 2));
    }
  }
  return s;
}

// Solve g(x) = y for increasing g with g' >= lower bound, from a start value.
template <class G, class D>
double newton(const G& g, const D& dg, double y, double x) {
  // Quadratic convergence: after a step below 1e-9 |x| the error is far
  // below one ulp.
  for (int it = 0; it < 60; ++it) {
    const double step = (g(x) - y) / dg(x);
    x -= step;
    if (std::abs(step) <= 1e-9 * std::abs(x) || step == 0.0) break;
  }
  return x;
}

}  // namespace

Diffeomorphism::Diffeomorphism(std::string name, int dim, Map forward, Map inverse,
                               JacobianMap jacobian, JacobianMap inverse_jacobian, Box source,
                               Box target, bool identity)
    : name_(std::move(name)),
      dim_(dim),
      forward_(std::move(forward)),
      inverse_(std::move(inverse)),
      jacobian_(std::move(jacobian)),
      inverse_jacobian_(std::move(inverse_jacobian)),
      source_(source),
      target_(target),
      identity_(identity) {
  if (dim != 1 && dim != 2) throw PreconditionError("diffeomorphisms act in dimension 1 or 2");
}

double Diffeomorphism::inverse_det(const Point& y) const {
  const Matrix2 m = inverse_jacobian_(y);
  return dim_ == 1 ? m(0, 0) : m.determinant();
}

Point Diffeomorphism::inverse_increment(const Point& y, const Point& delta) const {
  if (identity_) return delta;
  if (increment_) return increment_(y, delta);
  return inverse(forward(y) + delta) - y;
}

Diffeomorphism Diffeomorphism::with_increment(Increment inc) const {
  Diffeomorphism d = *this;
  d.increment_ = std::move(inc);
  return d;
}

double Diffeomorphism::forward_lipschitz(const Point& c, double r) const {
  return sampled_sup_norm(jacobian_, c, r, dim_);
}

double Diffeomorphism::inverse_lipschitz(const Point& c, double r) const {
  return sampled_sup_norm(inverse_jacobian_, c, r, dim_);
}

Diffeomorphism identity_map(int dim) {
  auto same = [](const Point& x) { return x; };
  auto eye = [](const Point&) { return Matrix2(Matrix2::Identity()); };
  return Diffeomorphism(dim == 1 ? "id" : "id2", dim, same, same, eye, eye, Box::whole(dim),
                        Box::whole(dim), true);
}

Diffeomorphism affine_map(double a, double b, const std::string& name) {
  if (a == 0.0) throw PreconditionError("affine map needs a != 0");
  return Diffeomorphism(
      name, 1, [a, b](const Point& x) { return Point{a * x[0] + b, 0.0}; },
      [a, b](const Point& y) { return Point{(y[0] - b) / a, 0.0}; },
      [a](const Point&) { return scalar_jacobian(a); },
      [a](const Point&) { return scalar_jacobian(1.0 / a); }, Box::whole(1), Box::whole(1))
      .with_increment([a](const Point&, const Point& d) { return Point{d[0] / a, 0.0}; });
}

Diffeomorphism sine_map(double amp) {
  if (!(std::abs(amp) < 1.0)) throw PreconditionError("x + a sin x is a diffeomorphism only for |a| < 1");
  auto g = [amp](double x) { return x + amp * std::sin(x); };
  auto dg = [amp](double x) { return 1.0 + amp * std::cos(x); };
  return Diffeomorphism(
      "sine", 1, [g](const Point& x) { return Point{g(x[0]), 0.0}; },
      [g, dg](const Point& y) { return Point{newton(g, dg, y[0], y[0]), 0.0}; },
      [dg](const Point& x) { return scalar_jacobian(dg(x[0])); },
      [g, dg](const Point& y) { return scalar_jacobian(1.0 / dg(newton(g, dg, y[0], y[0]))); },
      Box::whole(1), Box::whole(1))
      .with_increment([amp](const Point& y, const Point& delta) {
        // mu(y + d) - mu(y) = d + 2 a cos(y + d/2) sin(d/2)
        const double sy = std::sin(y[0]), cy = std::cos(y[0]);
        double d = delta[0] / (1.0 + amp * cy);
        for (int it = 0; it < 60; ++it) {
          const double s = std::sin(0.5 * d), c = std::cos(0.5 * d);
          const double h = d + 2.0 * amp * (cy * c - sy * s) * s;
          const double dh = 1.0 + amp * (cy * (c * c - s * s) - 2.0 * sy * s * c);
          const double step = (h - delta[0]) / dh;
          d -= step;
          if (std::abs(step) <= 1e-9 * std::abs(d) || step == 0.0) break;
        }
        return Point{d, 0.0};
      });
}

Diffeomorphism cubic_map() {
  auto g = [](double x) { return x * x * x + x; };
  auto dg = [](double x) { return 3.0 * x * x + 1.0; };
  // Cardano for x^3 + x - y = 0, then Newton polish.
  auto inv = [g, dg](double y) {
    const double d = std::sqrt(0.25 * y * y + 1.0 / 27.0);
    const double x0 = std::cbrt(0.5 * y + d) + std::cbrt(0.5 * y - d);
    return newton(g, dg, y, x0);
  };
  return Diffeomorphism(
      "cubic", 1, [g](const Point& x) { return Point{g(x[0]), 0.0}; },
      [inv](const Point& y) { return Point{inv(y[0]), 0.0}; },
      [dg](const Point& x) { return scalar_jacobian(dg(x[0])); },
      [inv, dg](const Point& y) { return scalar_jacobian(1.0 / dg(inv(y[0]))); }, Box::whole(1),
      Box::whole(1))
      .with_increment([](const Point& y, const Point& delta) {
        // mu(y + d) - mu(y) = d (3 y^2 + 3 y d + d^2 + 1)
        const double y0 = y[0];
        auto h = [y0](double d) { return d * (3.0 * y0 * y0 + 3.0 * y0 * d + d * d + 1.0); };
        auto dh = [y0](double d) { return 3.0 * (y0 + d) * (y0 + d) + 1.0; };
        return Point{newton(h, dh, delta[0], delta[0] / dh(0.0)), 0.0};
      });
}

Diffeomorphism compose(const Diffeomorphism& mu, const Diffeomorphism& nu) {
  if (mu.dim() != nu.dim()) throw PreconditionError("composition of maps in different dimensions");
  const int dim = mu.dim();
  return Diffeomorphism(
      mu.name() + "*" + nu.name(), dim,
      [mu, nu](const Point& x) { return mu.forward(nu.forward(x)); },
      [mu, nu](const Point& y) { return nu.inverse(mu.inverse(y)); },
      [mu, nu](const Point& x) { return Matrix2(mu.jacobian(nu.forward(x)) * nu.jacobian(x)); },
      [mu, nu](const Point& y) {
        const Point z = mu.inverse(y);
        return Matrix2(nu.inverse_jacobian(z) * mu.inverse_jacobian(y));
      },
      nu.source(), mu.target(), mu.is_identity() && nu.is_identity())
      .with_increment([mu, nu](const Point& y, const Point& delta) {
        return nu.inverse_increment(y, mu.inverse_increment(nu.forward(y), delta));
      });
}

Diffeomorphism invert(const Diffeomorphism& mu) {
  return Diffeomorphism(
      mu.name() + "^-1", mu.dim(), [mu](const Point& x) { return mu.inverse(x); },
      [mu](const Point& y) { return mu.forward(y); },
      [mu](const Point& x) { return mu.inverse_jacobian(x); },
      [mu](const Point& y) { return mu.jacobian(y); }, mu.target(), mu.source(),
      mu.is_identity());
}

Diffeomorphism restrict_to(const Diffeomorphism& mu, const Box& source) {
  if (mu.dim() != 1 || source.dim != 1 || !source.bounded()) {
    throw PreconditionError("restriction needs a bounded interval in dimension 1");
  }
  const double a = mu.forward(source.lo)[0];
  const double b = mu.forward(source.hi)[0];
  const Box target = Box::interval(std::min(a, b), std::max(a, b));
  return Diffeomorphism(mu.name() + "|" + source.describe(), 1,
                        [mu](const Point& x) { return mu.forward(x); },
                        [mu](const Point& y) { return mu.inverse(y); },
                        [mu](const Point& x) { return mu.jacobian(x); },
                        [mu](const Point& y) { return mu.inverse_jacobian(y); }, source, target)
      .with_increment(
          [mu](const Point& y, const Point& delta) { return mu.inverse_increment(y, delta); });
}

Diffeomorphism diffeo_by_name(const std::string& name) {
  if (name == "id") return identity_map(1);
  if (name == "id2") return identity_map(2);
  if (name == "scale2") return affine_map(2.0, 0.0, "scale2");
  if (name == "half") return affine_map(0.5, 0.0, "half");
  if (name == "shift1") return affine_map(1.0, 1.0, "shift1");
  if (name == "sine") return sine_map(0.25);
  if (name == "cubic") return cubic_map();
  if (name.rfind("affine:", 0) == 0) {
    const auto rest = name.substr(7);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        return affine_map(std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
      } catch (const std::logic_error&) {
      }
    }
  }
  throw PreconditionError("unknown diffeomorphism '" + name + "'");
}

std::vector<std::string> diffeo_catalog() {
  return {"id", "id2", "scale2", "half", "shift1", "sine", "cubic", "affine:a:b"};
}

}  // namespace gfn
