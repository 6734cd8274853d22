#include "gfn/distributions.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace gfn {

struct Distribution::Impl {
  Kind kind = Kind::SmoothDensity;
  int dim = 1;
  std::string label;
  Box domain = Box::whole(1);
  std::optional<QuadratureGrid> grid;

  // SmoothDensity
  DensityJet jet;
  Density plain;
  MultiIndex jet_base{0, 0};

  // Dirac
  MultiIndex alpha{0, 0};
  Point at{0.0, 0.0};

  // Combination / Derivative
  std::vector<std::pair<Complex, Distribution>> parts;
  int axis = 0;

  QuadratureGrid quadrature() const { return grid.value_or(QuadratureGrid::default_for(dim)); }
};

Distribution::Distribution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Distribution Distribution::smooth(int dim, DensityJet jet, std::string label) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::SmoothDensity;
  impl->dim = dim;
  impl->label = std::move(label);
  impl->domain = Box::whole(dim);
  impl->jet = std::move(jet);
  return Distribution(std::move(impl));
}

Distribution Distribution::smooth(int dim, Density f, std::string label) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::SmoothDensity;
  impl->dim = dim;
  impl->label = std::move(label);
  impl->domain = Box::whole(dim);
  impl->plain = std::move(f);
  return Distribution(std::move(impl));
}

Distribution Distribution::dirac(int dim, MultiIndex alpha, Point at) {
  if (total_order(alpha) > 4) throw PreconditionError("Dirac derivatives are supported up to order 4");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Dirac;
  impl->dim = dim;
  impl->domain = Box::whole(dim);
  impl->alpha = alpha;
  impl->at = at;
  std::ostringstream os;
  os << "delta";
  for (int i = 0; i < total_order(alpha); ++i) os << "'";
  impl->label = os.str();
  return Distribution(std::move(impl));
}

Distribution Distribution::dirac_derivative(int k, double at) {
  return dirac(1, MultiIndex{k, 0}, Point{at, 0.0});
}

Distribution Distribution::heaviside() {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Heaviside;
  impl->label = "H";
  return Distribution(std::move(impl));
}

Distribution Distribution::principal_value() {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::PrincipalValue;
  impl->label = "vp";
  return Distribution(std::move(impl));
}

Distribution Distribution::combination(std::vector<std::pair<Complex, Distribution>> parts) {
  if (parts.empty()) throw PreconditionError("empty combination; use Distribution::zero");
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::Combination;
  impl->dim = parts.front().second.dim();
  impl->domain = Box::whole(impl->dim);
  std::ostringstream os;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].second.dim() != impl->dim) throw PreconditionError("combination mixes dimensions");
    os << (i ? "+" : "") << parts[i].second.label();
  }
  impl->label = os.str();
  impl->parts = std::move(parts);
  return Distribution(std::move(impl));
}

Distribution Distribution::zero(int dim) {
  return smooth(dim, DensityJet([](const Point&, const MultiIndex&) { return Complex(0.0); }), "0");
}

Distribution::Kind Distribution::kind() const { return impl_->kind; }
int Distribution::dim() const { return impl_->dim; }
const std::string& Distribution::label() const { return impl_->label; }
const Box& Distribution::domain() const { return impl_->domain; }
const MultiIndex& Distribution::dirac_order() const { return impl_->alpha; }
const Point& Distribution::dirac_position() const { return impl_->at; }

Distribution Distribution::on(const Box& omega) const {
  if (omega.dim != dim()) throw PreconditionError("domain dimension mismatch");
  auto impl = std::make_shared<Impl>(*impl_);
  impl->domain = omega;
  return Distribution(std::move(impl));
}

Distribution Distribution::with_grid(QuadratureGrid grid) const {
  grid.validate();
  auto impl = std::make_shared<Impl>(*impl_);
  impl->grid = grid;
  return Distribution(std::move(impl));
}

Complex Distribution::pair(const TestFunction& psi) const {
  const Impl& im = *impl_;
  if (psi.dim() != im.dim) throw PreconditionError("test function dimension mismatch");
  if (!im.domain.contains_ball(psi.center(), psi.radius())) {
    throw DomainError("support B(" + describe_point(psi.center(), im.dim) + ", " +
                      std::to_string(psi.radius()) + ") escapes Omega = " + im.domain.describe());
  }
  switch (im.kind) {
    case Kind::SmoothDensity: {
      if (im.jet) {
        const MultiIndex b = im.jet_base;
        return integrate_against(psi, [&](const Point& xi) { return im.jet(xi, b); },
                                 im.quadrature());
      }
      return integrate_against(psi, im.plain, im.quadrature());
    }
    case Kind::Dirac: {
      const double sign = total_order(im.alpha) % 2 == 0 ? 1.0 : -1.0;
      return sign * psi.partial(im.at, im.alpha);
    }
    case Kind::Heaviside: {
      const double lo = psi.center()[0] - psi.radius();
      const double hi = psi.center()[0] + psi.radius();
      if (hi <= 0.0) return 0.0;
      if (lo >= 0.0) {
        return integrate_against(psi, [](const Point&) { return 1.0; }, im.quadrature());
      }
      return gauss_panels([&](double t) { return psi(t); }, 0.0, hi, 64);
    }
    case Kind::PrincipalValue: {
      const double c = psi.center()[0];
      const double reach = std::max(std::abs(c - psi.radius()), std::abs(c + psi.radius()));
      const double slope0 = psi.partial(Point{0.0, 0.0}, MultiIndex{1, 0});
      // The odd part (psi(t) - psi(-t)) / t extends evenly and smoothly through
      // t = 0, so the half-line trapezoid keeps its accuracy; 2 psi'(0) at t = 0.
      return trapezoid(
          [&](double t) { return t == 0.0 ? 2.0 * slope0 : (psi(t) - psi(-t)) / t; }, 0.0,
          reach, im.quadrature().nodes);
    }
    case Kind::Combination: {
      Complex s = 0.0;
      for (const auto& [c, w] : im.parts) s += c * w.pair(psi);
      return s;
    }
    case Kind::Derivative:
      return -im.parts.front().second.pair(psi.derivative(im.axis));
  }
  return 0.0;
}

Distribution Distribution::derivative(int axis) const {
  const Impl& im = *impl_;
  if (axis < 0 || axis >= im.dim) throw PreconditionError("derivative axis out of range");
  auto impl = std::make_shared<Impl>(im);
  switch (im.kind) {
    case Kind::SmoothDensity:
      if (im.jet) {
        impl->jet_base[axis] += 1;
        impl->label = im.label + "'";
        return Distribution(std::move(impl));
      }
      break;
    case Kind::Dirac:
      if (total_order(im.alpha) < 4) {
        impl->alpha[axis] += 1;
        impl->label = im.label + "'";
        return Distribution(std::move(impl));
      }
      break;
    case Kind::Heaviside:
      return dirac(1).on(im.domain);
    case Kind::Combination: {
      std::vector<std::pair<Complex, Distribution>> parts;
      for (const auto& [c, w] : im.parts) parts.emplace_back(c, w.derivative(axis));
      Distribution out = combination(std::move(parts)).on(im.domain);
      return im.grid ? out.with_grid(*im.grid) : out;
    }
    default:
      break;
  }
  auto generic = std::make_shared<Impl>();
  generic->kind = Kind::Derivative;
  generic->dim = im.dim;
  generic->label = "d(" + im.label + ")";
  generic->domain = im.domain;
  generic->grid = im.grid;
  generic->axis = axis;
  generic->parts.emplace_back(1.0, *this);
  return Distribution(std::move(generic));
}

Distribution operator+(const Distribution& a, const Distribution& b) {
  return Distribution::combination({{1.0, a}, {1.0, b}});
}

Distribution operator-(const Distribution& a, const Distribution& b) {
  return Distribution::combination({{1.0, a}, {-1.0, b}});
}

Distribution operator*(Complex c, const Distribution& a) {
  return Distribution::combination({{c, a}});
}

TestFunction push_forward(const Diffeomorphism& mu, const TestFunction& psi) {
  if (mu.dim() != psi.dim()) throw PreconditionError("map and test function dimensions differ");
  if (!mu.source().contains_ball(psi.center(), psi.radius())) {
    throw DomainError("test function support leaves the chart " + mu.source().describe());
  }
  if (mu.is_identity()) return psi;
  const double lip = mu.forward_lipschitz(psi.center(), psi.radius());
  const Point center = mu.forward(psi.center());
  return TestFunction::from_evaluator(psi.dim(), center, 1.1 * lip * psi.radius(),
                                      [mu, psi](const Point& xi) {
                                        return psi(mu.inverse(xi)) * std::abs(mu.inverse_det(xi));
                                      });
}

Complex classical_pullback(const Diffeomorphism& mu, const Distribution& u,
                           const TestFunction& psi) {
  if (mu.is_identity()) return u.pair(psi);
  return u.pair(push_forward(mu, psi));
}

namespace {

double falling(int n, int k) {
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= n - i;
  return f;
}

}  // namespace

DensityJet smooth_jet_by_name(const std::string& name) {
  if (name == "sin") {
    return [](const Point& x, const MultiIndex& b) {
      return Complex(std::sin(x[0] + 0.5 * M_PI * b[0]));
    };
  }
  if (name == "cos") {
    return [](const Point& x, const MultiIndex& b) {
      return Complex(std::cos(x[0] + 0.5 * M_PI * b[0]));
    };
  }
  if (name == "exp") return [](const Point& x, const MultiIndex&) { return Complex(std::exp(x[0])); };
  int n = -1;
  if (name == "one") n = 0;
  if (name == "x") n = 1;
  if (name.size() == 3 && name[0] == 'x' && name[1] == '^' && name[2] >= '0' && name[2] <= '9') {
    n = name[2] - '0';
  }
  if (n < 0) throw PreconditionError("unknown smooth function '" + name + "'");
  return [n](const Point& x, const MultiIndex& b) {
    if (b[0] > n) return Complex(0.0);
    return Complex(falling(n, b[0]) * std::pow(x[0], n - b[0]));
  };
}

Distribution smooth_by_name(const std::string& name) {
  return Distribution::smooth(1, smooth_jet_by_name(name), name);
}

}  // namespace gfn
