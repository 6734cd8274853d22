#include "gfn/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace gfn {

namespace {

double abs_det(const Matrix2& m, int dim) {
  return std::abs(dim == 1 ? m(0, 0) : m.determinant());
}

std::vector<Point> default_compact() {
  std::vector<Point> k;
  for (int i = 0; i <= 40; ++i) k.push_back(Point{-1.0 + i / 20.0, 0.0});
  return k;
}

}  // namespace

TestFunction transported_test_function(const Diffeomorphism& mu, const TestFunction& phi,
                                       const Point& x) {
  const int dim = phi.dim();
  if (mu.dim() != dim) throw PreconditionError("map and test function dimensions differ");
  const Point base = x + phi.center();
  if (!mu.source().contains_ball(base, phi.radius())) {
    throw DomainError("x + supp phi leaves " + mu.source().describe() + " at x=" +
                      describe_point(x, dim));
  }
  const Point mx = mu.forward(x);
  const double lip = mu.forward_lipschitz(base, phi.radius());
  const Point center = mu.forward(base) - mx;
  return TestFunction::from_evaluator(
      dim, center, 1.1 * lip * phi.radius(), [mu, phi, x, mx, dim](const Point& xi) {
        if (!mu.target().contains(xi + mx)) return 0.0;
        const Point d = mu.inverse_increment(x, xi);
        return phi(d) / abs_det(mu.jacobian(x + d), dim);
      });
}

Representative pullback_rep(const Diffeomorphism& mu, const Representative& r) {
  if (r.formalism() == Formalism::J) {
    throw PreconditionError("pullback_rep acts on C-formalism representatives");
  }
  if (mu.dim() != r.dim()) throw PreconditionError("map and representative dimensions differ");
  if (mu.is_identity()) return r;

  const bool phi_free = r.traits().phi_independent;
  Representative::Evaluator eval = [mu, r, phi_free](const TestFunction& phi, const Point& x) {
    if (phi_free) return r(phi, mu.forward(x));
    return r(transported_test_function(mu, phi, x), mu.forward(x));
  };
  Representative::Exponent exponent;
  if (r.has_exponent()) {
    exponent = [mu, r](const TestFunction& phi, const Point& x) {
      return r.exponent(transported_test_function(mu, phi, x), mu.forward(x));
    };
  }
  auto admissible = [mu, r, phi_free](const TestFunction& phi, const Point& x) {
    if (!mu.source().contains(x)) return false;
    if (phi_free) return r.admissible(phi, mu.forward(x));
    if (!mu.source().contains_ball(x + phi.center(), phi.radius())) return false;
    return r.admissible(transported_test_function(mu, phi, x), mu.forward(x));
  };
  Representative::Traits traits = r.traits();
  traits.x_independent = traits.x_independent && traits.phi_independent;
  return transport(r.dim(), r.formalism(), std::move(eval), std::move(exponent),
                   std::move(admissible), traits, mu.name() + "^(" + r.label() + ")",
                   mu.source());
}

Representative embed_pullback(const Diffeomorphism& mu, const Distribution& u) {
  return Representative(
      Formalism::C, u.dim(),
      [mu, u](const TestFunction& phi, const Point& x) {
        return classical_pullback(mu, u, translate(phi, x));
      },
      {.linear = true}, "iota(" + mu.name() + "*" + u.label() + ")", mu.source());
}

TestFunction transformed_test_function(const Diffeomorphism& mu, const TestFunction& pt,
                                       double eps, const Point& x) {
  if (mu.is_identity()) return pt;
  const int dim = pt.dim();
  const Point y = mu.inverse(x);
  // x - mu(y) is a rounding residual; folding it into the increment keeps
  // the argument of phi~ free of cancellation.
  const Point resid = x - mu.forward(y);
  const Point base = y + eps * pt.center();
  const double lip = mu.forward_lipschitz(base, eps * pt.radius());
  const Point center = (1.0 / eps) * (mu.forward(base) - x);
  return TestFunction::from_evaluator(
      dim, center, 1.1 * lip * pt.radius(), [mu, pt, eps, x, y, resid, dim](const Point& xi) {
        if (!mu.target().contains(x + eps * xi)) return 0.0;
        const Point d = mu.inverse_increment(y, eps * xi + resid);
        return pt((1.0 / eps) * d) / abs_det(mu.jacobian(y + d), dim);
      });
}

TransformedPath transform_test_object(const Diffeomorphism& mu, const TestObjectPath& pt,
                                      const std::vector<std::vector<Point>>& compacts) {
  if (mu.dim() != pt.dim()) throw PreconditionError("map and test object dimensions differ");
  if (mu.is_identity()) {
    PartialDomain full;
    for (const auto& L : compacts) full.register_compact(L);
    return {pt, full};
  }
  const double bound = pt.support_bound();
  PartialDomain domain([mu, pt, bound](double eps, const Point& x) {
    if (!mu.target().contains(x)) return false;
    const Point y = mu.inverse(x);
    if (!pt.defined_at(eps, y)) return false;
    return mu.source().contains_ball(y, eps * bound);
  });
  const auto Ls = compacts.empty() ? std::vector<std::vector<Point>>{default_compact()} : compacts;
  double declared = 0.0;
  for (const auto& L : Ls) {
    const double e0 = domain.register_compact(L);
    for (const auto& x : L) {
      if (e0 <= 0.0 || !mu.target().contains(x)) continue;
      const double lip = mu.forward_lipschitz(mu.inverse(x), e0 * bound);
      declared = std::max(declared, 1.1 * lip * bound);
    }
  }
  const std::string id = mu.name() + "^(" + pt.id() + ")";
  auto gen = [mu, pt](double eps, const Point& x) {
    return transformed_test_function(mu, pt(eps, mu.inverse(x)), eps, x);
  };
  auto path = TestObjectPath::full_path(pt.dim(), gen, declared, id, domain);
  return {path, domain};
}

namespace {

double sup_partial(const TestFunction& phi, const MultiIndex& beta, int nodes) {
  const Point& c = phi.center();
  const double r = phi.radius();
  double s = 0.0;
  if (phi.dim() == 1) {
    for (int i = 0; i <= nodes; ++i) {
      s = std::max(s, std::abs(phi.partial(Point{c[0] - r + 2.0 * r * i / nodes, 0.0}, beta)));
    }
    return s;
  }
  const int n = std::max(8, nodes / 4);
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const Point xi{c[0] - r + 2.0 * r * i / n, c[1] - r + 2.0 * r * j / n};
      s = std::max(s, std::abs(phi.partial(xi, beta)));
    }
  }
  return s;
}

}  // namespace

ZReport check_Z_requirements(const TestObjectPath& phi, const PartialDomain& domain,
                             const std::vector<Point>& L, double eps0, const ZOptions& opt) {
  ZReport rep;
  std::ostringstream msg;
  rep.derivative_sup.assign(opt.beta_max + 1, 0.0);
  rep.derivative_growth.assign(opt.beta_max + 1, 1.0);
  if (!(eps0 > 0.0) || L.empty()) {
    rep.membership = false;
    rep.message = "no eps_0 > 0 for this compact";
    return rep;
  }
  const int dim = phi.dim();
  const int half = opt.levels / 2;
  std::vector<double> early(opt.beta_max + 1, 0.0), late(opt.beta_max + 1, 0.0);
  double extent_first = 0.0, extent_last = 0.0;

  for (int m = 0; m < opt.levels; ++m) {
    const double eps = eps0 * std::ldexp(1.0, -m);
    double extent_level = 0.0;
    for (const auto& x : L) {
      if (!domain.contains(eps, x)) {
        if (rep.membership) {
          msg << "(eps=" << eps << ", x=" << describe_point(x, dim) << ") outside D; ";
        }
        rep.membership = false;
        continue;
      }
      const TestFunction f = phi(eps, x);
      extent_level = std::max(extent_level, support_extent(f));
      for (int b = 0; b <= opt.beta_max; ++b) {
        for (const auto& beta : multi_indices(dim, b, b)) {
          const double s = sup_partial(f, beta, opt.xi_nodes);
          rep.derivative_sup[b] = std::max(rep.derivative_sup[b], s);
          auto& bucket = m < half ? early : late;
          bucket[b] = std::max(bucket[b], s);
        }
      }
    }
    rep.support_max = std::max(rep.support_max, extent_level);
    if (m == 0) extent_first = extent_level;
    extent_last = extent_level;
  }

  if (extent_first > 0.0) rep.support_growth = extent_last / extent_first;
  if (rep.support_max > phi.support_bound() * (1.0 + 1e-12)) {
    rep.support_bounded = false;
    msg << "support extent " << rep.support_max << " exceeds declared bound "
        << phi.support_bound() << "; ";
  }
  if (rep.support_growth > opt.growth_limit) {
    rep.support_bounded = false;
    msg << "support extent grows by " << rep.support_growth << " as eps decreases; ";
  }
  for (int b = 0; b <= opt.beta_max; ++b) {
    if (!std::isfinite(rep.derivative_sup[b])) {
      rep.derivatives_bounded = false;
      msg << "|beta|=" << b << " derivative not finite; ";
      continue;
    }
    if (early[b] > 0.0) rep.derivative_growth[b] = late[b] / early[b];
    if (rep.derivative_growth[b] > opt.growth_limit) {
      rep.derivatives_bounded = false;
      msg << "|beta|=" << b << " derivative bound grows by " << rep.derivative_growth[b] << "; ";
    }
  }
  rep.message = msg.str();
  return rep;
}

}  // namespace gfn
