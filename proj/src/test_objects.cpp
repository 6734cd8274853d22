#include "gfn/test_objects.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "gfn/diffeomorphism.hpp"
#include "gfn/pullback.hpp"

namespace gfn {

SeededUniform::SeededUniform(std::uint64_t seed) : engine_(seed) {}

double SeededUniform::operator()() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

void BatterySpec::validate() const {
  if (count < 1) throw PreconditionError("battery count must be >= 1");
  if (q < 0) throw PreconditionError("battery q must be >= 0");
  if (dim != 1 && dim != 2) throw PreconditionError("battery dimension must be 1 or 2");
}

namespace {

struct StaticParams {
  double radius = 1.0;
  double asym = 0.0;
  bool canonical = false;
};

StaticParams draw_static(SeededUniform& u, bool canonical) {
  StaticParams p;
  p.radius = u(0.5, 1.5);
  p.asym = u(-0.6, 0.6);
  p.canonical = canonical;
  return p;
}

TestFunction build_static(const StaticParams& p, int q, int dim, int j) {
  if (p.canonical) return build_mollifier(q, dim);
  MollifierShape shape;
  if (dim == 1 && j % 2 == 1) shape.extra_coefficients = {p.asym};
  return build_mollifier(q, dim, p.radius, shape);
}

struct Perturbation {
  TestFunction chi;
  double amp = 0.0;
  double omega = 0.0;
  double x_omega = 0.0;

  double rho(double eps) const { return 1.0 + amp * std::sin(omega * eps); }
};

Perturbation draw_perturbation(SeededUniform& u, int dim) {
  const double c1 = u(0.1, 0.4), c2 = -u(0.1, 0.4);
  const double r1 = u(0.3, 0.5), r2 = u(0.3, 0.5);
  Perturbation p;
  p.chi = unit_bump(dim, Point{c1, 0.0}, r1) - unit_bump(dim, Point{c2, 0.0}, r2);
  p.amp = u(0.2, 0.5);
  p.omega = u(1.0, 3.0);
  p.x_omega = u(1.0, 3.0);
  return p;
}

double x_coordinate(const Point& x, int dim) { return dim == 1 ? x[0] : x[0] + 0.5 * x[1]; }

std::string member_id(const BatterySpec& s, int j) {
  const char* tag = s.mode == PathMode::Static ? "static" : s.mode == PathMode::EpsPath ? "eps" : "full";
  return std::string(tag) + ":q" + std::to_string(s.q) + ":" + std::to_string(j);
}

}  // namespace

std::vector<TestObjectPath> make_battery(const BatterySpec& spec) {
  spec.validate();
  SeededUniform u(spec.seed);
  const int q = spec.q;
  const int dim = spec.dim;
  std::vector<TestObjectPath> out;

  if (spec.mode == PathMode::Static) {
    for (int j = 0; j < spec.count; ++j) {
      const auto p = draw_static(u, j == 0);
      out.push_back(TestObjectPath::constant(build_static(p, q, dim, j), member_id(spec, j)));
    }
    return out;
  }

  if (spec.mode == PathMode::EpsPath) {
    for (int j = 0; j < spec.count; ++j) {
      const auto p = draw_static(u, j == 0);
      const auto pert = draw_perturbation(u, dim);
      const TestFunction base = build_static(p, q, dim, j);
      const double bound = std::max(support_extent(base), support_extent(pert.chi));
      if (!spec.perturbed) {
        out.push_back(TestObjectPath::eps_path(
            dim, [base](double) { return base; }, bound, member_id(spec, j)));
        continue;
      }
      auto g = [base, pert, q](double eps) {
        const std::pair<double, TestFunction> parts[] = {
            {1.0, base}, {std::pow(eps, q) * pert.rho(eps), pert.chi}};
        return linear_combination(parts);
      };
      out.push_back(TestObjectPath::eps_path(dim, g, bound, member_id(spec, j)));
    }
    return out;
  }

  const bool with_transformed = spec.transformed && q <= 1 && dim == 1 && spec.count >= 4;
  const int n_mix = with_transformed ? spec.count - 2 : spec.count;
  for (int j = 0; j < n_mix; ++j) {
    const auto pa = draw_static(u, j == 0);
    const auto pb = draw_static(u, false);
    const auto pert = draw_perturbation(u, dim);
    const double omega = u(1.0, 3.0);
    const double theta = u(0.0, 2.0 * std::numbers::pi);
    const TestFunction a = build_static(pa, q, dim, j);
    const TestFunction b = build_static(pb, q, dim, j + 1);
    const bool perturbed = spec.perturbed;
    const double bound = std::max({support_extent(a), support_extent(b),
                                   perturbed ? support_extent(pert.chi) : 0.0});
    auto g = [a, b, pert, omega, theta, q, dim, perturbed](double eps, const Point& x) {
      const double t = x_coordinate(x, dim);
      const double w = 0.5 + 0.4 * std::sin(omega * t + theta);
      const double c = perturbed ? std::pow(eps, q) * pert.rho(eps) *
                                       (1.0 + 0.5 * std::sin(pert.x_omega * t))
                                 : 0.0;
      const std::pair<double, TestFunction> parts[] = {{w, a}, {1.0 - w, b}, {c, pert.chi}};
      return linear_combination(parts);
    };
    out.push_back(TestObjectPath::full_path(dim, g, bound, member_id(spec, j)));
  }
  if (with_transformed) {
    const char* maps[] = {"sine", "cubic"};
    for (int k = 0; k < 2; ++k) {
      const int j = n_mix + k;
      const auto p = draw_static(u, false);
      const auto src = TestObjectPath::constant(build_static(p, q, dim, j), member_id(spec, j));
      auto t = transform_test_object(diffeo_by_name(maps[k]), src);
      out.push_back(t.path.with_id(member_id(spec, j) + ":" + maps[k]));
    }
  }
  return out;
}

std::vector<TestObjectPath> make_battery(PathMode mode, int q, int count, std::uint64_t seed) {
  BatterySpec s;
  s.mode = mode;
  s.q = q;
  s.count = count;
  s.seed = seed;
  return make_battery(s);
}

const char* to_string(MomentKind k) {
  switch (k) {
    case MomentKind::StrictAq: return "strict_Aq";
    case MomentKind::AsymptCM: return "asympt_CM";
    case MomentKind::AlInf: return "A_l_inf";
  }
  return "?";
}

void MomentClass::validate() const {
  if (q < 1) throw PreconditionError("moment classes need q >= 1");
  if (K.empty()) throw PreconditionError("moment class needs at least one sample point");
  if (gamma_cap < 0) throw PreconditionError("gamma_cap must be >= 0");
}

void MomentSweep::validate() const {
  if (i_min < 2 || i_max > 20 || i_min >= i_max) {
    throw PreconditionError("eps grid needs 2 <= i_min < i_max <= 20");
  }
  if (fit.window < 4) throw PreconditionError("fit window must be >= 4");
  if (!(x_step > 0.0)) throw PreconditionError("x_step must be > 0");
}

namespace {

// Central stencil for d^k/dx^k with step h: offsets in units of h.
std::vector<std::pair<int, double>> central_weights(int k) {
  switch (k) {
    case 0: return {{0, 1.0}};
    case 1: return {{-1, -0.5}, {1, 0.5}};
    case 2: return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    case 3: return {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
    case 4: return {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};
    default: break;
  }
  throw PreconditionError("x-derivative order above 4 in moment checks");
}

// d_x^gamma of a scalar function of x: tensor central stencil plus one
// Richardson level.
template <class F>
double x_derivative(F&& f, const Point& x, const MultiIndex& gamma, double h, int dim) {
  auto stencil = [&](double step) {
    const auto w0 = central_weights(gamma[0]);
    const auto w1 = dim == 2 ? central_weights(gamma[1]) : std::vector<std::pair<int, double>>{{0, 1.0}};
    double s = 0.0;
    for (const auto& [o0, c0] : w0) {
      for (const auto& [o1, c1] : w1) s += c0 * c1 * f(Point{x[0] + o0 * step, x[1] + o1 * step});
    }
    return s / std::pow(step, total_order(gamma));
  };
  if (total_order(gamma) == 0) return f(x);
  return (4.0 * stencil(0.5 * h) - stencil(h)) / 3.0;
}

struct PointKey {
  double eps;
  double x0, x1;
  bool operator<(const PointKey& o) const {
    return std::tie(eps, x0, x1) < std::tie(o.eps, o.x0, o.x1);
  }
};

}  // namespace

MomentVerdict check_moment_class(const TestObjectPath& path, const MomentClass& cls,
                                 const MomentSweep& sweep) {
  cls.validate();
  sweep.validate();
  const int dim = path.dim();
  const int q = cls.q;
  std::vector<MultiIndex> alphas{MultiIndex{0, 0}};
  const auto betas = multi_indices(dim, 1, q);
  alphas.insert(alphas.end(), betas.begin(), betas.end());
  const QuadratureGrid grid = QuadratureGrid::default_for(dim);

  std::map<PointKey, std::vector<double>> cache;
  auto moments_at = [&](double eps, const Point& x) -> const std::vector<double>& {
    const double e = path.mode() == PathMode::Static ? 1.0 : eps;
    const Point xx = path.mode() == PathMode::FullPath ? x : Point{0.0, 0.0};
    const PointKey key{e, xx[0], xx[1]};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    return cache.emplace(key, moments(path(eps, xx), alphas, grid)).first->second;
  };

  MomentVerdict v;
  for (int i = sweep.i_min; i <= sweep.i_max; ++i) {
    const double eps = std::ldexp(1.0, -i);
    for (const auto& x : cls.K) {
      const auto& m = moments_at(eps, x);
      v.mass_deviation = std::max(v.mass_deviation, std::abs(m[0] - 1.0));
      for (std::size_t j = 1; j < m.size(); ++j) v.max_moment = std::max(v.max_moment, std::abs(m[j]));
    }
  }

  if (cls.kind == MomentKind::StrictAq) {
    v.pass = v.mass_deviation <= cls.tau && v.max_moment <= cls.tau;
    return v;
  }
  v.pass = v.mass_deviation <= 1e-9;

  struct Target {
    MultiIndex beta, gamma;
    bool x_derivative;
  };
  std::vector<Target> targets;
  for (const auto& b : betas) targets.push_back({b, MultiIndex{0, 0}, false});
  if (cls.kind == MomentKind::AlInf) {
    for (const auto& b : betas) {
      for (const auto& g : multi_indices(dim, 1, cls.gamma_cap)) {
        targets.push_back({b, g, true});
      }
      for (const auto& g : multi_indices(dim, 1, total_order(b) - 1)) {
        if (g[0] <= b[0] && g[1] <= b[1]) targets.push_back({b, g, false});
      }
    }
  }

  auto beta_slot = [&](const MultiIndex& b) {
    return static_cast<std::size_t>(std::find(alphas.begin(), alphas.end(), b) - alphas.begin());
  };

  for (const auto& t : targets) {
    MomentOrder mo;
    mo.beta = t.beta;
    mo.gamma = t.gamma;
    mo.x_derivative = t.x_derivative;
    mo.series.member_id = path.id();
    mo.series.alpha = t.beta;
    const bool x_free = path.mode() != PathMode::FullPath;
    FitOptions fopt = sweep.fit;
    if (t.x_derivative) fopt.noise_floor *= std::pow(2.0 / sweep.x_step, total_order(t.gamma));
    for (int i = sweep.i_min; i <= sweep.i_max; ++i) {
      const double eps = std::ldexp(1.0, -i);
      double s = 0.0;
      for (const auto& x : cls.K) {
        double val = 0.0;
        if (t.x_derivative) {
          if (!x_free) {
            val = 0.0;
          } else {
            const std::size_t slot = beta_slot(t.beta);
            val = x_derivative([&](const Point& y) { return moments_at(eps, y)[slot]; }, x, t.gamma,
                               sweep.x_step, dim);
          }
        } else if (total_order(t.gamma) == 0) {
          val = moments_at(eps, x)[beta_slot(t.beta)];
        } else {
          // int xi^beta d^gamma phi = (-1)^|gamma| beta!/(beta-gamma)! m_{beta-gamma}
          const MultiIndex r{t.beta[0] - t.gamma[0], t.beta[1] - t.gamma[1]};
          double coef = 1.0;
          for (int a = 0; a < 2; ++a) {
            for (int k = 0; k < t.gamma[a]; ++k) coef *= t.beta[a] - k;
          }
          if (total_order(t.gamma) % 2 == 1) coef = -coef;
          val = coef * moments_at(eps, x)[beta_slot(r)];
        }
        s = std::max(s, std::abs(val));
      }
      mo.max_abs = std::max(mo.max_abs, s);
      SeriesPoint p;
      p.i = i;
      p.eps = eps;
      p.underflow = s == 0.0 || (sweep.eps_scaled_floor && s <= fopt.noise_floor / eps);
      p.log2_value = s == 0.0 ? -std::numeric_limits<double>::infinity() : std::log2(s);
      mo.series.points.push_back(p);
    }
    mo.fit = fit_order(mo.series, fopt);
    mo.pass = mo.fit.negligible(q, sweep.fit.tolerance);
    v.pass = v.pass && mo.pass;
    v.orders.push_back(std::move(mo));
  }
  return v;
}

DirectionBattery perturbation_directions(int count, std::uint64_t seed, int dim) {
  if (count < 1) throw PreconditionError("direction count must be >= 1");
  SeededUniform u(seed ^ 0x9e3779b97f4a7c15ULL);
  DirectionBattery b;
  for (int j = 0; j < count; ++j) {
    const double c1 = u(-0.5, 0.5), c2 = u(-0.5, 0.5);
    const double r1 = u(0.3, 0.5), r2 = u(0.3, 0.5);
    const Point p1 = dim == 1 ? Point{c1, 0.0} : Point{c1, 0.5 * c2};
    const Point p2 = dim == 1 ? Point{c2, 0.0} : Point{c2, -0.5 * c1};
    TestFunction psi = unit_bump(dim, p1, r1) - unit_bump(dim, p2, r2);
    b.sup_bound = std::max(b.sup_bound, psi.sup_norm());
    b.psi.push_back(std::move(psi));
  }
  return b;
}

}  // namespace gfn
