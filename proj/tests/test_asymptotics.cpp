#include "doctest.h"

#include <cmath>
#include <random>

#include "gfn/asymptotics.hpp"
#include "gfn/pullback.hpp"

using namespace gfn;

namespace {

template <class F>
double midpoint(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * h);
  return s * h;
}

SweepSpec small_spec(int n_points = 11) {
  SweepSpec s;
  s.K = SweepSpec::uniform_grid(-1.0, 1.0, n_points);
  return s;
}

Representative iota_minus_sigma(const std::string& f) {
  return sub(embed_C(smooth_by_name(f)), embed_sigma(f));
}

}  // namespace

TEST_CASE("sweep of the embedded delta follows eps^-1 phi(0)") {
  const auto battery = make_battery(PathMode::Static, 1, 3, 2);
  const auto r = embed_C(Distribution::dirac(1));
  for (const auto& phi : battery) {
    const auto s = sweep(r, phi, SweepSpec{});
    REQUIRE(s.size() == 1);
    const double phi0 = phi.constant_value()(0.0);
    for (const auto& p : s.front().points) {
      if (p.i < 6) continue;
      CHECK(std::exp2(p.log2_value) == doctest::Approx(std::ldexp(phi0, p.i)).epsilon(1e-13));
    }
  }
}

TEST_CASE("sweep of sigma(f) is constant in eps") {
  const auto s = sweep(embed_sigma("sin"), make_battery(PathMode::Static, 0, 1, 1)[0], SweepSpec{});
  for (const auto& p : s.front().points) {
    CHECK(std::exp2(p.log2_value) == doctest::Approx(std::sin(1.0)).epsilon(1e-15));
  }
}

TEST_CASE("iota(sin) - sigma(sin) on strict A_2 follows the Taylor remainder") {
  const auto r = iota_minus_sigma("sin");
  // Asymmetric member (m3 != 0): eps^3 m3 cos(x) / 6 leads.
  const auto asym = TestObjectPath::constant(build_mollifier(2, 1, 1.0, MollifierShape{{5.0}}), "a");
  const auto& phi = asym.constant_value();
  const double m3 = midpoint([&](double t) { return t * t * t * phi(t); }, -1.0, 1.0, 1 << 15);
  REQUIRE(std::abs(m3) > 1e-2);
  const auto s = sweep(r, asym, small_spec());
  for (const auto& p : s.front().points) {
    if (p.i < 7 || p.underflow) continue;
    const double lead = std::pow(p.eps, 3) * std::abs(m3) / 6.0;  // sup at x = 0
    CHECK(std::exp2(p.log2_value) == doctest::Approx(lead).epsilon(0.05));
  }
  CHECK(fit_order(s.front()).slope == doctest::Approx(3.0).epsilon(0.05));
  // The canonical member is symmetric: order 4.
  const auto sym = make_battery(PathMode::Static, 2, 1, 3)[0];
  CHECK(fit_order(sweep(r, sym, small_spec()).front()).slope >= 3.8);
}

TEST_CASE("moderateness of the embedded delta on full paths") {
  const auto battery = make_battery(PathMode::FullPath, 0, 8, 5);
  const auto v = test_moderate(embed_C(Distribution::dirac(1)), battery, SweepSpec{});
  CHECK(v.moderate);
  CHECK(v.N == 1);
  REQUIRE(v.series.size() == 8);
  for (const auto& s : v.series) CHECK(s.fit.slope == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("smooth functions are moderate with N = 0") {
  auto spec = small_spec();
  spec.alphas = {MultiIndex{0, 0}, MultiIndex{1, 0}};
  const auto battery = make_battery(PathMode::Static, 1, 2, 6);
  for (const char* f : {"sin", "cos", "exp", "one", "x", "x^2", "x^4"}) {
    const auto v = test_moderate(embed_sigma(f), battery, spec);
    CHECK(v.moderate);
    CHECK(v.N == 0);
  }
}

TEST_CASE("identity pullback gives identical tables") {
  const auto battery = make_battery(PathMode::FullPath, 0, 3, 7);
  const auto r = embed_C(Distribution::heaviside());
  const auto a = test_moderate(r, battery, small_spec());
  const auto b = test_moderate(pullback_rep(identity_map(1), r), battery, small_spec());
  REQUIRE(a.series.size() == b.series.size());
  for (std::size_t j = 0; j < a.series.size(); ++j) {
    for (std::size_t i = 0; i < a.series[j].series.points.size(); ++i) {
      CHECK(a.series[j].series.points[i].log2_value == b.series[j].series.points[i].log2_value);
    }
  }
}

TEST_CASE("verdicts are invariant under diffeomorphisms") {
  const auto battery = make_battery(PathMode::Static, 0, 2, 8);
  auto spec = small_spec(9);
  for (const auto& r : {embed_C(Distribution::dirac(1)), embed_C(Distribution::heaviside()),
                        embed_C(smooth_by_name("sin"))}) {
    const int n = test_moderate(r, battery, spec).N;
    for (const char* name : {"scale2", "sine", "cubic"}) {
      const auto v = test_moderate(pullback_rep(diffeo_by_name(name), r), battery, spec);
      CHECK(v.moderate);
      CHECK_MESSAGE(v.N == n, r.label() << " under " << name);
    }
  }
}

TEST_CASE("negligibility witnesses") {
  NegligibleSpec spec;
  spec.sweep = small_spec(9);
  spec.count = 2;
  spec.q_max = 3;
  const auto v = test_negligible(iota_minus_sigma("sin"), {2}, spec);
  REQUIRE(v.results.size() == 1);
  CHECK(v.results[0].witness_q == 2);

  const auto zero = sub(embed_C(smooth_by_name("sin")), embed_C(smooth_by_name("sin")));
  const auto z = test_negligible(zero, {1, 2, 3}, spec);
  for (const auto& r : z.results) CHECK(r.witness_q == r.n);
}

TEST_CASE("association on asymptotic and strict batteries") {
  const auto x = embed_C(smooth_by_name("x"));
  const auto r = sub(mul(x, x), embed_C(smooth_by_name("x^2")));
  auto spec = small_spec(5);
  for (const auto& phi : make_battery(PathMode::Static, 2, 4, 9)) {
    for (const auto& p : sweep(r, phi, spec).front().points) CHECK(std::exp2(p.log2_value) <= 1e-12);
  }
  // Closed form eps^2 (m1^2 - m2) of phi(eps); order q + 2 needs m2 = O(eps^q),
  // which an A_1 base does not give (m2 of the base is nonzero).
  for (int q = 1; q <= 3; ++q) {
    for (const auto& phi : make_battery(PathMode::EpsPath, q, 3, 10)) {
      const auto s = sweep(r, phi, spec).front();
      for (const auto& p : s.points) {
        if (p.underflow) continue;
        const auto f = phi(p.eps, {0.0, 0.0});
        const double a = f.center()[0] - f.radius(), b = f.center()[0] + f.radius();
        const double m1 = midpoint([&](double t) { return t * f(t); }, a, b, 1 << 14);
        const double m2 = midpoint([&](double t) { return t * t * f(t); }, a, b, 1 << 14);
        const double closed = p.eps * p.eps * std::abs(m1 * m1 - m2);
        CHECK(std::abs(std::exp2(p.log2_value) - closed) <= 1e-6 * closed + 5e-15);
      }
      const auto f = fit_order(s);
      if (q == 1) {
        CHECK(f.slope == doctest::Approx(2.0).epsilon(0.02));
      } else {
        CHECK_MESSAGE(f.slope >= q + 2 - 0.2, phi.id() << " slope " << f.slope);
      }
    }
  }
}

TEST_CASE("d1 form") {
  const auto battery = make_battery(PathMode::Static, 1, 2, 11);
  const auto dirs = perturbation_directions(3, 11);
  auto spec = small_spec(21);
  const auto delta = embed_C(Distribution::dirac(1));
  const auto v = d1_form_test(delta, battery, dirs.psi, 2, spec);
  REQUIRE(v.by_k.size() == 3);
  CHECK(v.moderate);
  CHECK(v.by_k[0].N == 1);
  // k = 1 is the embedding evaluated at psi.
  for (const auto& s : v.by_k[1].series) {
    const int j = std::stoi(s.series.directions);
    for (const auto& p : s.series.points) {
      double expect = 0.0;
      for (const auto& x : spec.K) {
        expect = std::max(expect, std::abs(delta(scale(dirs.psi[j], p.eps), x)));
      }
      CHECK(std::exp2(p.log2_value) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(s.fit.slope == doctest::Approx(-1.0).epsilon(0.05));
  }
  // Linear in phi: no second derivative.
  for (const auto& s : v.by_k[2].series) CHECK(s.fit.plus_infinity);

  const auto sv = d1_form_test(embed_sigma("sin"), battery, dirs.psi, 2, spec);
  CHECK(sv.moderate);
  CHECK(sv.N == 0);
  for (int k = 1; k <= 2; ++k) {
    for (const auto& s : sv.by_k[k].series) CHECK(s.fit.plus_infinity);
  }
}

TEST_CASE("counterexample energy") {
  const auto phi = build_mollifier(0);
  const double l2 = midpoint([&](double t) { return phi(t) * phi(t); }, -1.0, 1.0, 1 << 15);
  for (int i = 2; i <= 12; i += 2) {
    const double eps = std::ldexp(1.0, -i);
    CHECK(l2_energy(scale(phi, eps)) == doctest::Approx(l2 / eps).epsilon(1e-10));
  }
  const auto mu = diffeo_by_name("sine");
  const auto r = pullback_rep(mu, counterexample_representative());
  for (double eps : {0.25, 0.03125, 0.001}) {
    for (double x : {-0.7, 0.0, 0.9}) {
      // eps^-1 int phi(u)^2 / mu'(x + eps u) du
      const double oracle =
          midpoint([&](double u) { return phi(u) * phi(u) / (1.0 + 0.25 * std::cos(x + eps * u)); },
                   -1.0, 1.0, 1 << 15) /
          eps;
      CHECK(r.exponent(scale(phi, eps), {x, 0.0}) == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("counterexample scenario") {
  SweepSpec spec = small_spec(11);
  spec.i_min = 4;
  spec.i_max = 14;
  const auto src = TestObjectPath::constant(build_mollifier(0), "bump");
  const auto eps_battery = make_battery(PathMode::EpsPath, 0, 2, 12);
  const auto res = counterexample_scenario(diffeo_by_name("sine"), src, spec, eps_battery);
  CHECK(res.super_polynomial);
  CHECK(res.strictly_increasing);
  CHECK(res.slope_ratio >= 10.0);
  CHECK(res.untransformed.moderate);
  CHECK(res.untransformed.N == 0);
  CHECK(res.max_modulus_deviation == 0.0);
  for (const auto& p : res.transformed.points) CHECK(std::isfinite(p.log2_value));
}
