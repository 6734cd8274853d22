#include "gfn/asymptotics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "gfn/pullback.hpp"

namespace gfn {

void SweepSpec::validate() const {
  if (i_min < 2) throw PreconditionError("sweep needs i_min >= 2");
  if (i_max > 20) throw PreconditionError("sweep needs i_max <= 20");
  if (i_min >= i_max) throw PreconditionError("sweep needs i_min < i_max");
  if (fit.window < 4) throw PreconditionError("fit window must be >= 4");
  if (K.empty()) throw PreconditionError("sweep compact K is empty");
  if (alphas.empty()) throw PreconditionError("sweep needs at least one alpha");
}

std::vector<Point> SweepSpec::uniform_grid(double a, double b, int n) {
  if (n < 2) throw PreconditionError("grid needs at least two points");
  std::vector<Point> k;
  for (int i = 0; i < n; ++i) k.push_back(Point{a + (b - a) * i / (n - 1), 0.0});
  return k;
}

namespace {

// Runs fn(i) for i in [0, n) on a small pool; the first failure by index is
// rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  std::size_t workers = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string format_eps_point(double eps, const Point& x, int dim) {
  std::ostringstream os;
  os << "(eps=" << eps << ", x=" << describe_point(x, dim) << ")";
  return os.str();
}

}  // namespace

std::vector<Series> sweep(const Representative& r, const TestObjectPath& phi, const SweepSpec& spec,
                          const std::vector<TestFunction>& directions,
                          const std::string& direction_ids) {
  spec.validate();
  const int dim = phi.dim();
  double eps0 = 1.0;
  if (spec.honor_eps0 && phi.domain()) eps0 = phi.domain()->eps0(spec.K);

  std::vector<int> levels;
  for (int i = spec.i_min; i <= spec.i_max; ++i) {
    if (std::ldexp(1.0, -i) <= eps0) levels.push_back(i);
  }
  const std::size_t nk = spec.K.size();
  const std::size_t na = spec.alphas.size();
  const bool log_channel = r.has_exponent();
  const int k = static_cast<int>(directions.size());

  // values[(level * nk + xi) * na + a] = log2 |...|
  std::vector<double> values(levels.size() * nk * na, 0.0);
  parallel_for(levels.size() * nk, spec.threads, [&](std::size_t idx) {
    const double eps = std::ldexp(1.0, -levels[idx / nk]);
    const Point& x = spec.K[idx % nk];
    if (!phi.defined_at(eps, x)) {
      throw DomainError("sweep point " + format_eps_point(eps, x, dim) + " outside the domain of " +
                        phi.id() + "; eps_0 too large");
    }
    Slot slot;
    slot.x_dependent = phi.mode() == PathMode::FullPath;
    slot.at = [&phi, eps](const Point& y) { return scale(phi(eps, y), eps); };
    DerivativeRequest req;
    req.h = eps * std::ldexp(1.0, -7);
    req.t_relative = spec.t_relative;
    for (const auto& psi : directions) req.directions.push_back(scale(psi, eps));
    for (std::size_t a = 0; a < na; ++a) {
      req.alpha = spec.alphas[a];
      double v;
      try {
        if (log_channel) {
          v = mixed_log_derivative(r, slot, x, req).log_abs / std::numbers::ln2;
        } else {
          v = std::log2(std::abs(mixed_derivative(r, slot, x, req)));
        }
      } catch (const DomainError& e) {
        throw DomainError("sweep point " + format_eps_point(eps, x, dim) + ": " + e.what());
      }
      values[idx * na + a] = v;
    }
  });

  std::vector<Series> out;
  for (std::size_t a = 0; a < na; ++a) {
    Series s;
    s.member_id = phi.id();
    s.alpha = spec.alphas[a];
    s.k = k;
    s.directions = direction_ids;
    s.log_channel = log_channel;
    const int order = total_order(spec.alphas[a]);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      SeriesPoint p;
      p.i = levels[l];
      p.eps = std::ldexp(1.0, -levels[l]);
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t xi = 0; xi < nk; ++xi) m = std::max(m, values[(l * nk + xi) * na + a]);
      p.log2_value = m;
      // Differences amplify rounding by h^-|alpha| and t^-k.
      const double h = p.eps * std::ldexp(1.0, -7);
      const double floor2 = std::log2(spec.fit.noise_floor) - order * std::log2(h) -
                            k * std::log2(spec.t_relative);
      p.underflow = !std::isfinite(m) || (!log_channel && m <= floor2);
      s.points.push_back(p);
    }
    out.push_back(std::move(s));
  }
  return out;
}

AsymptoticVerdict classify(std::vector<Series> series, const FitOptions& fit) {
  AsymptoticVerdict v;
  for (auto& s : series) {
    SeriesVerdict sv;
    sv.fit = fit_order(s, fit);
    sv.series = std::move(s);
    if (sv.fit.super_polynomial) v.super_polynomial = true;
    if (!sv.fit.plus_infinity) v.N = std::max(v.N, sv.fit.moderate_N(fit.tolerance));
    v.series.push_back(std::move(sv));
  }
  v.moderate = !v.super_polynomial && v.N <= kModerateCap;
  return v;
}

AsymptoticVerdict test_moderate(const Representative& r, const std::vector<TestObjectPath>& battery,
                                const SweepSpec& spec) {
  std::vector<Series> all;
  for (const auto& phi : battery) {
    auto s = sweep(r, phi, spec);
    all.insert(all.end(), s.begin(), s.end());
  }
  return classify(std::move(all), spec.fit);
}

bool NegligibleVerdict::all_found() const {
  return std::all_of(results.begin(), results.end(),
                     [](const NegligibleResult& r) { return r.witness_q >= 0; });
}

NegligibleVerdict test_negligible(const Representative& r, const std::vector<int>& n_targets,
                                  const NegligibleSpec& spec) {
  NegligibleVerdict v;
  std::map<int, double> min_slope;
  auto slope_for = [&](int q) {
    auto it = min_slope.find(q);
    if (it != min_slope.end()) return it->second;
    BatterySpec strict;
    strict.mode = PathMode::Static;
    strict.q = q;
    strict.count = spec.count;
    strict.seed = spec.seed;
    BatterySpec modulated = strict;
    modulated.mode = PathMode::FullPath;
    modulated.transformed = false;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& bs : {strict, modulated}) {
      for (const auto& phi : make_battery(bs)) {
        for (auto& s : sweep(r, phi, spec.sweep)) {
          SeriesVerdict sv;
          sv.fit = fit_order(s, spec.sweep.fit);
          sv.series = std::move(s);
          if (sv.fit.super_polynomial) m = -std::numeric_limits<double>::infinity();
          if (!sv.fit.plus_infinity) m = std::min(m, sv.fit.slope);
          v.series.push_back(std::move(sv));
        }
      }
    }
    v.slopes.emplace_back(q, m);
    min_slope[q] = m;
    return m;
  };
  for (int n : n_targets) {
    NegligibleResult res;
    res.n = n;
    for (int q = std::max(n, 1); q <= spec.q_max; ++q) {
      const double m = slope_for(q);
      res.min_slope = m;
      if (m >= n - spec.sweep.fit.tolerance) {
        res.witness_q = q;
        break;
      }
    }
    v.results.push_back(res);
  }
  return v;
}

D1Verdict d1_form_test(const Representative& r, const std::vector<TestObjectPath>& battery,
                       const std::vector<TestFunction>& directions, int k_max,
                       const SweepSpec& spec, const std::vector<MultiIndex>& direction_alphas) {
  if (k_max < 0 || k_max > 2) throw PreconditionError("d1_form_test supports 0 <= k <= 2");
  if (k_max > 0 && directions.empty()) throw PreconditionError("d1_form_test needs directions");
  for (const auto& phi : battery) {
    if (phi.mode() != PathMode::Static) {
      throw PreconditionError("d1_form_test runs over static test functions");
    }
  }
  SweepSpec dspec = spec;
  if (!direction_alphas.empty()) dspec.alphas = direction_alphas;
  D1Verdict out;
  for (int k = 0; k <= k_max; ++k) {
    std::vector<Series> all;
    for (const auto& phi : battery) {
      if (k == 0) {
        auto s = sweep(r, phi, spec);
        all.insert(all.end(), s.begin(), s.end());
      } else if (k == 1) {
        for (std::size_t j = 0; j < directions.size(); ++j) {
          auto s = sweep(r, phi, dspec, {directions[j]}, std::to_string(j));
          all.insert(all.end(), s.begin(), s.end());
        }
      } else {
        const std::size_t pairs = directions.size() < 2 ? 1 : directions.size() - 1;
        for (std::size_t j = 0; j < pairs; ++j) {
          const std::size_t j2 = std::min(j + 1, directions.size() - 1);
          auto s = sweep(r, phi, dspec, {directions[j], directions[j2]},
                         std::to_string(j) + "," + std::to_string(j2));
          all.insert(all.end(), s.begin(), s.end());
        }
      }
    }
    auto v = classify(std::move(all), spec.fit);
    out.moderate = out.moderate && v.moderate;
    out.N = std::max(out.N, v.N);
    out.by_k.push_back(std::move(v));
  }
  return out;
}

double l2_energy(const TestFunction& phi) {
  return integrate_against(phi, [&phi](const Point& xi) { return phi(xi); },
                           QuadratureGrid::default_for(phi.dim()));
}

Representative counterexample_representative() {
  return Representative::exp_phase(
      Formalism::C, 1, [](const TestFunction& phi, const Point&) { return l2_energy(phi); },
      "exp(i exp(|phi|^2))", Box::whole(1));
}

CounterexampleResult counterexample_scenario(const Diffeomorphism& mu, const TestObjectPath& phi,
                                             const SweepSpec& spec,
                                             const std::vector<TestObjectPath>& eps_battery) {
  const Representative r = counterexample_representative();
  CounterexampleResult out;

  SweepSpec ts = spec;
  ts.alphas = {MultiIndex{1, 0}};
  auto series = sweep(pullback_rep(mu, r), phi, ts);
  out.transformed = series.front();
  out.fit = fit_order(out.transformed, ts.fit);
  out.super_polynomial = out.fit.super_polynomial;
  const auto& ls = out.fit.local_slopes;
  out.strictly_increasing = ls.size() >= 2;
  for (std::size_t j = 1; j < ls.size(); ++j) {
    if (!(std::abs(ls[j]) > std::abs(ls[j - 1]) && ls[j] < 0.0)) out.strictly_increasing = false;
  }
  if (!ls.empty() && ls.front() != 0.0) out.slope_ratio = std::abs(ls.back()) / std::abs(ls.front());

  SweepSpec us = spec;
  us.alphas = {MultiIndex{0, 0}};
  std::vector<Series> all;
  for (const auto& p : eps_battery) {
    for (auto& s : sweep(r, p, us)) {
      for (const auto& pt : s.points) {
        out.max_modulus_deviation =
            std::max(out.max_modulus_deviation, std::abs(std::exp2(pt.log2_value) - 1.0));
      }
      all.push_back(std::move(s));
    }
  }
  out.untransformed = classify(std::move(all), us.fit);
  return out;
}

}  // namespace gfn
