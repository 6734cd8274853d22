#include "gfn/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "json.hpp"

#include "gfn/pullback.hpp"

namespace gfn {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kScenarios = {
    "mollifier",         "embed-order",    "delta-scaling", "association", "moment-invariance",
    "counterexample",    "jform-commute",  "d1-form",       "pullback-functor"};

std::string str(int v) { return std::to_string(v); }

SweepSpec sweep_spec(const ScenarioConfig& c, int i_min = 2, int i_max = 14) {
  SweepSpec s;
  s.i_min = c.i_min.value_or(i_min);
  s.i_max = c.i_max.value_or(i_max);
  s.K = SweepSpec::uniform_grid(c.k_lo, c.k_hi, c.k_points);
  s.fit = c.fit;
  s.threads = c.threads;
  return s;
}

PathMode mode_or(const ScenarioConfig& c, PathMode fallback) {
  return c.battery_mode ? path_mode_from_string(*c.battery_mode) : fallback;
}

std::vector<TestObjectPath> battery(const ScenarioConfig& c, PathMode fallback, int q,
                                    int count_default) {
  BatterySpec b;
  b.mode = mode_or(c, fallback);
  b.q = q;
  b.count = c.battery_count.value_or(count_default);
  b.seed = c.seed;
  return make_battery(b);
}

std::vector<int> q_list(const ScenarioConfig& c, std::vector<int> fallback) {
  return c.q ? std::vector<int>{*c.q} : fallback;
}

std::vector<std::string> diffeo_list(const ScenarioConfig& c, std::vector<std::string> fallback) {
  return c.diffeo ? std::vector<std::string>{*c.diffeo} : fallback;
}

Representative on_omega(const ScenarioConfig& c, const Representative& r) {
  if (std::isinf(c.omega_lo) && std::isinf(c.omega_hi)) return r;
  return r.restricted(Box::interval(c.omega_lo, c.omega_hi));
}

void add_verdict(ScenarioResult& res, const std::string& group, const AsymptoticVerdict& v) {
  for (const auto& s : v.series) res.series.push_back({group, s});
}

double min_slope(const AsymptoticVerdict& v) {
  double m = kInf;
  for (const auto& s : v.series) {
    if (s.fit.super_polynomial) return -kInf;
    if (!s.fit.plus_infinity) m = std::min(m, s.fit.slope);
  }
  return m;
}

double flag_value(bool b) { return b ? 1.0 : 0.0; }

struct Probe {
  TestFunction phi;
  Point x;
};

std::vector<Probe> probes(int n, std::uint64_t seed) {
  SeededUniform u(seed);
  std::vector<Probe> out;
  for (int i = 0; i < n; ++i) {
    const double r = u(0.3, 0.7);
    const double a = u(-0.5, 0.5);
    const double c = u(-0.2, 0.2);
    const double x = u(-1.0, 1.0);
    auto phi = translate(build_mollifier(1, 1, r, MollifierShape{{a}}), {c, 0.0});
    out.push_back({std::move(phi), Point{x, 0.0}});
  }
  return out;
}

std::string beta_string(const MultiIndex& b, int dim) {
  return dim == 1 ? str(b[0]) : str(b[0]) + ":" + str(b[1]);
}

// ---------------------------------------------------------------------------

ScenarioResult run_mollifier(const ScenarioConfig& c) {
  ScenarioResult res;
  Table t{"moments", {"q", "beta", "moment", "moment_doubled", "abs_diff"}, {}};
  const auto grid = QuadratureGrid::default_for(c.dim);
  for (int q : q_list(c, {1, 2, 3, 4, 5, 6})) {
    const auto phi = build_mollifier(q, c.dim);
    const auto betas = multi_indices(c.dim, 0, q + 1);
    const auto m = moments(phi, betas, grid);
    const auto md = moments(phi, betas, grid.doubled());
    double mass_dev = 0.0, max_moment = 0.0, max_diff = 0.0;
    for (std::size_t j = 0; j < betas.size(); ++j) {
      const int order = total_order(betas[j]);
      if (order == 0) mass_dev = std::abs(m[j] - 1.0);
      if (order >= 1 && order <= q) max_moment = std::max(max_moment, std::abs(m[j]));
      const double diff = std::abs(m[j] - md[j]);
      max_diff = std::max(max_diff, diff);
      t.rows.push_back({str(q), beta_string(betas[j], c.dim), format_double(m[j]),
                        format_double(md[j]), format_double(diff)});
    }
    const std::string s = "q" + str(q);
    res.checks.push_back(make_check("mass_deviation", s, mass_dev, "<=", 1e-12));
    res.checks.push_back(make_check("max_moment", s, max_moment, "<=", 1e-10));
    res.checks.push_back(make_check("doubling_diff", s, max_diff, "<=", 1e-11));
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_delta_scaling(const ScenarioConfig& c) {
  ScenarioResult res;
  const auto b = battery(c, PathMode::FullPath, c.q.value_or(0), 8);
  const auto v = test_moderate(on_omega(c, embed_C(Distribution::dirac(1))), b, sweep_spec(c));
  add_verdict(res, "iota(delta)", v);
  for (const auto& s : v.series) {
    res.checks.push_back(
        make_check("slope_deviation", s.series.member_id, std::abs(s.fit.slope + 1.0), "<=", 0.02));
  }
  res.checks.push_back(make_check("moderate", "iota(delta)", flag_value(v.moderate), "==", 1.0));
  res.checks.push_back(make_check("N", "iota(delta)", v.N, "==", 1.0));
  return res;
}

ScenarioResult run_embed_order(const ScenarioConfig& c) {
  ScenarioResult res;
  const auto spec = sweep_spec(c);
  Table neg{"negligibility", {"f", "n", "witness_q", "min_slope"}, {}};
  for (const std::string f : {"sin", "x^4"}) {
    const auto r = on_omega(c, sub(embed_C(smooth_by_name(f)), embed_sigma(f)));
    for (int q : q_list(c, {1, 2, 3})) {
      const auto v = test_moderate(r, battery(c, PathMode::Static, q, 8), spec);
      const std::string g = f + ":q" + str(q);
      add_verdict(res, g, v);
      res.checks.push_back(make_check("order", g, min_slope(v), ">=", q + 1 - 0.2));
    }
    NegligibleSpec ns;
    ns.sweep = spec;
    ns.sweep.alphas = {MultiIndex{0, 0}, MultiIndex{1, 0}};
    ns.q_max = 4;
    ns.count = std::min(c.battery_count.value_or(8), 4);
    ns.seed = c.seed;
    const auto nv = test_negligible(r, {1, 2, 3}, ns);
    for (const auto& s : nv.series) res.series.push_back({"negligible:" + f, s});
    for (const auto& nr : nv.results) {
      neg.rows.push_back({f, str(nr.n), str(nr.witness_q), format_double(nr.min_slope)});
      res.checks.push_back(
          make_check("negligible_witness", f + ":n" + str(nr.n), nr.witness_q, ">=", nr.n));
    }
  }
  res.tables.push_back(std::move(neg));
  return res;
}

ScenarioResult run_association(const ScenarioConfig& c) {
  ScenarioResult res;
  const auto x = embed_C(smooth_by_name("x"));
  const auto r = on_omega(c, sub(mul(x, x), embed_C(smooth_by_name("x^2"))));
  const auto spec = sweep_spec(c);

  BatterySpec strict;
  strict.mode = PathMode::Static;
  strict.q = 2;
  strict.count = c.battery_count.value_or(8);
  strict.seed = c.seed;
  std::vector<Series> all;
  double strict_max = 0.0;
  for (const auto& phi : make_battery(strict)) {
    for (auto& s : sweep(r, phi, spec)) {
      for (const auto& p : s.points) strict_max = std::max(strict_max, std::exp2(p.log2_value));
      all.push_back(std::move(s));
    }
  }
  add_verdict(res, "strict:q2", classify(std::move(all), spec.fit));
  res.checks.push_back(make_check("strict_max", "q2", strict_max, "<=", 1e-12));

  for (int q : q_list(c, {1, 2, 3})) {
    const auto v = test_moderate(r, battery(c, PathMode::EpsPath, q, 8), spec);
    const std::string g = "asympt:q" + str(q);
    add_verdict(res, g, v);
    res.checks.push_back(make_check("order", g, min_slope(v), ">=", q + 2 - 0.2));
  }
  return res;
}

ScenarioResult run_moment_invariance(const ScenarioConfig& c) {
  ScenarioResult res;
  const auto K = SweepSpec::uniform_grid(c.k_lo, c.k_hi, c.k_points);
  MomentSweep ms;
  ms.i_min = c.i_min.value_or(2);
  ms.i_max = c.i_max.value_or(14);
  ms.fit = c.fit;
  ms.eps_scaled_floor = true;
  Table t{"moment_orders", {"diffeo", "q", "member", "beta", "slope", "flag", "pass"}, {}};
  for (const auto& name : diffeo_list(c, {"scale2", "sine", "cubic"})) {
    const auto mu = diffeo_by_name(name);
    for (int q : q_list(c, {2, 4})) {
      MomentClass cls;
      cls.kind = MomentKind::AsymptCM;
      cls.q = q;
      cls.K = K;
      double mass = 0.0, lowest = kInf;
      BatterySpec src;
      src.mode = PathMode::Static;
      src.q = q;
      src.count = c.battery_count.value_or(8);
      src.seed = c.seed;
      const std::string g = name + ":q" + str(q);
      for (const auto& s : make_battery(src)) {
        const auto tr = transform_test_object(mu, s, {K});
        const auto v = check_moment_class(tr.path, cls, ms);
        mass = std::max(mass, v.mass_deviation);
        for (const auto& o : v.orders) {
          const double slope = o.fit.super_polynomial ? -kInf
                               : o.fit.plus_infinity  ? kInf
                                                      : o.fit.slope;
          lowest = std::min(lowest, slope);
          t.rows.push_back({name, str(q), tr.path.id(), beta_string(o.beta, 1), format_double(slope),
                            o.fit.flag(), o.pass ? "1" : "0"});
          res.series.push_back({g + ":beta" + beta_string(o.beta, 1), SeriesVerdict{o.series, o.fit}});
        }
      }
      res.checks.push_back(make_check("transformed_mass", g, mass, "<=", 1e-9));
      res.checks.push_back(make_check("moment_order", g, lowest, ">=", q - 0.3));
    }
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_counterexample(const ScenarioConfig& c) {
  ScenarioResult res;
  const std::string name = c.diffeo.value_or("sine");
  const auto mu = diffeo_by_name(name);
  const auto spec = sweep_spec(c, 4, 14);
  const int q = c.q.value_or(0);
  BatterySpec src;
  src.mode = PathMode::Static;
  src.q = q;
  src.count = c.battery_count.value_or(4);
  src.seed = c.seed;
  BatterySpec eps = src;
  eps.mode = PathMode::EpsPath;
  eps.count = c.battery_count.value_or(8);
  const auto eps_battery = make_battery(eps);

  bool first = true;
  for (const auto& phi : make_battery(src)) {
    const auto r = counterexample_scenario(mu, phi, spec,
                                           first ? eps_battery : std::vector<TestObjectPath>{});
    const std::string id = phi.id();
    res.series.push_back({"transformed:" + name, SeriesVerdict{r.transformed, r.fit}});
    res.checks.push_back(
        make_check("strictly_increasing", id, flag_value(r.strictly_increasing), "==", 1.0));
    res.checks.push_back(make_check("slope_ratio", id, r.slope_ratio, ">=", 10.0));
    res.checks.push_back(make_check("super_polynomial", id, flag_value(r.super_polynomial), "==", 1.0));
    if (first) {
      add_verdict(res, "untransformed", r.untransformed);
      res.checks.push_back(make_check("untransformed_moderate", "R",
                                      flag_value(r.untransformed.moderate), "==", 1.0));
      res.checks.push_back(make_check("untransformed_N", "R", r.untransformed.N, "==", 0.0));
      res.checks.push_back(
          make_check("modulus_deviation", "R", r.max_modulus_deviation, "<=", 1e-15));
    }
    first = false;
  }
  return res;
}

ScenarioResult run_jform_commute(const ScenarioConfig& c) {
  ScenarioResult res;
  const std::vector<std::pair<std::string, Distribution>> fs = {
      {"delta", Distribution::dirac(1)},
      {"delta'", Distribution::dirac_derivative(1)},
      {"H", Distribution::heaviside()},
      {"sin", smooth_by_name("sin")}};
  const auto ps = probes(20, c.seed);
  Table t{"jform", {"F", "probe", "x", "lhs", "rhs", "abs_err"}, {}};
  for (const auto& [name, f] : fs) {
    const auto lhs_rep = embed_J(f);
    const auto rhs_rep = embed_J(f.derivative(0));
    double err = 0.0;
    int mismatches = 0;
    const auto rc = embed_C(f);
    const auto rc2 = translate_formalism(translate_formalism(rc));
    const auto rj2 = translate_formalism(translate_formalism(lhs_rep));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto& p = ps[i];
      const Complex lhs = Dj_derivative(lhs_rep, 0, p.phi, p.x);
      const Complex rhs = rhs_rep(p.phi, p.x);
      const double e = std::abs(lhs - rhs);
      err = std::max(err, e);
      t.rows.push_back({name, str(static_cast<int>(i)), format_double(p.x[0]),
                        format_double(lhs.real()), format_double(rhs.real()), format_double(e)});
      if (rc2(p.phi, p.x) != rc(p.phi, p.x)) ++mismatches;
      if (rj2(p.phi, p.x) != lhs_rep(p.phi, p.x)) ++mismatches;
    }
    res.checks.push_back(make_check("jform_error", name, err, "<=", 1e-8));
    res.checks.push_back(make_check("roundtrip_mismatches", name, mismatches, "==", 0.0));
  }
  res.tables.push_back(std::move(t));
  return res;
}

ScenarioResult run_pullback_functor(const ScenarioConfig& c) {
  ScenarioResult res;
  const auto ps = probes(50, c.seed);
  const std::vector<std::pair<std::string, Distribution>> us = {
      {"delta", Distribution::dirac(1)}, {"H", Distribution::heaviside()}, {"sin", smooth_by_name("sin")}};
  const auto id = identity_map(1);
  const auto mu = diffeo_by_name(c.diffeo.value_or("scale2"));
  const auto nu = diffeo_by_name("shift1");
  for (const auto& [name, u] : us) {
    const auto r = embed_C(u);
    const auto same = pullback_rep(id, r);
    const auto composed = pullback_rep(compose(mu, nu), r);
    const auto sequential = pullback_rep(nu, pullback_rep(mu, r));
    int mismatches = 0;
    double err = 0.0;
    for (const auto& p : ps) {
      if (same(p.phi, p.x) != r(p.phi, p.x)) ++mismatches;
      err = std::max(err, std::abs(composed(p.phi, p.x) - sequential(p.phi, p.x)));
    }
    res.checks.push_back(make_check("identity_mismatches", name, mismatches, "==", 0.0));
    res.checks.push_back(make_check("composition_error", name, err, "<=", 1e-9));
  }
  for (const auto& m : diffeo_list(c, {"scale2", "half", "shift1", "sine", "cubic"})) {
    const auto map = diffeo_by_name(m);
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& [name, u] = us[j];
      const auto lhs = pullback_rep(map, embed_C(u));
      const auto rhs = embed_pullback(map, u);
      double err = 0.0;
      for (const auto& p : ps) err = std::max(err, std::abs(lhs(p.phi, p.x) - rhs(p.phi, p.x)));
      res.checks.push_back(make_check("embedding_error", m + ":" + name, err, "<=", 1e-8));
    }
  }
  return res;
}

ScenarioResult run_d1_form(const ScenarioConfig& c) {
  ScenarioResult res;
  auto spec = sweep_spec(c);
  spec.alphas = {MultiIndex{0, 0}, MultiIndex{1, 0}};
  const int q = c.q.value_or(0);
  const int count = c.battery_count.value_or(2);
  const auto full = make_battery(PathMode::FullPath, q, count, c.seed);
  const auto stat = make_battery(PathMode::Static, q, count, c.seed);
  const auto dirs = perturbation_directions(2, c.seed);
  const auto mu = diffeo_by_name(c.diffeo.value_or("sine"));

  const auto delta = embed_C(Distribution::dirac(1));
  const auto x = embed_C(smooth_by_name("x"));
  const auto cex = counterexample_representative();
  const std::vector<std::pair<std::string, Representative>> catalog = {
      {"iota(delta)", delta},
      {"iota(H)", embed_C(Distribution::heaviside())},
      {"iota(sin)", embed_C(smooth_by_name("sin"))},
      {"sigma(sin)", embed_sigma("sin")},
      {"iota(x)^2-iota(x^2)", sub(mul(x, x), embed_C(smooth_by_name("x^2")))},
      {"R", cex},
      {"mu^(R)", pullback_rep(mu, cex)},
      {"mu^(iota(delta))", pullback_rep(mu, delta)}};

  Table t{"classification",
          {"representative", "moderate", "moderate_N", "d1_moderate", "d1_N", "agree"},
          {}};
  for (const auto& [name, r0] : catalog) {
    const auto r = on_omega(c, r0);
    const auto tm = test_moderate(r, full, spec);
    const auto d1 = d1_form_test(r, stat, dirs.psi, 1, spec, {MultiIndex{0, 0}});
    add_verdict(res, "moderate:" + name, tm);
    for (std::size_t k = 0; k < d1.by_k.size(); ++k) {
      add_verdict(res, "d1:" + name + ":k" + str(static_cast<int>(k)), d1.by_k[k]);
    }
    const bool agree = tm.moderate == d1.moderate;
    t.rows.push_back({name, tm.moderate ? "1" : "0", str(tm.N), d1.moderate ? "1" : "0", str(d1.N),
                      agree ? "1" : "0"});
    res.checks.push_back(make_check("classification_agreement", name, flag_value(agree), "==", 1.0));
  }
  res.tables.push_back(std::move(t));
  return res;
}

// ---------------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  auto line = [&os](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os << ',';
      os << csv_field(fields[i]);
    }
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
}

std::string series_member(const LabeledSeries& ls) {
  const auto& s = ls.verdict.series;
  std::string id = ls.group.empty() ? s.member_id : ls.group + "|" + s.member_id;
  if (!s.directions.empty()) id += "|psi=" + s.directions;
  return id;
}

std::string alpha_string(const MultiIndex& a) {
  return a[1] == 0 ? str(a[0]) : str(a[0]) + ":" + str(a[1]);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw PreconditionError("config: " + where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw PreconditionError("config: unknown key '" + where + k + "'");
  }
}

double bound_from_json(const json& j, double fallback) {
  return j.is_null() ? fallback : j.get<double>();
}

}  // namespace

std::vector<std::string> scenario_names() { return kScenarios; }

bool is_scenario(const std::string& name) {
  return std::find(kScenarios.begin(), kScenarios.end(), name) != kScenarios.end();
}

void ScenarioConfig::validate() const {
  if (!is_scenario(scenario)) throw PreconditionError("unknown scenario '" + scenario + "'");
  if (dim != 1 && dim != 2) throw PreconditionError("dimension must be 1 or 2");
  if (dim == 2 && scenario != "mollifier") {
    throw PreconditionError("scenario '" + scenario + "' runs in dimension 1");
  }
  if (!(omega_lo < omega_hi)) throw PreconditionError("omega needs lo < hi");
  if (!(k_lo < k_hi) || k_points < 2) throw PreconditionError("K needs lo < hi and >= 2 points");
  if (!(omega_lo < k_lo && k_hi < omega_hi)) throw PreconditionError("K must lie inside omega");
  if (q && (*q < 0 || *q > 8)) throw PreconditionError("q must be in [0, 8]");
  if (scenario == "mollifier" && q && *q < 1) throw PreconditionError("mollifier needs q >= 1");
  sweep_spec(*this).validate();
  if (!(fit.tolerance > 0.0) || !(fit.noise_floor > 0.0)) {
    throw PreconditionError("fit tolerance and noise floor must be positive");
  }
  if (threads < 0) throw PreconditionError("threads must be >= 0");
  if (battery_mode) path_mode_from_string(*battery_mode);
  if (battery_count && (*battery_count < 1 || *battery_count > 64)) {
    throw PreconditionError("battery count must be in [1, 64]");
  }
  if (diffeo && diffeo_by_name(*diffeo).dim() != 1) {
    throw PreconditionError("diffeomorphism '" + *diffeo + "' is not one-dimensional");
  }
  if (out.empty()) throw PreconditionError("output directory is empty");
}

ScenarioConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PreconditionError(std::string("config parse error: ") + e.what());
  }
  ScenarioConfig c;
  try {
    require_keys(j, {"scenario", "dim", "omega", "K", "q", "sweep", "battery", "diffeo", "seed", "out"},
                 "");
    if (j.contains("scenario")) c.scenario = j["scenario"].get<std::string>();
    if (j.contains("dim")) c.dim = j["dim"].get<int>();
    if (j.contains("omega")) {
      const auto& o = j["omega"];
      if (!o.is_array() || o.size() != 2) throw PreconditionError("config: omega must be [lo, hi]");
      c.omega_lo = bound_from_json(o[0], -kInf);
      c.omega_hi = bound_from_json(o[1], kInf);
    }
    if (j.contains("K")) {
      const auto& k = j["K"];
      require_keys(k, {"lo", "hi", "points"}, "K.");
      c.k_lo = k.value("lo", c.k_lo);
      c.k_hi = k.value("hi", c.k_hi);
      c.k_points = k.value("points", c.k_points);
    }
    if (j.contains("q")) c.q = j["q"].get<int>();
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      require_keys(s, {"eps_min", "eps_max", "fit_window", "tolerance", "noise_floor", "threads"},
                   "sweep.");
      if (s.contains("eps_min")) c.i_min = s["eps_min"].get<int>();
      if (s.contains("eps_max")) c.i_max = s["eps_max"].get<int>();
      c.fit.window = s.value("fit_window", c.fit.window);
      c.fit.tolerance = s.value("tolerance", c.fit.tolerance);
      c.fit.noise_floor = s.value("noise_floor", c.fit.noise_floor);
      c.threads = s.value("threads", c.threads);
    }
    if (j.contains("battery")) {
      const auto& b = j["battery"];
      require_keys(b, {"mode", "count"}, "battery.");
      if (b.contains("mode")) c.battery_mode = b["mode"].get<std::string>();
      if (b.contains("count")) c.battery_count = b["count"].get<int>();
    }
    if (j.contains("diffeo")) c.diffeo = j["diffeo"].get<std::string>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["dim"] = c.dim;
  j["omega"] = json::array({std::isinf(c.omega_lo) ? json(nullptr) : json(c.omega_lo),
                            std::isinf(c.omega_hi) ? json(nullptr) : json(c.omega_hi)});
  j["K"] = {{"lo", c.k_lo}, {"hi", c.k_hi}, {"points", c.k_points}};
  if (c.q) j["q"] = *c.q;
  json s = {{"fit_window", c.fit.window},
            {"tolerance", c.fit.tolerance},
            {"noise_floor", c.fit.noise_floor},
            {"threads", c.threads}};
  if (c.i_min) s["eps_min"] = *c.i_min;
  if (c.i_max) s["eps_max"] = *c.i_max;
  j["sweep"] = s;
  json b = json::object();
  if (c.battery_mode) b["mode"] = *c.battery_mode;
  if (c.battery_count) b["count"] = *c.battery_count;
  j["battery"] = b;
  if (c.diffeo) j["diffeo"] = *c.diffeo;
  j["seed"] = c.seed;
  j["out"] = c.out;
  return j.dump(2);
}

Check make_check(std::string kind, std::string subject, double value, std::string relation,
                 double threshold) {
  Check c{std::move(kind), std::move(subject), value, std::move(relation), threshold, false};
  if (c.relation == "<=") {
    c.pass = value <= threshold;
  } else if (c.relation == ">=") {
    c.pass = value >= threshold;
  } else if (c.relation == "==") {
    c.pass = value == threshold;
  } else {
    throw PreconditionError("unknown check relation '" + c.relation + "'");
  }
  return c;
}

bool ScenarioResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* ScenarioResult::find(const std::string& kind, const std::string& subject) const {
  for (const auto& c : checks) {
    if (c.kind == kind && c.subject == subject) return &c;
  }
  return nullptr;
}

std::vector<const Check*> ScenarioResult::of_kind(const std::string& kind) const {
  std::vector<const Check*> out;
  for (const auto& c : checks) {
    if (c.kind == kind) out.push_back(&c);
  }
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioResult res;
  const auto& s = cfg.scenario;
  if (s == "mollifier") res = run_mollifier(cfg);
  else if (s == "embed-order") res = run_embed_order(cfg);
  else if (s == "delta-scaling") res = run_delta_scaling(cfg);
  else if (s == "association") res = run_association(cfg);
  else if (s == "moment-invariance") res = run_moment_invariance(cfg);
  else if (s == "counterexample") res = run_counterexample(cfg);
  else if (s == "jform-commute") res = run_jform_commute(cfg);
  else if (s == "d1-form") res = run_d1_form(cfg);
  else res = run_pullback_functor(cfg);
  res.scenario = s;
  return res;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> write_outputs(const ScenarioResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const std::string stem = result.scenario;
  auto emit = [&](const std::string& suffix, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
    const std::string name = stem + "_" + suffix + ".csv";
    write_csv(dir / name, header, rows);
    written.push_back(name);
  };

  std::vector<std::vector<std::string>> sweep_rows, plot_rows, fit_rows;
  for (std::size_t k = 0; k < result.series.size(); ++k) {
    const auto& ls = result.series[k];
    const auto& s = ls.verdict.series;
    const auto& f = ls.verdict.fit;
    const std::string member = series_member(ls);
    const std::string alpha = alpha_string(s.alpha);
    const std::string sid = str(static_cast<int>(k));
    const bool fitted = !f.plus_infinity && f.points_used > 0;
    const SeriesPoint* prev = nullptr;
    for (const auto& p : s.points) {
      std::string slope;
      if (!p.underflow && prev) {
        slope = format_double((p.log2_value - prev->log2_value) / (std::log2(p.eps) - std::log2(prev->eps)));
      }
      if (!p.underflow) prev = &p;
      const double shown = s.log_channel ? p.log2_value : std::exp2(p.log2_value);
      sweep_rows.push_back({format_double(p.eps), alpha, member, format_double(shown), slope});
      const double l2e = std::log2(p.eps);
      plot_rows.push_back({sid, format_double(l2e), format_double(p.log2_value), p.underflow ? "1" : "0",
                           fitted ? format_double(f.intercept + f.slope * l2e) : ""});
    }
    fit_rows.push_back({sid, member, alpha, s.log_channel ? "log2" : "value", format_double(f.slope),
                        format_double(f.intercept), format_double(f.residual), str(f.points_used),
                        f.flag(), str(f.moderate_N(0.3))});
  }
  emit("sweep", {"epsilon", "alpha", "member_id", "sup_value_or_log", "local_slope"}, sweep_rows);
  emit("plot", {"series_id", "log2_eps", "log2_value", "underflow", "fitted_log2_value"}, plot_rows);
  emit("fit", {"series_id", "member_id", "alpha", "channel", "slope", "intercept", "residual",
               "points_used", "flag", "N"},
       fit_rows);
  std::vector<std::vector<std::string>> summary;
  for (const auto& c : result.checks) {
    summary.push_back({c.kind, c.subject, format_double(c.value), c.relation, format_double(c.threshold),
                       c.pass ? "1" : "0"});
  }
  emit("summary", {"check", "subject", "value", "relation", "threshold", "pass"}, summary);
  for (const auto& t : result.tables) emit(t.name, t.header, t.rows);
  return written;
}

int run_and_write(const ScenarioConfig& cfg, std::ostream& log) {
  const std::string started = timestamp();
  ScenarioResult res;
  try {
    res = run_scenario(cfg);
  } catch (const PreconditionError& e) {
    log << "gfn: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    log << "gfn: domain error: " << e.what() << "\n";
    return 2;
  }
  const std::filesystem::path dir(cfg.out);
  const auto files = write_outputs(res, dir);
  std::ofstream run_log(dir / "run.log");
  run_log << "started " << started << "\n";
  run_log << "config " << config_to_json(cfg) << "\n";
  for (const auto& c : res.checks) {
    const std::string line = std::string(c.pass ? "PASS " : "FAIL ") + c.kind + " " + c.subject + " " +
                             format_double(c.value) + " " + c.relation + " " +
                             format_double(c.threshold);
    run_log << line << "\n";
    if (!c.pass) log << line << "\n";
  }
  for (const auto& f : files) run_log << "wrote " << f << "\n";
  const int status = res.pass() ? 0 : 1;
  run_log << "finished " << timestamp() << " status " << status << "\n";
  log << cfg.scenario << ": " << (status == 0 ? "all checks pass" : "checks failed") << " ("
      << res.checks.size() << " checks, output in " << dir.string() << ")\n";
  return status;
}

}  // namespace gfn
