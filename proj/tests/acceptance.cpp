// Runs the scenarios behind each acceptance criterion and prints one
// PASS/FAIL line per criterion.  Tolerances are pinned here, independently
// of the scenario thresholds.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gfn/scenarios.hpp"

namespace fs = std::filesystem;
using namespace gfn;

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kMomentTol = 1e-10;
constexpr double kDoublingTol = 1e-11;
constexpr double kDeltaSlopeTol = 0.02;
constexpr int kDeltaMembers = 8;
constexpr double kOrderSlack = 0.2;
constexpr double kStrictAssocTol = 1e-12;
constexpr double kMomentOrderSlack = 0.3;
constexpr double kTransformedMassTol = 1e-9;
constexpr double kSlopeRatio = 10.0;
constexpr double kModulusTol = 1e-15;
constexpr double kJformTol = 1e-8;
constexpr double kCompositionTol = 1e-9;
constexpr double kEmbeddingTol = 1e-8;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Worst value over the checks of one kind, with a predicate per check.
struct Worst {
  bool pass = true;
  int count = 0;
  double value = 0.0;
  std::string subject;
};

Worst scan(const ScenarioResult& r, const std::string& kind, const std::function<bool(const Check&)>& ok,
           bool larger_is_worse = true) {
  Worst w;
  w.value = larger_is_worse ? -INFINITY : INFINITY;
  for (const Check* c : r.of_kind(kind)) {
    ++w.count;
    if (!ok(*c)) w.pass = false;
    if (larger_is_worse ? c->value > w.value : c->value < w.value) {
      w.value = c->value;
      w.subject = c->subject;
    }
  }
  if (w.count == 0) w.pass = false;
  return w;
}

// Integer after the last `tag` in a subject such as "sin:q2" or "x^4:n3".
int index_of(const std::string& subject, char tag) {
  const auto pos = subject.rfind(tag);
  return pos == std::string::npos ? 0 : std::atoi(subject.c_str() + pos + 1);
}

int q_of(const std::string& subject) { return index_of(subject, 'q'); }

ScenarioResult run(const std::string& name, const fs::path& out, ScenarioConfig cfg = {}) {
  cfg.scenario = name;
  cfg.out = (out / name).string();
  auto r = run_scenario(cfg);
  write_outputs(r, cfg.out);
  return r;
}

Verdict criterion1(const fs::path& out) {
  const auto r = run("mollifier", out);
  const auto mass = scan(r, "mass_deviation", [](const Check& c) { return c.value <= kMassTol; });
  const auto mom = scan(r, "max_moment", [](const Check& c) { return c.value <= kMomentTol; });
  const auto dbl = scan(r, "doubling_diff", [](const Check& c) { return c.value <= kDoublingTol; });
  return {mass.pass && mom.pass && dbl.pass && mass.count == 6,
          "q=1..6: max |mass-1| " + sci(mass.value) + ", max |m_k| " + sci(mom.value) +
              ", doubled-grid diff " + sci(dbl.value)};
}

Verdict criterion2(const fs::path& out) {
  ScenarioConfig cfg;
  cfg.battery_count = kDeltaMembers;
  const auto r = run("delta-scaling", out, cfg);
  const auto s = scan(r, "slope_deviation", [](const Check& c) { return c.value <= kDeltaSlopeTol; });
  const Check* n = r.find("N", "iota(delta)");
  const bool ok = s.pass && s.count == kDeltaMembers && n && n->value == 1.0;
  return {ok, std::to_string(s.count) + " full_path members, max |slope+1| " + sci(s.value) +
                  ", N = " + (n ? sci(n->value) : "?")};
}

Verdict criterion3(const fs::path& out) {
  const auto r = run("embed-order", out);
  const auto ord = scan(
      r, "order", [](const Check& c) { return c.value >= q_of(c.subject) + 1 - kOrderSlack; }, false);
  const auto wit = scan(
      r, "negligible_witness", [](const Check& c) { return c.value >= index_of(c.subject, 'n'); }, false);
  return {ord.pass && wit.pass && ord.count == 6 && wit.count == 6,
          "lowest order " + sci(ord.value) + " (" + ord.subject + "), witnesses found " +
              std::to_string(wit.pass ? wit.count : 0) + "/6"};
}

Verdict criterion4(const fs::path& out) {
  const auto r = run("association", out);
  const auto strict = scan(r, "strict_max", [](const Check& c) { return c.value <= kStrictAssocTol; });
  std::string orders;
  bool ok = strict.pass;
  int n = 0;
  for (const Check* c : r.of_kind("order")) {
    const int q = q_of(c->subject);
    const bool pass = c->value >= q + 2 - kOrderSlack;
    ok = ok && pass;
    ++n;
    orders += " q=" + std::to_string(q) + ":" + sci(c->value) + (pass ? "" : "(<" + sci(q + 2 - kOrderSlack) + ")");
  }
  return {ok && n == 3, "strict A_2 max " + sci(strict.value) + "; orders" + orders};
}

Verdict criterion5(const fs::path& out) {
  const auto r = run("moment-invariance", out);
  const auto mass =
      scan(r, "transformed_mass", [](const Check& c) { return c.value <= kTransformedMassTol; });
  bool ok = mass.pass;
  std::string failing;
  int n = 0;
  for (const Check* c : r.of_kind("moment_order")) {
    ++n;
    if (!(c->value >= q_of(c->subject) - kMomentOrderSlack)) {
      ok = false;
      failing += " " + c->subject + ":" + sci(c->value);
    }
  }
  return {ok && n == 6, "max |mass-1| " + sci(mass.value) +
                            (failing.empty() ? "; all moment orders >= q-0.3" : "; below q-0.3:" + failing)};
}

Verdict criterion6(const fs::path& out) {
  const auto r = run("counterexample", out);
  const auto inc = scan(r, "strictly_increasing", [](const Check& c) { return c.value == 1.0; }, false);
  const auto ratio = scan(r, "slope_ratio", [](const Check& c) { return c.value >= kSlopeRatio; }, false);
  const auto sp = scan(r, "super_polynomial", [](const Check& c) { return c.value == 1.0; }, false);
  const Check* n = r.find("untransformed_N", "R");
  const Check* mod = r.find("untransformed_moderate", "R");
  const Check* dev = r.find("modulus_deviation", "R");
  const bool ok = inc.pass && ratio.pass && sp.pass && n && n->value == 0.0 && mod && mod->value == 1.0 &&
                  dev && dev->value <= kModulusTol;
  return {ok, "untransformed N = " + (n ? sci(n->value) : "?") + ", max ||R|-1| " +
                  (dev ? sci(dev->value) : "?") + "; transformed: min slope ratio " + sci(ratio.value) +
                  ", increasing " + (inc.pass ? "yes" : "no") + ", super-polynomial " +
                  (sp.pass ? "yes" : "no")};
}

Verdict criterion7(const fs::path& out) {
  const auto r = run("jform-commute", out);
  const auto err = scan(r, "jform_error", [](const Check& c) { return c.value <= kJformTol; });
  const auto rt = scan(r, "roundtrip_mismatches", [](const Check& c) { return c.value == 0.0; });
  return {err.pass && rt.pass && err.count == 4,
          "max |D^J iota(F) - iota(dF)| " + sci(err.value) + " (" + err.subject + "), round-trip mismatches " +
              sci(rt.value)};
}

Verdict criterion8(const fs::path& out) {
  const auto r = run("pullback-functor", out);
  const auto id = scan(r, "identity_mismatches", [](const Check& c) { return c.value == 0.0; });
  const auto comp = scan(r, "composition_error", [](const Check& c) { return c.value <= kCompositionTol; });
  const auto emb = scan(r, "embedding_error", [](const Check& c) { return c.value <= kEmbeddingTol; });
  return {id.pass && comp.pass && emb.pass,
          "identity mismatches " + sci(id.value) + ", composition " + sci(comp.value) + ", embedding " +
              sci(emb.value) + " (" + emb.subject + ")"};
}

Verdict criterion9(const fs::path& out) {
  const auto r = run("d1-form", out);
  const auto agree = scan(r, "classification_agreement", [](const Check& c) { return c.value == 1.0; }, false);
  std::string bad;
  for (const Check* c : r.of_kind("classification_agreement")) {
    if (c->value != 1.0) bad += " " + c->subject;
  }
  return {agree.pass, std::to_string(agree.count) + " representatives" +
                          (bad.empty() ? ", all agree" : ", disagree:" + bad)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& gfn, const std::string& scenario, const fs::path& dir) {
  const std::string cmd = "\"" + gfn + "\" " + scenario + " --seed 7 --out \"" + dir.string() + "\" 2>/dev/null";
  return std::system(cmd.c_str());
}

Verdict criterion10(const fs::path& out, const std::string& gfn) {
  const std::vector<std::string> scenarios = {"mollifier", "delta-scaling", "association", "jform-commute"};
  int files = 0;
  std::string differing;
  for (const auto& s : scenarios) {
    const fs::path a = out / "determinism" / "a" / s, b = out / "determinism" / "b" / s;
    fs::remove_all(a);
    fs::remove_all(b);
    if (!gfn.empty()) {
      run_cli(gfn, s, a);
      run_cli(gfn, s, b);
    } else {
      ScenarioConfig cfg;
      cfg.scenario = s;
      cfg.seed = 7;
      std::ostringstream sink;
      cfg.out = a.string();
      run_and_write(cfg, sink);
      cfg.out = b.string();
      run_and_write(cfg, sink);
    }
    if (!fs::exists(a)) return {false, "no output from " + s};
    for (const auto& e : fs::directory_iterator(a)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      const fs::path other = b / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) differing += " " + e.path().filename().string();
    }
  }
  return {differing.empty() && files > 0,
          std::to_string(files) + " CSVs compared across two " + (gfn.empty() ? "in-process" : "CLI") +
              " runs" + (differing.empty() ? ", byte-identical" : ", differ:" + differing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out = "acceptance_out";
  std::string gfn;
  std::vector<int> only;
  app.add_option("--out", out, "scenario output root");
  app.add_option("--gfn", gfn, "gfn executable for the determinism runs");
  app.add_option("--only", only, "run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(out);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"mollifier construction", [&] { return criterion1(root); }},
      {"delta scaling", [&] { return criterion2(root); }},
      {"embedding consistency", [&] { return criterion3(root); }},
      {"association repair", [&] { return criterion4(root); }},
      {"moment invariance", [&] { return criterion5(root); }},
      {"counterexample", [&] { return criterion6(root); }},
      {"J-formalism commutation", [&] { return criterion7(root); }},
      {"functoriality and identity", [&] { return criterion8(root); }},
      {"test equivalence", [&] { return criterion9(root); }},
      {"determinism", [&] { return criterion10(root, gfn); }}};

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
