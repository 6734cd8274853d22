#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gfn/scenarios.hpp"

using namespace gfn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gfn_test_scenarios_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST_CASE("config files") {
  const auto c = config_from_json(R"({
    "scenario": "delta-scaling", "q": 1, "omega": [null, 3.5],
    "K": {"lo": -0.5, "hi": 0.5, "points": 11},
    "sweep": {"eps_min": 3, "eps_max": 12, "fit_window": 5},
    "battery": {"mode": "eps_path", "count": 3}, "diffeo": "sine", "seed": 9, "out": "x"})");
  CHECK(c.scenario == "delta-scaling");
  CHECK(c.q == 1);
  CHECK(std::isinf(c.omega_lo));
  CHECK(c.omega_hi == 3.5);
  CHECK(c.k_points == 11);
  CHECK(c.i_min == 3);
  CHECK(c.i_max == 12);
  CHECK(c.fit.window == 5);
  CHECK(c.battery_mode == "eps_path");
  CHECK(c.battery_count == 3);
  CHECK(c.seed == 9);
  CHECK_NOTHROW(c.validate());
  // Round trip through the run-log form.
  const auto again = config_from_json(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));

  CHECK_THROWS_AS(config_from_json("{\"scenario\": \"mollifier\", \"qq\": 2}"), PreconditionError);
  CHECK_THROWS_AS(config_from_json("{\"sweep\": {\"window\": 2}}"), PreconditionError);
  CHECK_THROWS_AS(config_from_json("{not json"), PreconditionError);
  CHECK_THROWS_AS(config_from_json("{\"q\": \"two\"}"), PreconditionError);
}

TEST_CASE("validation resolves names") {
  ScenarioConfig c;
  c.scenario = "counterexample";
  CHECK_NOTHROW(c.validate());
  c.diffeo = "nope";
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c.diffeo.reset();
  c.battery_mode = "sideways";
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c.battery_mode.reset();
  c.i_min = 9;
  c.i_max = 4;
  CHECK_THROWS_AS(c.validate(), PreconditionError);
  c.i_min.reset();
  c.i_max.reset();
  c.omega_lo = -0.5;  // K = [-1, 1] leaves omega
  CHECK_THROWS_AS(c.validate(), PreconditionError);
}

TEST_CASE("unknown scenario: status 2 and no files") {
  ScenarioConfig c;
  c.scenario = "warp-drive";
  c.out = scratch("unknown").string();
  std::ostringstream log;
  CHECK(run_and_write(c, log) == 2);
  CHECK_FALSE(fs::exists(c.out));
  CHECK(log.str().find("unknown scenario") != std::string::npos);
}

TEST_CASE("doubles print with 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("empty results give header-only files") {
  ScenarioResult r;
  r.scenario = "empty";
  r.tables.push_back(Table{"extra", {"a", "b"}, {}});
  const auto dir = scratch("empty");
  const auto files = write_outputs(r, dir);
  CHECK(files.size() == 5);
  CHECK(lines(dir / "empty_sweep.csv") ==
        std::vector<std::string>{"epsilon,alpha,member_id,sup_value_or_log,local_slope"});
  CHECK(lines(dir / "empty_extra.csv") == std::vector<std::string>{"a,b"});
  CHECK(lines(dir / "empty_summary.csv").size() == 1);
}

TEST_CASE("mollifier scenario end to end") {
  ScenarioConfig c;
  c.scenario = "mollifier";
  c.q = 2;
  c.out = scratch("mollifier").string();
  std::ostringstream log;
  CHECK(run_and_write(c, log) == 0);
  const auto summary = lines(fs::path(c.out) / "mollifier_summary.csv");
  REQUIRE(summary.size() == 4);
  for (std::size_t i = 1; i < summary.size(); ++i) CHECK(split(summary[i]).back() == "1");
  // beta = 0..3 rows for q = 2.
  CHECK(lines(fs::path(c.out) / "mollifier_moments.csv").size() == 5);
  CHECK(fs::exists(fs::path(c.out) / "run.log"));
}

TEST_CASE("plot data reproduce the fitted slope") {
  ScenarioConfig c;
  c.scenario = "delta-scaling";
  c.battery_count = 2;
  c.k_points = 5;
  const auto res = run_scenario(c);
  const auto dir = scratch("plot");
  write_outputs(res, dir);
  const auto plot = lines(dir / "delta-scaling_plot.csv");
  const auto fit = lines(dir / "delta-scaling_fit.csv");
  REQUIRE(fit.size() == 3);
  CHECK(plot.size() == 1 + 2 * 13);
  for (int sid = 0; sid < 2; ++sid) {
    const double slope = std::stod(split(fit[1 + sid])[4]);
    CHECK(slope == res.series[sid].verdict.fit.slope);
    // Fitted column is intercept + slope * log2 eps on every row.
    const auto a = split(plot[1 + 13 * sid]), b = split(plot[2 + 13 * sid]);
    const double ds = (std::stod(b[4]) - std::stod(a[4])) / (std::stod(b[1]) - std::stod(a[1]));
    CHECK(ds == doctest::Approx(slope).epsilon(1e-12));
  }
  // Sweep rows: value channel, local slope blank on the first row.
  const auto sweep = lines(dir / "delta-scaling_sweep.csv");
  CHECK(split(sweep[1])[4].empty());
  CHECK(std::stod(split(sweep[2])[4]) < 0.0);
}

TEST_CASE("same config and seed give identical CSVs") {
  ScenarioConfig c;
  c.scenario = "jform-commute";
  c.seed = 4;
  std::ostringstream log;
  c.out = scratch("det_a").string();
  REQUIRE(run_and_write(c, log) == 0);
  c.out = scratch("det_b").string();
  REQUIRE(run_and_write(c, log) == 0);
  for (const auto& e : fs::directory_iterator(fs::temp_directory_path() / "gfn_test_scenarios_det_a")) {
    if (e.path().extension() != ".csv") continue;
    std::ifstream a(e.path()), b(fs::path(c.out) / e.path().filename());
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK_MESSAGE(sa.str() == sb.str(), e.path().filename());
  }
}
