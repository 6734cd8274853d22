#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gfn/asymptotics.hpp"

namespace gfn {

/// One invocation of a named scenario.  Unset optionals take the scenario's
/// own defaults.
struct ScenarioConfig {
  std::string scenario;
  int dim = 1;
  double omega_lo = -std::numeric_limits<double>::infinity();
  double omega_hi = std::numeric_limits<double>::infinity();
  double k_lo = -1.0;
  double k_hi = 1.0;
  int k_points = 41;
  std::optional<int> q;
  std::optional<int> i_min;
  std::optional<int> i_max;
  FitOptions fit{};
  int threads = 0;
  std::optional<std::string> battery_mode;
  std::optional<int> battery_count;
  std::optional<std::string> diffeo;
  std::uint64_t seed = 1;
  std::string out = "gfn_out";

  /// Resolves every name against its catalog; throws PreconditionError.
  void validate() const;
};

/// Reads the JSON config layout documented in the README.  Unknown keys are
/// rejected.  Throws PreconditionError.
ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& cfg);

std::vector<std::string> scenario_names();
bool is_scenario(const std::string& name);

/// A scenario assertion: value `relation` threshold.
struct Check {
  std::string kind;
  std::string subject;
  double value = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  double threshold = 0.0;
  bool pass = false;
};

Check make_check(std::string kind, std::string subject, double value, std::string relation,
                 double threshold);

struct Table {
  std::string name;  // file stem suffix
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct LabeledSeries {
  std::string group;
  SeriesVerdict verdict;
};

struct ScenarioResult {
  std::string scenario;
  std::vector<LabeledSeries> series;
  std::vector<Table> tables;
  std::vector<Check> checks;

  bool pass() const;
  const Check* find(const std::string& kind, const std::string& subject) const;
  std::vector<const Check*> of_kind(const std::string& kind) const;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_double(double v);

/// Writes <scenario>_sweep.csv, _plot.csv, _fit.csv, _summary.csv and any
/// extra tables into dir; returns the file names written.
std::vector<std::string> write_outputs(const ScenarioResult& result, const std::filesystem::path& dir);

/// Validates, runs, writes CSVs plus run.log.  Returns 0 iff every check
/// passes, 1 on failed checks, 2 on configuration errors (no files).
int run_and_write(const ScenarioConfig& cfg, std::ostream& log);

}  // namespace gfn
