#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gfn/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Colombeau generalized functions numerical lab"};
  std::string scenario, config_file, diffeo, out, mode;
  int q = 0, eps_min = 0, eps_max = 0, count = 0, threads = 0;
  std::uint64_t seed = 1;

  std::string names;
  for (const auto& n : gfn::scenario_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("scenario", scenario, "one of: " + names)->required();
  auto* o_config = app.add_option("--config", config_file, "JSON config file");
  auto* o_q = app.add_option("--q", q, "moment order q");
  auto* o_min = app.add_option("--eps-min", eps_min, "first grid exponent i (eps = 2^-i)");
  auto* o_max = app.add_option("--eps-max", eps_max, "last grid exponent i");
  auto* o_diffeo = app.add_option("--diffeo", diffeo, "diffeomorphism catalog name");
  auto* o_seed = app.add_option("--seed", seed, "battery and probe seed");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_mode = app.add_option("--battery", mode, "battery mode: static, eps_path, full_path");
  auto* o_count = app.add_option("--count", count, "battery size");
  auto* o_threads = app.add_option("--threads", threads, "sweep threads (0: all cores)");
  CLI11_PARSE(app, argc, argv);

  gfn::ScenarioConfig cfg;
  try {
    if (*o_config) {
      std::ifstream in(config_file);
      if (!in) {
        std::cerr << "gfn: cannot read config " << config_file << "\n";
        return 2;
      }
      std::stringstream ss;
      ss << in.rdbuf();
      cfg = gfn::config_from_json(ss.str());
    }
  } catch (const std::exception& e) {
    std::cerr << "gfn: " << e.what() << "\n";
    return 2;
  }
  cfg.scenario = scenario;
  if (*o_q) cfg.q = q;
  if (*o_min) cfg.i_min = eps_min;
  if (*o_max) cfg.i_max = eps_max;
  if (*o_diffeo) cfg.diffeo = diffeo;
  if (*o_seed) cfg.seed = seed;
  if (*o_out) cfg.out = out;
  if (*o_mode) cfg.battery_mode = mode;
  if (*o_count) cfg.battery_count = count;
  if (*o_threads) cfg.threads = threads;
  return gfn::run_and_write(cfg, std::cerr);
}
