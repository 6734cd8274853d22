#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfn/basic_space.hpp"
#include "gfn/diffeomorphism.hpp"
#include "gfn/fit.hpp"
#include "gfn/paths.hpp"
#include "gfn/test_objects.hpp"

namespace gfn {

/// eps_i = 2^-i for i_min <= i <= i_max, sup over the finite grid K.
struct SweepSpec {
  int i_min = 2;
  int i_max = 14;
  std::vector<Point> K = uniform_grid(-1.0, 1.0);
  std::vector<MultiIndex> alphas{MultiIndex{0, 0}};
  FitOptions fit{};
  bool honor_eps0 = true;
  double t_relative = 1e-4;  // phi step for d1 directions
  int threads = 0;           // 0: hardware concurrency

  void validate() const;
  /// n uniform points on [a, b] (s = 1).
  static std::vector<Point> uniform_grid(double a, double b, int n = 41);
};

/// One series per alpha: sup_{x in K} |d_x^alpha d_1^k R(S_eps phi(eps, x), x)(S_eps psi...)|.
/// Log-channel series carry log2 magnitudes.  Rows above eps_0 of the
/// path's partial domain are skipped when spec.honor_eps0 is set.
std::vector<Series> sweep(const Representative& r, const TestObjectPath& phi, const SweepSpec& spec,
                          const std::vector<TestFunction>& directions = {},
                          const std::string& direction_ids = "");

struct SeriesVerdict {
  Series series;
  OrderFit fit;
};

struct AsymptoticVerdict {
  bool moderate = true;
  bool super_polynomial = false;
  int N = 0;
  std::vector<SeriesVerdict> series;
};

constexpr int kModerateCap = 12;

/// Fit every series; N is the largest per-series N, and the verdict fails on
/// any super-polynomial series or N above kModerateCap.
AsymptoticVerdict classify(std::vector<Series> series, const FitOptions& fit);

AsymptoticVerdict test_moderate(const Representative& r, const std::vector<TestObjectPath>& battery,
                                const SweepSpec& spec);

struct NegligibleSpec {
  SweepSpec sweep{};
  int q_max = 4;
  int count = 4;
  std::uint64_t seed = 1;
};

struct NegligibleResult {
  int n = 0;
  int witness_q = -1;  // -1: not negligible up to q_max
  double min_slope = 0.0;
};

struct NegligibleVerdict {
  std::vector<NegligibleResult> results;
  /// Per q tried: minimum fitted slope over both battery classes.
  std::vector<std::pair<int, double>> slopes;
  std::vector<SeriesVerdict> series;
  bool all_found() const;
};

/// For each n, the smallest q in [n, q_max] such that strict A_q static
/// batteries and x-modulated A_l_inf(K, q) batteries both give fitted
/// slopes >= n - tolerance.
NegligibleVerdict test_negligible(const Representative& r, const std::vector<int>& n_targets,
                                  const NegligibleSpec& spec);

struct D1Verdict {
  std::vector<AsymptoticVerdict> by_k;  // index k
  bool moderate = true;
  int N = 0;
};

/// Sweeps d_x^alpha d_1^k (R o S_eps)(phi, x)(psi_1..psi_k) over static
/// phi, k = 0..k_max (k <= 2); k = 1 uses each direction, k = 2 adjacent pairs.
/// `direction_alphas`, when set, replaces spec.alphas for k >= 1.
D1Verdict d1_form_test(const Representative& r, const std::vector<TestObjectPath>& battery,
                       const std::vector<TestFunction>& directions, int k_max,
                       const SweepSpec& spec,
                       const std::vector<MultiIndex>& direction_alphas = {});

/// R(phi, x) = exp(i exp(int |phi|^2)).
Representative counterexample_representative();

/// I = int |phi|^2 by trapezoid quadrature over the support box.
double l2_energy(const TestFunction& phi);

struct CounterexampleResult {
  Series transformed;  // log2 sup_K |d_x mu^R(S_eps phi~, x)|
  OrderFit fit;
  double slope_ratio = 0.0;  // |last local slope| / |first|
  bool strictly_increasing = false;
  bool super_polynomial = false;
  AsymptoticVerdict untransformed;  // eps_path battery, value level
  double max_modulus_deviation = 0.0;  // max ||R| - 1| over the untransformed sweep
};

/// The pulled-back counterexample along mu with static phi~, plus the
/// value-level moderateness of R itself on an eps_path battery.
CounterexampleResult counterexample_scenario(const Diffeomorphism& mu, const TestObjectPath& phi,
                                             const SweepSpec& spec,
                                             const std::vector<TestObjectPath>& eps_battery);

}  // namespace gfn
