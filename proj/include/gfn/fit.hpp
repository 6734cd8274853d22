#pragma once

#include <string>
#include <vector>

#include "gfn/common.hpp"

namespace gfn {

/// One row of an eps-series: eps_i = 2^-i and log2 of the recorded magnitude.
struct SeriesPoint {
  int i = 0;
  double eps = 0.0;
  double log2_value = 0.0;
  bool underflow = false;  // at or below the noise floor (or exactly zero)
};

/// sup_{x in K} |d^alpha ...| along eps for one battery member.
struct Series {
  std::string member_id;
  MultiIndex alpha{0, 0};
  int k = 0;                 // number of d1 directions
  std::string directions;    // direction ids, e.g. "0,1"
  bool log_channel = false;  // values are log2 magnitudes from the exponent channel
  std::vector<SeriesPoint> points;
};

struct FitOptions {
  int window = 6;             // rows used by the regression, smallest eps last
  double noise_floor = 1e-13;  // absolute; rows at or below are underflow
  double tolerance = 0.3;      // slope slack for N and n assignment
};

/// Least-squares fit of log2 value against log2 eps.  `slope` is the
/// exponent p in value ~ eps^p: negative for growth, positive for decay.
struct OrderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  int points_used = 0;
  std::vector<double> local_slopes;  // one per adjacent pair, all rows above the floor
  bool plus_infinity = false;        // fewer than 4 rows above the floor
  bool super_polynomial = false;

  /// Smallest N >= 0 with slope >= -N - tolerance.
  int moderate_N(double tolerance = 0.3) const;
  /// slope >= n - tolerance.
  bool negligible(int n, double tolerance = 0.3) const;
  std::string flag() const;
};

OrderFit fit_order(const Series& s, const FitOptions& opt = {});

/// Plain power-law fit on (log2 eps, log2 value) pairs, for tests and plots.
OrderFit fit_log2(const std::vector<double>& log2_eps, const std::vector<double>& log2_value);

/// Super-polynomial pattern: local slopes all negative, magnitudes strictly
/// increasing, last / first >= min_ratio.
bool super_polynomial_pattern(const std::vector<double>& local_slopes, double min_ratio = 2.0);

}  // namespace gfn
