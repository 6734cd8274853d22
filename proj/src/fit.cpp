#include "gfn/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gfn {

int OrderFit::moderate_N(double tolerance) const {
  if (plus_infinity) return 0;
  return std::max(0, static_cast<int>(std::ceil(-slope - tolerance)));
}

bool OrderFit::negligible(int n, double tolerance) const {
  if (super_polynomial) return false;
  return plus_infinity || slope >= n - tolerance;
}

std::string OrderFit::flag() const {
  if (super_polynomial) return "super_polynomial";
  if (plus_infinity) return "plus_inf";
  return "ok";
}

OrderFit fit_log2(const std::vector<double>& x, const std::vector<double>& y) {
  OrderFit f;
  const std::size_t n = x.size();
  f.points_used = static_cast<int>(n);
  if (n < 2) return f;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    r += e * e;
  }
  f.residual = std::sqrt(r);
  return f;
}

bool super_polynomial_pattern(const std::vector<double>& s, double min_ratio) {
  if (s.size() < 3) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] < 0.0)) return false;
    if (i > 0 && !(std::abs(s[i]) > std::abs(s[i - 1]))) return false;
  }
  return std::abs(s.back()) >= min_ratio * std::abs(s.front());
}

OrderFit fit_order(const Series& s, const FitOptions& opt) {
  const double floor2 = std::log2(opt.noise_floor);
  std::vector<const SeriesPoint*> rows;
  for (const auto& p : s.points) {
    const bool under = p.underflow || !std::isfinite(p.log2_value) ||
                       (!s.log_channel && p.log2_value <= floor2);
    if (!under) rows.push_back(&p);
  }
  std::vector<double> local;
  for (std::size_t j = 1; j < rows.size(); ++j) {
    const double dx = std::log2(rows[j]->eps) - std::log2(rows[j - 1]->eps);
    local.push_back((rows[j]->log2_value - rows[j - 1]->log2_value) / dx);
  }

  OrderFit f;
  if (rows.size() < 4) {
    f.plus_infinity = true;
    f.slope = std::numeric_limits<double>::infinity();
    f.points_used = static_cast<int>(rows.size());
    f.local_slopes = std::move(local);
    return f;
  }
  const std::size_t start = rows.size() > static_cast<std::size_t>(opt.window)
                                ? rows.size() - opt.window
                                : 0;
  std::vector<double> x, y;
  for (std::size_t j = start; j < rows.size(); ++j) {
    x.push_back(std::log2(rows[j]->eps));
    y.push_back(rows[j]->log2_value);
  }
  f = fit_log2(x, y);
  f.local_slopes = std::move(local);
  // Only the fit window: a power law's pre-asymptotic transient also has
  // growing slopes, but they level off.
  const std::vector<double> tail(f.local_slopes.begin() + start, f.local_slopes.end());
  f.super_polynomial = super_polynomial_pattern(tail);
  return f;
}

}  // namespace gfn
