#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

#include <boost/math/quadrature/gauss.hpp>

#include "gfn/common.hpp"

namespace gfn {

/// Uniform trapezoid layout over a support box: `nodes` intervals per axis.
/// A power of two so that N-doubling reuses every existing node.
struct QuadratureGrid {
  int nodes = 4096;

  static QuadratureGrid default_for(int dim) { return QuadratureGrid{dim == 1 ? 4096 : 512}; }

  void validate() const;
  QuadratureGrid doubled() const { return QuadratureGrid{2 * nodes}; }
};

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

template <class T>
struct Accumulator;

template <>
struct Accumulator<double> {
  CompensatedSum s;
  void add(double v) { s.add(v); }
  double value() const { return s.value(); }
};

template <>
struct Accumulator<Complex> {
  CompensatedSum re, im;
  void add(const Complex& v) {
    re.add(v.real());
    im.add(v.imag());
  }
  Complex value() const { return {re.value(), im.value()}; }
};

}  // namespace detail

/// Composite trapezoid on [a, b] with n intervals, endpoints at half weight.
template <class F>
auto trapezoid(F&& f, double a, double b, int n) {
  using T = std::decay_t<decltype(f(a))>;
  detail::Accumulator<T> acc;
  const double h = (b - a) / n;
  acc.add(0.5 * f(a));
  for (int i = 1; i < n; ++i) acc.add(f(a + i * h));
  acc.add(0.5 * f(b));
  return T(acc.value() * h);
}

/// Tensor-product trapezoid over [lo, hi] (two axes) with n intervals per axis.
template <class F>
auto trapezoid_2d(F&& f, const Point& lo, const Point& hi, int n) {
  using T = std::decay_t<decltype(f(lo))>;
  detail::Accumulator<T> acc;
  const double h0 = (hi[0] - lo[0]) / n;
  const double h1 = (hi[1] - lo[1]) / n;
  for (int i = 0; i <= n; ++i) {
    const double w0 = (i == 0 || i == n) ? 0.5 : 1.0;
    const double x0 = lo[0] + i * h0;
    for (int j = 0; j <= n; ++j) {
      const double w1 = (j == 0 || j == n) ? 0.5 : 1.0;
      acc.add(w0 * w1 * f(Point{x0, lo[1] + j * h1}));
    }
  }
  return T(acc.value() * (h0 * h1));
}

/// Composite Gauss-Legendre (20 points per panel) on [a, b].  Used where an
/// integrand is smooth but does not vanish at an endpoint (half-line pairings).
template <class F>
auto gauss_panels(F&& f, double a, double b, int panels) {
  using T = std::decay_t<decltype(f(a))>;
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  detail::Accumulator<T> acc;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < x.size(); ++i) {
      acc.add(w[i] * half * f(mid + half * x[i]));
      acc.add(w[i] * half * f(mid - half * x[i]));
    }
  }
  return T(acc.value());
}

}  // namespace gfn
