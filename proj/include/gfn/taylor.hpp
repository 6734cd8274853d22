#pragma once

#include <array>
#include <cmath>

namespace gfn {

/// Truncated univariate Taylor series c_0 + c_1 t + ... + c_n t^n.
/// Used to differentiate bump-basis test functions exactly (no step size).
class Taylor {
 public:
  static constexpr int kMaxOrder = 10;

  explicit Taylor(int order = 0, double value = 0.0) : n_(order) {
    c_.fill(0.0);
    c_[0] = value;
  }

  static Taylor variable(int order, double at) {
    Taylor t(order, at);
    if (order >= 1) t.c_[1] = 1.0;
    return t;
  }

  int order() const { return n_; }
  double operator[](int k) const { return c_[k]; }
  double& operator[](int k) { return c_[k]; }

  /// k-th derivative at the expansion point: k! c_k.
  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f * c_[k];
  }

  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k <= n_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k <= n_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (int k = 0; k <= n_; ++k) c_[k] *= s;
    return *this;
  }
  Taylor& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor r(a.n_);
    for (int k = 0; k <= a.n_; ++k) {
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return r;
  }

  friend Taylor reciprocal(const Taylor& a) {
    Taylor r(a.n_);
    r.c_[0] = 1.0 / a.c_[0];
    for (int k = 1; k <= a.n_; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += a.c_[j] * r.c_[k - j];
      r.c_[k] = -s / a.c_[0];
    }
    return r;
  }

  friend Taylor exp(const Taylor& a) {
    // k e_k = sum_{j=1..k} j a_j e_{k-j}
    Taylor r(a.n_);
    r.c_[0] = std::exp(a.c_[0]);
    for (int k = 1; k <= a.n_; ++k) {
      double s = 0.0;
      for (int j = 1; j <= k; ++j) s += j * a.c_[j] * r.c_[k - j];
      r.c_[k] = s / k;
    }
    return r;
  }

 private:
  int n_;
  std::array<double, kMaxOrder + 1> c_;
};

}  // namespace gfn
