#pragma once

#include <array>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace gfn {

// Points and multi-indices are fixed at two components; only the first
// `dim` entries are meaningful (dim is 1 or 2 throughout the library).
using Point = std::array<double, 2>;
using MultiIndex = std::array<int, 2>;
using Complex = std::complex<double>;

constexpr int kMaxDim = 2;

inline int total_order(const MultiIndex& a) { return a[0] + a[1]; }

inline MultiIndex unit_index(int axis) {
  MultiIndex e{0, 0};
  e[axis] = 1;
  return e;
}

inline Point operator+(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Point operator-(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Point operator*(double s, const Point& a) { return {s * a[0], s * a[1]}; }

inline double norm(const Point& p, int dim) {
  return dim == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

/// x^alpha for the first `dim` coordinates.
double monomial(const Point& x, const MultiIndex& alpha, int dim);

/// Raised when a (test function, point) pair leaves the admissible set
/// U(Omega) of a representative, or a support escapes a domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an operation's documented precondition is violated.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical construction cannot be completed reliably.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Open axis-aligned box; unbounded sides are +-infinity.
struct Box {
  int dim = 1;
  Point lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Point hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

  static Box whole(int dim) {
    Box b;
    b.dim = dim;
    return b;
  }
  static Box interval(double a, double b) {
    Box box;
    box.dim = 1;
    box.lo[0] = a;
    box.hi[0] = b;
    return box;
  }
  static Box rectangle(Point lo, Point hi) {
    Box box;
    box.dim = 2;
    box.lo = lo;
    box.hi = hi;
    return box;
  }

  bool contains(const Point& p) const;
  /// True when the closed ball B(c, r) lies inside the open box.
  bool contains_ball(const Point& c, double r) const;
  /// Distance from p to the complement of the box (0 outside).
  double distance_to_boundary(const Point& p) const;
  bool bounded() const;
  std::string describe() const;
};

std::string describe_point(const Point& p, int dim);

}  // namespace gfn
