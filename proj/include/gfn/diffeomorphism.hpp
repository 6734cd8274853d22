#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gfn/common.hpp"

namespace gfn {

using Matrix2 = Eigen::Matrix2d;

/// mu: source -> target, with its inverse and both Jacobians.  Only the
/// leading dim x dim block of a Jacobian is meaningful.
class Diffeomorphism {
 public:
  using Map = std::function<Point(const Point&)>;
  using JacobianMap = std::function<Matrix2(const Point&)>;
  /// (y, delta) -> d with mu(y + d) = mu(y) + delta, evaluated without
  /// cancellation when delta is small.
  using Increment = std::function<Point(const Point&, const Point&)>;

  Diffeomorphism(std::string name, int dim, Map forward, Map inverse, JacobianMap jacobian,
                 JacobianMap inverse_jacobian, Box source, Box target, bool identity = false);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  const Box& source() const { return source_; }
  const Box& target() const { return target_; }
  bool is_identity() const { return identity_; }

  Point forward(const Point& x) const { return forward_(x); }
  Point inverse(const Point& y) const { return inverse_(y); }
  /// D mu at x (x in source).
  Matrix2 jacobian(const Point& x) const { return jacobian_(x); }
  /// D mu^{-1} at y (y in target).
  Matrix2 inverse_jacobian(const Point& y) const { return inverse_jacobian_(y); }
  /// det D mu^{-1}(y).
  double inverse_det(const Point& y) const;
  /// d with mu(y + d) = mu(y) + delta.
  Point inverse_increment(const Point& y, const Point& delta) const;
  Diffeomorphism with_increment(Increment inc) const;

  /// Sampled sup of the operator norm of D mu over the closed ball B(c, r).
  double forward_lipschitz(const Point& c, double r) const;
  /// Sampled sup of the operator norm of D mu^{-1} over B(c, r).
  double inverse_lipschitz(const Point& c, double r) const;

 private:
  std::string name_;
  int dim_;
  Map forward_, inverse_;
  JacobianMap jacobian_, inverse_jacobian_;
  Increment increment_;
  Box source_, target_;
  bool identity_;
};

Diffeomorphism identity_map(int dim);
/// x -> a x + b on R.
Diffeomorphism affine_map(double a, double b, const std::string& name = "affine");
/// x -> x + amp sin x on R (amp < 1).
Diffeomorphism sine_map(double amp = 0.25);
/// x -> x^3 + x on R.
Diffeomorphism cubic_map();

/// mu o nu: apply nu first.
Diffeomorphism compose(const Diffeomorphism& mu, const Diffeomorphism& nu);
Diffeomorphism invert(const Diffeomorphism& mu);

/// mu on a bounded interval of its source; the target is the image interval.
Diffeomorphism restrict_to(const Diffeomorphism& mu, const Box& source);

/// Names: id, id2, scale2, half, shift1, sine, cubic, affine:a:b.
Diffeomorphism diffeo_by_name(const std::string& name);
std::vector<std::string> diffeo_catalog();

}  // namespace gfn
