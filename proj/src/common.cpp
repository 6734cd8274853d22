#include "gfn/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gfn {

double monomial(const Point& x, const MultiIndex& alpha, int dim) {
  double v = 1.0;
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < alpha[i]; ++k) v *= x[i];
  }
  return v;
}

bool Box::contains(const Point& p) const {
  for (int i = 0; i < dim; ++i) {
    if (!(p[i] > lo[i] && p[i] < hi[i])) return false;
  }
  return true;
}

bool Box::contains_ball(const Point& c, double r) const {
  for (int i = 0; i < dim; ++i) {
    if (!(c[i] - r > lo[i] && c[i] + r < hi[i])) return false;
  }
  return true;
}

double Box::distance_to_boundary(const Point& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) {
    d = std::min({d, p[i] - lo[i], hi[i] - p[i]});
  }
  return std::max(d, 0.0);
}

bool Box::bounded() const {
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
  }
  return true;
}

std::string Box::describe() const {
  std::ostringstream os;
  for (int i = 0; i < dim; ++i) {
    if (i) os << " x ";
    os << "(" << lo[i] << ", " << hi[i] << ")";
  }
  return os.str();
}

std::string describe_point(const Point& p, int dim) {
  std::ostringstream os;
  os.precision(17);
  if (dim == 1) {
    os << p[0];
  } else {
    os << "(" << p[0] << ", " << p[1] << ")";
  }
  return os.str();
}

}  // namespace gfn
