#include "gfn/paths.hpp"

#include <cmath>

namespace gfn {

PartialDomain::PartialDomain() = default;

PartialDomain::PartialDomain(Predicate member) : member_(std::move(member)) {}

bool PartialDomain::contains(double eps, const Point& x) const {
  if (!(eps > 0.0 && eps <= 1.0)) return false;
  return !member_ || member_(eps, x);
}

double PartialDomain::find_eps0(const std::vector<Point>& L) const {
  auto fits_below = [&](int j) {
    for (int m = j; m <= kMaxHalvings; ++m) {
      const double e = std::ldexp(1.0, -m);
      for (const auto& x : L) {
        if (!contains(e, x)) return false;
        if (m > 0 && !contains(0.75 * e, x)) return false;
      }
    }
    return true;
  };
  for (int j = 0; j <= kMaxHalvings; ++j) {
    if (fits_below(j)) return std::ldexp(1.0, -j);
  }
  return 0.0;
}

double PartialDomain::register_compact(const std::vector<Point>& L) {
  const double e = find_eps0(L);
  records_.push_back({L, e});
  return e;
}

double PartialDomain::eps0(const std::vector<Point>& L) const {
  for (const auto& r : records_) {
    if (r.L == L) return r.eps0;
  }
  return find_eps0(L);
}

const char* to_string(PathMode m) {
  switch (m) {
    case PathMode::Static: return "static";
    case PathMode::EpsPath: return "eps_path";
    case PathMode::FullPath: return "full_path";
  }
  return "?";
}

PathMode path_mode_from_string(const std::string& s) {
  if (s == "static" || s == "elementary") return PathMode::Static;
  if (s == "eps_path" || s == "cm-path") return PathMode::EpsPath;
  if (s == "full_path" || s == "full") return PathMode::FullPath;
  throw PreconditionError("unknown battery mode '" + s + "'");
}

struct TestObjectPath::Impl {
  PathMode mode = PathMode::Static;
  int dim = 1;
  double support_bound = 0.0;
  std::string id;
  std::optional<PartialDomain> domain;
  TestFunction constant;
  Generator full;
  EpsGenerator eps;
};

TestObjectPath::TestObjectPath(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

TestObjectPath TestObjectPath::constant(TestFunction phi, std::string id) {
  auto impl = std::make_shared<Impl>();
  impl->mode = PathMode::Static;
  impl->dim = phi.dim();
  impl->support_bound = support_extent(phi);
  impl->id = std::move(id);
  impl->constant = std::move(phi);
  return TestObjectPath(std::move(impl));
}

TestObjectPath TestObjectPath::eps_path(int dim, EpsGenerator g, double support_bound,
                                        std::string id) {
  auto impl = std::make_shared<Impl>();
  impl->mode = PathMode::EpsPath;
  impl->dim = dim;
  impl->support_bound = support_bound;
  impl->id = std::move(id);
  impl->eps = std::move(g);
  return TestObjectPath(std::move(impl));
}

TestObjectPath TestObjectPath::full_path(int dim, Generator g, double support_bound,
                                         std::string id, std::optional<PartialDomain> domain) {
  auto impl = std::make_shared<Impl>();
  impl->mode = PathMode::FullPath;
  impl->dim = dim;
  impl->support_bound = support_bound;
  impl->id = std::move(id);
  impl->full = std::move(g);
  impl->domain = std::move(domain);
  return TestObjectPath(std::move(impl));
}

PathMode TestObjectPath::mode() const { return impl_->mode; }
int TestObjectPath::dim() const { return impl_->dim; }
double TestObjectPath::support_bound() const { return impl_->support_bound; }
const std::string& TestObjectPath::id() const { return impl_->id; }
const std::optional<PartialDomain>& TestObjectPath::domain() const { return impl_->domain; }
const TestFunction& TestObjectPath::constant_value() const { return impl_->constant; }

TestFunction TestObjectPath::operator()(double eps, const Point& x) const {
  switch (impl_->mode) {
    case PathMode::Static: return impl_->constant;
    case PathMode::EpsPath: return impl_->eps(eps);
    case PathMode::FullPath: break;
  }
  if (impl_->domain && !impl_->domain->contains(eps, x)) {
    throw DomainError("test object " + impl_->id + " undefined at eps=" + std::to_string(eps) +
                      ", x=" + describe_point(x, impl_->dim));
  }
  return impl_->full(eps, x);
}

bool TestObjectPath::defined_at(double eps, const Point& x) const {
  return !impl_->domain || impl_->domain->contains(eps, x);
}

TestObjectPath TestObjectPath::with_domain(PartialDomain d) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->domain = std::move(d);
  return TestObjectPath(std::move(impl));
}

TestObjectPath TestObjectPath::with_id(std::string id) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->id = std::move(id);
  return TestObjectPath(std::move(impl));
}

double support_extent(const TestFunction& phi) {
  return norm(phi.center(), phi.dim()) + phi.radius();
}

}  // namespace gfn
