#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gfn/common.hpp"
#include "gfn/testfunc.hpp"

namespace gfn {

/// Subset D of (0, 1] x Omega on which a transformed test object is defined,
/// with eps_0(L) recorded for the compacts L it was asked about.
class PartialDomain {
 public:
  using Predicate = std::function<bool(double eps, const Point& x)>;

  struct Record {
    std::vector<Point> L;
    double eps0 = 0.0;  // 0 when no 2^-j, j <= 20, fits
  };

  static constexpr int kMaxHalvings = 20;

  PartialDomain();  // all of (0, 1] x R^s
  explicit PartialDomain(Predicate member);

  bool full() const { return !member_; }
  bool contains(double eps, const Point& x) const;

  /// Largest eps_0 = 2^-j (j <= 20) with (eps, x) in D for every x in L and
  /// every eps in the check grid {2^-m, 0.75 * 2^-m : j <= m <= 20}.
  double find_eps0(const std::vector<Point>& L) const;
  /// find_eps0 plus a stored record.
  double register_compact(const std::vector<Point>& L);
  /// Recorded eps_0 for L, or find_eps0 when L was never registered.
  double eps0(const std::vector<Point>& L) const;
  const std::vector<Record>& records() const { return records_; }

 private:
  Predicate member_;
  std::vector<Record> records_;
};

enum class PathMode { Static, EpsPath, FullPath };

const char* to_string(PathMode m);
PathMode path_mode_from_string(const std::string& s);

/// (eps, x) -> phi(eps, x) in A_0(R^s).  Static paths ignore both arguments
/// and eps-paths ignore x.
class TestObjectPath {
 public:
  using Generator = std::function<TestFunction(double eps, const Point& x)>;
  using EpsGenerator = std::function<TestFunction(double eps)>;

  static TestObjectPath constant(TestFunction phi, std::string id);
  static TestObjectPath eps_path(int dim, EpsGenerator g, double support_bound, std::string id);
  static TestObjectPath full_path(int dim, Generator g, double support_bound, std::string id,
                                  std::optional<PartialDomain> domain = std::nullopt);

  PathMode mode() const;
  int dim() const;
  /// Declared R with supp phi(eps, x) inside the closed ball B(0, R).
  double support_bound() const;
  const std::string& id() const;
  const std::optional<PartialDomain>& domain() const;
  /// Only meaningful for constant paths.
  const TestFunction& constant_value() const;

  TestFunction operator()(double eps, const Point& x) const;
  bool defined_at(double eps, const Point& x) const;

  TestObjectPath with_domain(PartialDomain d) const;
  TestObjectPath with_id(std::string id) const;

 private:
  struct Impl;
  explicit TestObjectPath(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// Radius of the smallest origin-centred ball holding the support bound of phi.
double support_extent(const TestFunction& phi);

}  // namespace gfn
