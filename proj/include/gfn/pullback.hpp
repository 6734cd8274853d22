#pragma once

#include <string>
#include <vector>

#include "gfn/basic_space.hpp"
#include "gfn/diffeomorphism.hpp"
#include "gfn/distributions.hpp"
#include "gfn/paths.hpp"

namespace gfn {

/// xi -> phi(mu^{-1}(xi + mu x) - x) |det D mu^{-1}(xi + mu x)|, the test
/// function a pulled-back representative hands to R at the point mu x.
/// Raises DomainError when x + supp phi leaves the source of mu.
TestFunction transported_test_function(const Diffeomorphism& mu, const TestFunction& phi,
                                       const Point& x);

/// mu^ R : (phi, x) -> R(transported phi, mu x), defined on the source of mu.
/// The identity map returns R itself.  The exponent channel is carried along.
Representative pullback_rep(const Diffeomorphism& mu, const Representative& r);

/// (phi, x) -> <mu^* u, phi(. - x)>, the embedding of the classical pullback.
Representative embed_pullback(const Diffeomorphism& mu, const Distribution& u);

/// phi(eps, x)(xi) = phi~(eps, y)((mu^{-1}(eps xi + x) - y) / eps) |det D mu^{-1}(eps xi + x)|
/// with y = mu^{-1} x.
TestFunction transformed_test_function(const Diffeomorphism& mu, const TestFunction& phi_tilde,
                                       double eps, const Point& x);

struct TransformedPath {
  TestObjectPath path;
  PartialDomain domain;
};

/// Transformed test object on the target of mu.  D holds the (eps, x) for
/// which y + eps supp phi~ stays inside the source; eps_0 is registered for
/// every compact in `compacts`, and the declared support bound is taken
/// over those compacts (the 41-point grid on [-1, 1] when none are given).
TransformedPath transform_test_object(const Diffeomorphism& mu, const TestObjectPath& phi_tilde,
                                      const std::vector<std::vector<Point>>& compacts = {});

struct ZOptions {
  int beta_max = 4;
  int levels = 8;       // eps = eps_0 2^-m, m < levels
  int xi_nodes = 64;    // per axis, over the support box
  double growth_limit = 2.0;
};

struct ZReport {
  bool membership = true;
  bool support_bounded = true;
  bool derivatives_bounded = true;
  double support_max = 0.0;
  double support_growth = 1.0;        // extent at the smallest eps over extent at the largest
  std::vector<double> derivative_sup;  // indexed by |beta|
  std::vector<double> derivative_growth;
  std::string message;

  bool pass() const { return membership && support_bounded && derivatives_bounded; }
};

/// Numerical check of the test-object requirements on (0, eps_0] x L.
ZReport check_Z_requirements(const TestObjectPath& phi, const PartialDomain& domain,
                             const std::vector<Point>& L, double eps0,
                             const ZOptions& opt = {});

}  // namespace gfn
