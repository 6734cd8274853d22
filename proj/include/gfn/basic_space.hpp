#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gfn/common.hpp"
#include "gfn/distributions.hpp"
#include "gfn/testfunc.hpp"

namespace gfn {

/// C: distributions act on phi(. - x).  J: on phi itself.  Any: the value does
/// not depend on phi, so both readings coincide.
enum class Formalism { C, J, Any };

const char* to_string(Formalism f);

/// log|R| and arg R.
struct LogValue {
  double log_abs = 0.0;
  double phase = 0.0;
};

struct RepresentativeTraits {
  bool linear = false;           // linear in phi
  bool phi_independent = false;  // value ignores phi
  bool x_independent = false;    // value ignores x (for fixed phi)
};

/// A map (phi, x) -> C on U(Omega).
class Representative {
 public:
  using Evaluator = std::function<Complex(const TestFunction&, const Point&)>;
  /// G in R = exp(i exp(G)); lets derivatives be taken in log space.
  using Exponent = std::function<double(const TestFunction&, const Point&)>;

  using Traits = RepresentativeTraits;

  Representative(Formalism formalism, int dim, Evaluator eval, Traits traits = {},
                 std::string label = "R", Box omega = Box::whole(1));

  /// R(phi, x) = exp(i exp(G(phi, x))).
  static Representative exp_phase(Formalism formalism, int dim, Exponent g, std::string label,
                                  Box omega);

  Formalism formalism() const;
  int dim() const;
  const std::string& label() const;
  const Box& domain() const;
  const Traits& traits() const;
  bool has_exponent() const;
  double exponent(const TestFunction& phi, const Point& x) const;

  /// Membership of (phi, x) in U(Omega).
  bool admissible(const TestFunction& phi, const Point& x) const;
  /// Value; raises DomainError outside U(Omega).
  Complex operator()(const TestFunction& phi, const Point& x) const;
  LogValue log_value(const TestFunction& phi, const Point& x) const;

  Representative relabeled(std::string label) const;
  Representative restricted(const Box& omega) const;

 private:
  struct Impl;
  explicit Representative(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend Representative translate_formalism(const Representative&);
  friend Representative transport(int, Formalism, Evaluator, Exponent,
                                  std::function<bool(const TestFunction&, const Point&)>, Traits,
                                  std::string, Box);
};

/// (phi, x) -> <w, phi(. - x)>.
Representative embed_C(const Distribution& w);
/// (phi, x) -> <w, phi>.
Representative embed_J(const Distribution& w);
/// (phi, x) -> f(x).
Representative embed_sigma(int dim, Density f, std::string label = "f");
Representative embed_sigma(const std::string& catalog_name);

/// C <-> J via (phi, x) -> (phi(. - x), x).  Applying it twice returns the
/// original representative.
Representative translate_formalism(const Representative& r);

/// Representative with an explicit admissibility predicate in place of the
/// formalism default; `exponent` may be empty.
Representative transport(int dim, Formalism formalism, Representative::Evaluator eval,
                         Representative::Exponent exponent,
                         std::function<bool(const TestFunction&, const Point&)> admissible,
                         Representative::Traits traits, std::string label, Box omega);

Representative add(const Representative& a, const Representative& b);
Representative sub(const Representative& a, const Representative& b);
Representative mul(const Representative& a, const Representative& b);
Representative scale(Complex c, const Representative& a);

/// The x-dependent test-function slot x -> phi(x) along which a
/// representative is differentiated (x -> S_eps phi(eps, x) in sweeps).
struct Slot {
  std::function<TestFunction(const Point&)> at;
  bool x_dependent = false;

  static Slot fixed(const TestFunction& phi);
};

/// d_x^alpha d_1^k of x -> R(slot(x), x), directions psi_1..psi_k.
struct DerivativeRequest {
  MultiIndex alpha{0, 0};
  std::vector<TestFunction> directions;
  double h = 1e-5;          // x step
  double t_relative = 1e-4;  // phi step relative to sup|phi| / sup|psi|
};

Complex mixed_derivative(const Representative& r, const Slot& slot, const Point& x,
                         const DerivativeRequest& req);
/// Same derivative in log space through the exponent channel (Faa di Bruno
/// over set partitions of the differentiation operators).
LogValue mixed_log_derivative(const Representative& r, const Slot& slot, const Point& x,
                              const DerivativeRequest& req);

/// d_x^alpha R(phi, x), phi held fixed; central differences with step h and
/// one Richardson level.
Complex partial_x(const Representative& r, const MultiIndex& alpha, const TestFunction& phi,
                  const Point& x, double h = 1e-5);
/// Total x-derivative along a test-object slot.
Complex partial_x(const Representative& r, const MultiIndex& alpha, const Slot& slot,
                  const Point& x, double h);

/// d_1^k R(phi, x)(psi_1, ..., psi_k), k <= 2, each psi of zero integral.
Complex d1_derivative(const Representative& r, const TestFunction& phi, const Point& x,
                      std::span<const TestFunction> directions);

/// -d_1 R(phi, x)(d_i phi) + d_i R(phi, x) for a J-formalism representative.
Complex Dj_derivative(const Representative& r, int axis, const TestFunction& phi, const Point& x,
                      double h = 1e-5);

}  // namespace gfn
