#include "gfn/basic_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gfn {

const char* to_string(Formalism f) {
  switch (f) {
    case Formalism::C:
      return "C";
    case Formalism::J:
      return "J";
    case Formalism::Any:
      return "any";
  }
  return "?";
}

using Admissible = std::function<bool(const TestFunction&, const Point&)>;

struct Representative::Impl {
  Formalism formalism = Formalism::C;
  int dim = 1;
  Evaluator eval;
  Exponent exponent;
  Traits traits;
  std::string label;
  Box domain = Box::whole(1);
  Admissible admissible;  // overrides the formalism default when set
  std::shared_ptr<const Impl> origin;
};

Representative::Representative(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Representative::Representative(Formalism formalism, int dim, Evaluator eval, Traits traits,
                               std::string label, Box omega) {
  if (omega.dim != dim) omega = Box::whole(dim);
  auto impl = std::make_shared<Impl>();
  impl->formalism = formalism;
  impl->dim = dim;
  impl->eval = std::move(eval);
  impl->traits = traits;
  impl->label = std::move(label);
  impl->domain = omega;
  impl_ = std::move(impl);
}

Representative Representative::exp_phase(Formalism formalism, int dim, Exponent g,
                                         std::string label, Box omega) {
  Evaluator eval = [g](const TestFunction& phi, const Point& x) {
    const double theta = std::exp(g(phi, x));
    return Complex(std::cos(theta), std::sin(theta));
  };
  Representative r(formalism, dim, std::move(eval), {}, std::move(label), omega);
  auto impl = std::make_shared<Impl>(*r.impl_);
  impl->exponent = std::move(g);
  return Representative(std::move(impl));
}

Formalism Representative::formalism() const { return impl_->formalism; }
int Representative::dim() const { return impl_->dim; }
const std::string& Representative::label() const { return impl_->label; }
const Box& Representative::domain() const { return impl_->domain; }
const Representative::Traits& Representative::traits() const { return impl_->traits; }
bool Representative::has_exponent() const { return static_cast<bool>(impl_->exponent); }

double Representative::exponent(const TestFunction& phi, const Point& x) const {
  if (!impl_->exponent) throw PreconditionError(label() + " has no exponent channel");
  if (!admissible(phi, x)) {
    throw DomainError("(phi, x) outside U(Omega) at x = " + describe_point(x, dim()));
  }
  return impl_->exponent(phi, x);
}

bool Representative::admissible(const TestFunction& phi, const Point& x) const {
  const Impl& im = *impl_;
  if (im.admissible) return im.admissible(phi, x);
  switch (im.formalism) {
    case Formalism::C:
      return im.domain.contains_ball(phi.center() + x, phi.radius());
    case Formalism::J:
      return im.domain.contains_ball(phi.center(), phi.radius()) && im.domain.contains(x);
    case Formalism::Any:
      return im.domain.contains(x);
  }
  return false;
}

Complex Representative::operator()(const TestFunction& phi, const Point& x) const {
  if (!admissible(phi, x)) {
    throw DomainError(label() + ": (phi, x) outside U(Omega) at x = " + describe_point(x, dim()) +
                      ", support radius " + std::to_string(phi.radius()));
  }
  return impl_->eval(phi, x);
}

LogValue Representative::log_value(const TestFunction& phi, const Point& x) const {
  if (impl_->exponent) {
    const double theta = std::exp(exponent(phi, x));
    return {0.0, std::isfinite(theta) ? std::fmod(theta, 2.0 * M_PI) : 0.0};
  }
  const Complex v = (*this)(phi, x);
  return {std::log(std::abs(v)), std::arg(v)};
}

Representative Representative::relabeled(std::string label) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->label = std::move(label);
  impl->origin = nullptr;
  return Representative(std::move(impl));
}

Representative Representative::restricted(const Box& omega) const {
  auto impl = std::make_shared<Impl>(*impl_);
  impl->domain = omega;
  impl->origin = nullptr;
  return Representative(std::move(impl));
}

Representative embed_C(const Distribution& w) {
  return Representative(
      Formalism::C, w.dim(),
      [w](const TestFunction& phi, const Point& x) { return w.pair(translate(phi, x)); },
      {.linear = true}, "iota(" + w.label() + ")", w.domain());
}

Representative embed_J(const Distribution& w) {
  return Representative(
      Formalism::J, w.dim(), [w](const TestFunction& phi, const Point&) { return w.pair(phi); },
      {.linear = true, .x_independent = true}, "iotaJ(" + w.label() + ")", w.domain());
}

Representative embed_sigma(int dim, Density f, std::string label) {
  return Representative(
      Formalism::Any, dim, [f](const TestFunction&, const Point& x) { return f(x); },
      {.phi_independent = true}, "sigma(" + label + ")", Box::whole(dim));
}

Representative embed_sigma(const std::string& catalog_name) {
  auto jet = smooth_jet_by_name(catalog_name);
  return embed_sigma(1, [jet](const Point& x) { return jet(x, MultiIndex{0, 0}); }, catalog_name);
}

Representative translate_formalism(const Representative& r) {
  const auto& im = *r.impl_;
  if (im.origin) return Representative(im.origin);
  if (im.formalism == Formalism::Any) return r;
  const double sign = im.formalism == Formalism::C ? -1.0 : 1.0;
  auto moved = [sign](const TestFunction& phi, const Point& x) { return translate(phi, sign * x); };
  auto impl = std::make_shared<Representative::Impl>();
  impl->formalism = im.formalism == Formalism::C ? Formalism::J : Formalism::C;
  impl->dim = im.dim;
  impl->eval = [r, moved](const TestFunction& phi, const Point& x) { return r(moved(phi, x), x); };
  if (im.exponent) {
    impl->exponent = [r, moved](const TestFunction& phi, const Point& x) {
      return r.exponent(moved(phi, x), x);
    };
  }
  impl->traits = im.traits;
  impl->traits.x_independent = im.traits.x_independent && im.traits.phi_independent;
  impl->label = std::string("T") + (impl->formalism == Formalism::J ? "^-1" : "") + "(" +
                im.label + ")";
  impl->domain = im.domain;
  impl->admissible = [r, moved](const TestFunction& phi, const Point& x) {
    return r.admissible(moved(phi, x), x);
  };
  impl->origin = r.impl_;
  return Representative(std::move(impl));
}

Representative transport(int dim, Formalism formalism, Representative::Evaluator eval,
                         Representative::Exponent exponent, Admissible admissible,
                         Representative::Traits traits, std::string label, Box omega) {
  auto impl = std::make_shared<Representative::Impl>();
  impl->formalism = formalism;
  impl->dim = dim;
  impl->eval = std::move(eval);
  impl->exponent = std::move(exponent);
  impl->traits = traits;
  impl->label = std::move(label);
  impl->domain = omega.dim == dim ? omega : Box::whole(dim);
  impl->admissible = std::move(admissible);
  return Representative(std::move(impl));
}

namespace {

Formalism combined_formalism(const Representative& a, const Representative& b) {
  if (a.dim() != b.dim()) throw PreconditionError("representatives live in different dimensions");
  if (a.formalism() == Formalism::Any) return b.formalism();
  if (b.formalism() == Formalism::Any) return a.formalism();
  if (a.formalism() != b.formalism()) {
    throw PreconditionError(std::string("formalism mismatch: ") + to_string(a.formalism()) +
                            " vs " + to_string(b.formalism()));
  }
  return a.formalism();
}

Box intersect(const Box& a, const Box& b) {
  Box out = a;
  for (int i = 0; i < a.dim; ++i) {
    out.lo[i] = std::max(a.lo[i], b.lo[i]);
    out.hi[i] = std::min(a.hi[i], b.hi[i]);
  }
  return out;
}

Representative combine(const Representative& a, const Representative& b,
                       std::function<Complex(Complex, Complex)> op, Representative::Traits traits,
                       const std::string& label) {
  const Formalism f = combined_formalism(a, b);
  return transport(
      a.dim(), f,
      [a, b, op](const TestFunction& phi, const Point& x) { return op(a(phi, x), b(phi, x)); },
      nullptr,
      [a, b](const TestFunction& phi, const Point& x) {
        return a.admissible(phi, x) && b.admissible(phi, x);
      },
      traits, label, intersect(a.domain(), b.domain()));
}

}  // namespace

Representative add(const Representative& a, const Representative& b) {
  const auto& ta = a.traits();
  const auto& tb = b.traits();
  Representative::Traits t{ta.linear && tb.linear, ta.phi_independent && tb.phi_independent,
                           ta.x_independent && tb.x_independent};
  return combine(a, b, std::plus<Complex>(), t, a.label() + "+" + b.label());
}

Representative sub(const Representative& a, const Representative& b) {
  const auto& ta = a.traits();
  const auto& tb = b.traits();
  Representative::Traits t{ta.linear && tb.linear, ta.phi_independent && tb.phi_independent,
                           ta.x_independent && tb.x_independent};
  return combine(a, b, std::minus<Complex>(), t, a.label() + "-" + b.label());
}

Representative mul(const Representative& a, const Representative& b) {
  const auto& ta = a.traits();
  const auto& tb = b.traits();
  Representative::Traits t{(ta.linear && tb.phi_independent) || (tb.linear && ta.phi_independent),
                           ta.phi_independent && tb.phi_independent,
                           ta.x_independent && tb.x_independent};
  return combine(a, b, std::multiplies<Complex>(), t, a.label() + "*" + b.label());
}

Representative scale(Complex c, const Representative& a) {
  return combine(a, embed_sigma(a.dim(), [c](const Point&) { return c; }, "c"),
                 std::multiplies<Complex>(), a.traits(), "c*" + a.label());
}

Slot Slot::fixed(const TestFunction& phi) {
  return Slot{[phi](const Point&) { return phi; }, false};
}

namespace {

struct Op {
  bool is_x = true;
  int axis = 0;
  TestFunction direction;
  double step = 0.0;
};

enum class Side { Central, Forward, Backward };

struct Stencil {
  std::vector<double> offsets, weights;
};

Stencil stencil_for(const Op& op, Side side) {
  if (!op.is_x || side == Side::Central) return {{-0.5, 0.5}, {-1.0, 1.0}};
  if (side == Side::Forward) return {{0.0, 1.0, 2.0}, {-1.5, 2.0, -0.5}};
  return {{0.0, -1.0, -2.0}, {1.5, -2.0, 0.5}};
}

std::vector<Op> build_ops(const Representative& r, const Slot& slot, const Point& x,
                          const DerivativeRequest& req) {
  std::vector<Op> ops;
  for (int i = 0; i < r.dim(); ++i) {
    for (int k = 0; k < req.alpha[i]; ++k) ops.push_back(Op{true, i, TestFunction::zero(r.dim()), req.h});
  }
  if (!req.directions.empty()) {
    const double base = slot.at(x).sup_norm();
    for (const auto& psi : req.directions) {
      const double s = psi.sup_norm();
      if (!(s > 0.0)) throw PreconditionError("zero direction in d1 derivative");
      ops.push_back(Op{false, 0, psi, req.t_relative * std::max(base, 1e-300) / s});
    }
  }
  return ops;
}

// Mixed difference over the ops selected by `mask`; the others sit at offset 0.
template <class T, class F>
T apply_stencil(const std::vector<Op>& ops, unsigned mask, const Slot& slot, const Point& x,
                Side side, F&& value) {
  std::vector<int> active;
  for (int j = 0; j < static_cast<int>(ops.size()); ++j)
    if (mask & (1u << j)) active.push_back(j);
  std::vector<Stencil> st;
  double scale = 1.0;
  for (int j : active) {
    st.push_back(stencil_for(ops[j], side));
    scale *= ops[j].step;
  }
  std::vector<int> idx(active.size(), 0);
  T acc{};
  while (true) {
    Point xp = x;
    double w = 1.0;
    std::vector<std::pair<double, TestFunction>> phi_parts;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Op& op = ops[active[a]];
      const double off = st[a].offsets[idx[a]];
      w *= st[a].weights[idx[a]];
      if (op.is_x) {
        xp[op.axis] += off * op.step;
      } else {
        phi_parts.emplace_back(off * op.step, op.direction);
      }
    }
    TestFunction phi = slot.at(xp);
    if (!phi_parts.empty()) {
      phi_parts.emplace_back(1.0, phi);
      phi = linear_combination(phi_parts);
    }
    acc += w * value(phi, xp);
    std::size_t a = 0;
    for (; a < active.size(); ++a) {
      if (++idx[a] < static_cast<int>(st[a].offsets.size())) break;
      idx[a] = 0;
    }
    if (a == active.size()) break;
  }
  return acc / scale;
}

// One Richardson level on top of the O(h^2) stencil: (4 D(h/2) - D(h)) / 3.
template <class T, class F>
T richardson_stencil(std::vector<Op> ops, unsigned mask, const Slot& slot, const Point& x,
                     Side side, F&& value) {
  const T coarse = apply_stencil<T>(ops, mask, slot, x, side, value);
  for (auto& op : ops) op.step *= 0.5;
  const T fine = apply_stencil<T>(ops, mask, slot, x, side, value);
  return (4.0 * fine - coarse) / 3.0;
}

template <class T, class F>
T stencil_with_fallback(const std::vector<Op>& ops, unsigned mask, const Slot& slot,
                        const Point& x, F&& value) {
  try {
    return richardson_stencil<T>(ops, mask, slot, x, Side::Central, value);
  } catch (const DomainError&) {
  }
  try {
    return richardson_stencil<T>(ops, mask, slot, x, Side::Forward, value);
  } catch (const DomainError&) {
  }
  return richardson_stencil<T>(ops, mask, slot, x, Side::Backward, value);
}

void set_partitions(unsigned mask, std::vector<unsigned>& blocks,
                    const std::function<void(const std::vector<unsigned>&)>& visit) {
  if (mask == 0) {
    visit(blocks);
    return;
  }
  const unsigned low = mask & (~mask + 1u);
  const unsigned rest = mask & ~low;
  // Every subset s of rest joins the block of the lowest element.
  for (unsigned s = rest;; s = (s - 1) & rest) {
    blocks.push_back(low | s);
    set_partitions(rest & ~s, blocks, visit);
    blocks.pop_back();
    if (s == 0) break;
  }
}

}  // namespace

Complex mixed_derivative(const Representative& r, const Slot& slot, const Point& x,
                         const DerivativeRequest& req) {
  const auto& tr = r.traits();
  const int k = static_cast<int>(req.directions.size());
  if (k > 0 && tr.phi_independent) return 0.0;
  if (k > 0 && tr.linear) {
    if (k >= 2) return 0.0;
    DerivativeRequest inner = req;
    inner.directions.clear();
    return mixed_derivative(r, Slot::fixed(req.directions.front()), x, inner);
  }
  if (total_order(req.alpha) == 0 && k == 0) return r(slot.at(x), x);
  if (k == 0 && tr.x_independent && !slot.x_dependent) return 0.0;
  const auto ops = build_ops(r, slot, x, req);
  const unsigned all = (1u << ops.size()) - 1u;
  return stencil_with_fallback<Complex>(
      ops, all, slot, x, [&](const TestFunction& phi, const Point& xp) { return r(phi, xp); });
}

LogValue mixed_log_derivative(const Representative& r, const Slot& slot, const Point& x,
                              const DerivativeRequest& req) {
  if (!r.has_exponent()) {
    const Complex v = mixed_derivative(r, slot, x, req);
    return {std::log(std::abs(v)), std::arg(v)};
  }
  const auto ops = build_ops(r, slot, x, req);
  const double g0 = r.exponent(slot.at(x), x);
  if (ops.empty()) return {0.0, 0.0};
  const unsigned all = (1u << ops.size()) - 1u;
  std::vector<double> dg(all + 1, 0.0);
  auto g = [&](const TestFunction& phi, const Point& xp) { return r.exponent(phi, xp); };
  for (unsigned b = 1; b <= all; ++b) dg[b] = stencil_with_fallback<double>(ops, b, slot, x, g);

  // a[B] = D_B exp(G) / exp(G).
  std::vector<double> a(all + 1, 0.0);
  for (unsigned b = 1; b <= all; ++b) {
    std::vector<unsigned> blocks;
    set_partitions(b, blocks, [&](const std::vector<unsigned>& p) {
      double prod = 1.0;
      for (unsigned c : p) prod *= dg[c];
      a[b] += prod;
    });
  }

  // D_S R / R = sum over partitions pi of prod_{B in pi} (i exp(G) a[B]).
  struct Term {
    double log_mag;
    Complex unit;
  };
  std::vector<Term> terms;
  std::vector<unsigned> blocks;
  set_partitions(all, blocks, [&](const std::vector<unsigned>& p) {
    double lm = static_cast<double>(p.size()) * g0;
    double sign = 1.0;
    for (unsigned c : p) {
      if (a[c] == 0.0) return;
      lm += std::log(std::abs(a[c]));
      sign *= a[c] < 0.0 ? -1.0 : 1.0;
    }
    Complex unit = sign;
    for (std::size_t i = 0; i < p.size(); ++i) unit *= Complex(0.0, 1.0);
    terms.push_back({lm, unit});
  });
  if (terms.empty()) return {-std::numeric_limits<double>::infinity(), 0.0};
  double m = terms.front().log_mag;
  for (const auto& t : terms) m = std::max(m, t.log_mag);
  Complex s = 0.0;
  for (const auto& t : terms) s += t.unit * std::exp(t.log_mag - m);
  return {m + std::log(std::abs(s)), std::arg(s)};
}

Complex partial_x(const Representative& r, const MultiIndex& alpha, const TestFunction& phi,
                  const Point& x, double h) {
  return partial_x(r, alpha, Slot::fixed(phi), x, h);
}

Complex partial_x(const Representative& r, const MultiIndex& alpha, const Slot& slot,
                  const Point& x, double h) {
  DerivativeRequest req;
  req.alpha = alpha;
  req.h = h;
  return mixed_derivative(r, slot, x, req);
}

Complex d1_derivative(const Representative& r, const TestFunction& phi, const Point& x,
                      std::span<const TestFunction> directions) {
  if (directions.size() > 2) throw PreconditionError("d1 derivatives are supported up to k = 2");
  for (const auto& psi : directions) {
    const double mass = moment(psi, MultiIndex{0, 0});
    if (std::abs(mass) > 1e-10) {
      throw PreconditionError("direction has integral " + std::to_string(mass) +
                              "; d1 directions must lie in A_00");
    }
  }
  DerivativeRequest req;
  req.directions.assign(directions.begin(), directions.end());
  return mixed_derivative(r, Slot::fixed(phi), x, req);
}

Complex Dj_derivative(const Representative& r, int axis, const TestFunction& phi, const Point& x,
                      double h) {
  if (r.formalism() == Formalism::C) {
    throw PreconditionError("Dj_derivative expects a J-formalism representative");
  }
  const TestFunction dphi = phi.derivative(axis);
  const TestFunction dirs[] = {dphi};
  return -d1_derivative(r, phi, x, dirs) + partial_x(r, unit_index(axis), phi, x, h);
}

}  // namespace gfn
