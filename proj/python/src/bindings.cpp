#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gfn/asymptotics.hpp"
#include "gfn/pullback.hpp"
#include "gfn/scenarios.hpp"

namespace py = pybind11;
using namespace gfn;

namespace {

// A float is a point in one dimension; a pair is a point in two.
Point to_point(const py::handle& h) {
  if (py::isinstance<py::float_>(h) || py::isinstance<py::int_>(h)) return Point{h.cast<double>(), 0.0};
  const auto seq = h.cast<py::sequence>();
  if (seq.size() == 1) return Point{seq[0].cast<double>(), 0.0};
  if (seq.size() == 2) return Point{seq[0].cast<double>(), seq[1].cast<double>()};
  throw py::value_error("a point is a float or a sequence of one or two floats");
}

MultiIndex to_index(const py::handle& h) {
  if (py::isinstance<py::int_>(h)) return MultiIndex{h.cast<int>(), 0};
  const auto seq = h.cast<py::sequence>();
  if (seq.size() == 1) return MultiIndex{seq[0].cast<int>(), 0};
  if (seq.size() == 2) return MultiIndex{seq[0].cast<int>(), seq[1].cast<int>()};
  throw py::value_error("a multi-index is an int or a sequence of one or two ints");
}

py::dict fit_dict(const OrderFit& f) {
  py::dict d;
  d["slope"] = f.slope;
  d["intercept"] = f.intercept;
  d["residual"] = f.residual;
  d["points_used"] = f.points_used;
  d["local_slopes"] = f.local_slopes;
  d["flag"] = f.flag();
  d["N"] = f.moderate_N();
  return d;
}

py::dict verdict_dict(const AsymptoticVerdict& v) {
  py::dict d;
  d["moderate"] = v.moderate;
  d["super_polynomial"] = v.super_polynomial;
  d["N"] = v.N;
  py::list series;
  for (const auto& s : v.series) {
    py::dict e = fit_dict(s.fit);
    e["member_id"] = s.series.member_id;
    e["alpha"] = s.series.alpha[0];
    py::list pts;
    for (const auto& p : s.series.points) pts.append(py::make_tuple(p.eps, p.log2_value, p.underflow));
    e["points"] = pts;
    series.append(e);
  }
  d["series"] = series;
  return d;
}

SweepSpec make_spec(const std::vector<double>& K, int i_min, int i_max, const std::vector<int>& alphas) {
  SweepSpec s;
  s.i_min = i_min;
  s.i_max = i_max;
  if (!K.empty()) {
    s.K.clear();
    for (double x : K) s.K.push_back(Point{x, 0.0});
  }
  s.alphas.clear();
  for (int a : alphas) s.alphas.push_back(MultiIndex{a, 0});
  return s;
}

}  // namespace

PYBIND11_MODULE(_gfn, m) {
  m.doc() = "Colombeau generalized functions numerical lab";

  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);

  py::class_<TestFunction>(m, "TestFunction")
      .def_property_readonly("dim", &TestFunction::dim)
      .def_property_readonly("radius", &TestFunction::radius)
      .def_property_readonly("center", [](const TestFunction& f) { return f.center(); })
      .def("__call__", [](const TestFunction& f, const py::handle& x) { return f(to_point(x)); })
      .def("derivative", &TestFunction::derivative, py::arg("axis") = 0)
      .def("sup_norm", py::overload_cast<>(&TestFunction::sup_norm, py::const_));

  m.def(
      "build_mollifier",
      [](int q, int dim, double radius, std::vector<double> extra) {
        return build_mollifier(q, dim, radius, MollifierShape{std::move(extra)});
      },
      py::arg("q"), py::arg("dim") = 1, py::arg("radius") = 1.0,
      py::arg("extra_coefficients") = std::vector<double>{});
  m.def("unit_bump", [](int dim, const py::handle& c, double r) { return unit_bump(dim, to_point(c), r); },
        py::arg("dim"), py::arg("center"), py::arg("radius"));
  m.def("moment", [](const TestFunction& f, const py::handle& a) { return moment(f, to_index(a)); },
        py::arg("phi"), py::arg("alpha"));
  m.def("scale", py::overload_cast<const TestFunction&, double>(&scale), py::arg("phi"), py::arg("eps"));
  m.def("translate", [](const TestFunction& f, const py::handle& x) { return translate(f, to_point(x)); },
        py::arg("phi"), py::arg("x"));

  py::class_<Distribution>(m, "Distribution")
      .def_static("dirac", [](int dim) { return Distribution::dirac(dim); }, py::arg("dim") = 1)
      .def_static("dirac_derivative", &Distribution::dirac_derivative, py::arg("k"), py::arg("at") = 0.0)
      .def_static("heaviside", &Distribution::heaviside)
      .def_static("principal_value", &Distribution::principal_value)
      .def_static("smooth", &smooth_by_name, py::arg("name"))
      .def_property_readonly("label", &Distribution::label)
      .def("pair", &Distribution::pair)
      .def("derivative", &Distribution::derivative, py::arg("axis") = 0);

  py::class_<Diffeomorphism>(m, "Diffeomorphism")
      .def_property_readonly("name", &Diffeomorphism::name)
      .def_property_readonly("dim", &Diffeomorphism::dim)
      .def("forward", [](const Diffeomorphism& d, const py::handle& x) { return d.forward(to_point(x))[0]; })
      .def("inverse", [](const Diffeomorphism& d, const py::handle& y) { return d.inverse(to_point(y))[0]; });
  m.def("diffeo_by_name", &diffeo_by_name, py::arg("name"));
  m.def("diffeo_catalog", &diffeo_catalog);
  m.def("compose", &compose);

  py::class_<Representative>(m, "Representative")
      .def_property_readonly("label", &Representative::label)
      .def_property_readonly("formalism", [](const Representative& r) { return to_string(r.formalism()); })
      .def("__call__",
           [](const Representative& r, const TestFunction& phi, const py::handle& x) {
             return r(phi, to_point(x));
           })
      .def("log_abs",
           [](const Representative& r, const TestFunction& phi, const py::handle& x) {
             return r.log_value(phi, to_point(x)).log_abs;
           })
      .def("__add__", &add)
      .def("__sub__", &sub)
      .def("__mul__", &mul);
  m.def("embed_C", &embed_C, py::arg("w"));
  m.def("embed_J", &embed_J, py::arg("w"));
  m.def("embed_sigma", py::overload_cast<const std::string&>(&embed_sigma), py::arg("name"));
  m.def("translate_formalism", &translate_formalism);
  m.def("pullback_rep", &pullback_rep, py::arg("mu"), py::arg("r"));
  m.def("counterexample_representative", &counterexample_representative);
  m.def(
      "Dj_derivative",
      [](const Representative& r, int axis, const TestFunction& phi, const py::handle& x) {
        return Dj_derivative(r, axis, phi, to_point(x));
      },
      py::arg("r"), py::arg("axis"), py::arg("phi"), py::arg("x"));

  py::class_<TestObjectPath>(m, "TestObjectPath")
      .def_property_readonly("id", &TestObjectPath::id)
      .def_property_readonly("mode", [](const TestObjectPath& p) { return to_string(p.mode()); })
      .def("__call__",
           [](const TestObjectPath& p, double eps, const py::handle& x) { return p(eps, to_point(x)); });
  m.def(
      "make_battery",
      [](const std::string& mode, int q, int count, std::uint64_t seed) {
        return make_battery(path_mode_from_string(mode), q, count, seed);
      },
      py::arg("mode"), py::arg("q"), py::arg("count") = 8, py::arg("seed") = 1);
  m.def(
      "transform_test_object",
      [](const Diffeomorphism& mu, const TestObjectPath& p) { return transform_test_object(mu, p).path; },
      py::arg("mu"), py::arg("phi"));

  m.def(
      "fit_log2",
      [](const std::vector<double>& x, const std::vector<double>& y) { return fit_dict(fit_log2(x, y)); },
      py::arg("log2_eps"), py::arg("log2_value"));
  m.def(
      "test_moderate",
      [](const Representative& r, const std::vector<TestObjectPath>& battery, const std::vector<double>& K,
         int i_min, int i_max, const std::vector<int>& alphas) {
        const auto spec = make_spec(K, i_min, i_max, alphas);
        py::gil_scoped_release release;
        auto v = test_moderate(r, battery, spec);
        py::gil_scoped_acquire acquire;
        return verdict_dict(v);
      },
      py::arg("r"), py::arg("battery"), py::arg("K") = std::vector<double>{}, py::arg("i_min") = 2,
      py::arg("i_max") = 14, py::arg("alphas") = std::vector<int>{0});

  m.def("scenario_names", &scenario_names);
  m.def(
      "run_scenario",
      [](const std::string& name, std::optional<int> q, std::optional<int> eps_min, std::optional<int> eps_max,
         std::optional<std::string> diffeo, std::optional<int> count, std::uint64_t seed,
         std::optional<std::string> out) {
        ScenarioConfig cfg;
        cfg.scenario = name;
        cfg.q = q;
        cfg.i_min = eps_min;
        cfg.i_max = eps_max;
        cfg.diffeo = diffeo;
        cfg.battery_count = count;
        cfg.seed = seed;
        ScenarioResult res;
        {
          py::gil_scoped_release release;
          res = run_scenario(cfg);
          if (out) write_outputs(res, *out);
        }
        py::list checks;
        for (const auto& c : res.checks) {
          py::dict d;
          d["check"] = c.kind;
          d["subject"] = c.subject;
          d["value"] = c.value;
          d["relation"] = c.relation;
          d["threshold"] = c.threshold;
          d["pass"] = c.pass;
          checks.append(d);
        }
        py::dict d;
        d["scenario"] = res.scenario;
        d["pass"] = res.pass();
        d["checks"] = checks;
        return d;
      },
      py::arg("name"), py::kw_only(), py::arg("q") = py::none(), py::arg("eps_min") = py::none(),
      py::arg("eps_max") = py::none(), py::arg("diffeo") = py::none(), py::arg("count") = py::none(),
      py::arg("seed") = 1, py::arg("out") = py::none());
}
