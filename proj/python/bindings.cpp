#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hproj/errors.hpp"
#include "hproj/experiments.hpp"
#include "hproj/geodesic_integrals.hpp"
#include "hproj/models.hpp"
#include "hproj/rigidity_lab.hpp"
#include "hproj/weighted_invariance.hpp"

namespace py = pybind11;
using namespace hproj;

namespace {

// Beltrami pair g = c g_FS, gbar = f_M^*(c g_FS) on CP(n), in the affine chart of real dimension 2n.
struct Pair {
  PairModel m;

  Pair(int n, double c, const MatC& M) : m(beltrami_pair(CPnChart{n, c}, M)) {}

  int dim() const { return m.fs.chart.dim(); }
  VecD point(const VecD& x) const {
    if (x.size() != dim()) throw InvalidParams("point has dimension " + std::to_string(x.size()));
    return x;
  }
  GeodesicState state(const VecD& x, const VecD& v) const {
    if (v.size() != dim()) throw InvalidParams("velocity has dimension " + std::to_string(v.size()));
    return {point(x), v};
  }
};

py::dict law_dict(const QuadraticLaw& q) {
  py::dict d;
  d["c2"] = q.c2;
  d["c1"] = q.c1;
  d["c0"] = q.c0;
  d["residual"] = q.residual;
  d["cond"] = q.cond;
  d["underdetermined"] = q.underdetermined;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "h-projective geometry of Kaehler metrics on CP(n)";

  py::register_exception<Error>(m, "HprojError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("standard_J", &standard_J, py::arg("n"));
  m.def(
      "fs_metric", [](int n, double c, const VecD& x) { return fs_metric<double>(CPnChart{n, c}, x); },
      py::arg("n"), py::arg("c"), py::arg("x"));

  py::class_<Pair>(m, "BeltramiPair")
      .def(py::init<int, double, const MatC&>(), py::arg("n"), py::arg("c"), py::arg("M"))
      .def_property_readonly("dim", &Pair::dim)
      .def_property_readonly("J", [](const Pair& p) { return p.m.hs.J; })
      .def("g", [](const Pair& p, const VecD& x) { return p.m.hs.g(p.point(x)); }, py::arg("x"))
      .def("gbar", [](const Pair& p, const VecD& x) { return p.m.gbar(p.point(x)); }, py::arg("x"))
      .def("A", [](const Pair& p, const VecD& x) { return p.m.hs.A(p.point(x)); }, py::arg("x"))
      .def("Lambda", [](const Pair& p, const VecD& x) { return p.m.hs.Lambda(p.point(x)); }, py::arg("x"))
      .def("Lambdabar", [](const Pair& p, const VecD& x) { return p.m.hs.Lambdabar(p.point(x)); }, py::arg("x"))
      .def(
          "main_equation_residual",
          [](const Pair& p, const VecD& x) { return main_equation_residual(p.m.hs, p.point(x)); }, py::arg("x"))
      .def(
          "eigenvalues",
          [](const Pair& p, const VecD& x) {
            VecD y = p.point(x);
            EigenData e = eigen_structure(p.m.hs.g(y), p.m.hs.A(y), p.m.hs.J);
            return py::make_tuple(e.values, e.mult);
          },
          py::arg("x"))
      .def(
          "F_t",
          [](const Pair& p, const VecD& x, const VecD& v, double t, int deriv) {
            return F_t(p.m.hs, p.state(x, v), t, deriv);
          },
          py::arg("x"), py::arg("v"), py::arg("t"), py::arg("m") = 0)
      .def(
          "F_t_determinant",
          [](const Pair& p, const VecD& x, const VecD& v, double t) {
            VecD y = p.point(x);
            return F_t_determinant(p.m.hs.g(y), p.m.hs.A(y), p.state(x, v).v, t);
          },
          py::arg("x"), py::arg("v"), py::arg("t"))
      .def(
          "integral_coefficients",
          [](const Pair& p, const VecD& x, const VecD& v) { return integral_coefficients(p.m.hs, p.state(x, v)); },
          py::arg("x"), py::arg("v"))
      .def(
          "integral_drift",
          [](const Pair& p, const VecD& x, const VecD& v, double T, double h, const std::vector<double>& ts) {
            IntegrateOptions o;
            o.h = h;
            return conservation_sweep(p.m.hs, p.state(x, v), ts, T, 2, o).max_drift;
          },
          py::arg("x"), py::arg("v"), py::arg("T"), py::arg("h"), py::arg("ts"));

  m.def(
      "fit_quadratic_law",
      [](const std::vector<std::pair<MatD, MatD>>& samples, double max_cond) {
        std::vector<LawSample> s;
        for (const auto& [A, L] : samples) s.push_back({A, L});
        return law_dict(fit_quadratic_law(s, max_cond));
      },
      py::arg("samples"), py::arg("max_cond") = 1e8, "samples are (A, L_v A) pairs");

  py::class_<RigidityParams>(m, "RigidityParams")
      .def(py::init([](int n, int k1, double c1, double c0, double C, double D, double d) {
             RigidityParams p;
             p.n = n;
             p.k1 = k1;
             p.c1 = c1;
             p.c0 = c0;
             p.C = C;
             p.D = D;
             p.d = d;
             p.validate();
             return p;
           }),
           py::arg("n"), py::arg("k1"), py::arg("c1"), py::arg("c0"), py::arg("C"), py::arg("D") = 1.0,
           py::arg("d") = 0.0)
      .def_readonly("n", &RigidityParams::n)
      .def_readonly("k1", &RigidityParams::k1)
      .def_readonly("c1", &RigidityParams::c1)
      .def_readonly("c0", &RigidityParams::c0)
      .def_readonly("C", &RigidityParams::C)
      .def_readonly("D", &RigidityParams::D)
      .def_readonly("d", &RigidityParams::d)
      .def_property_readonly("alpha", &RigidityParams::alpha)
      .def_property_readonly("rho1", &RigidityParams::rho1)
      .def_property_readonly("rho2", &RigidityParams::rho2);

  m.def("rho_closed_form", &rho_closed_form, py::arg("params"), py::arg("t"));
  m.def("block_curvature", &block_curvature, py::arg("params"), py::arg("t"));
  m.def("block_curvature_ad", &block_curvature_ad, py::arg("params"), py::arg("t"));
  m.def(
      "length_finiteness",
      [](const RigidityParams& p) {
        LengthReport r = length_finiteness(p);
        py::dict d;
        d["condition"] = r.condition;
        d["predicted_finite"] = r.predicted_finite;
        d["numerically_finite"] = r.numerically_finite;
        d["integral_T"] = r.integral_T;
        d["integral_2T"] = r.integral_2T;
        return d;
      },
      py::arg("params"));
  m.def(
      "mu_B_solve",
      [](const RigidityParams& p, double t) {
        MuBSolution s = mu_B_solve(p, t);
        return py::make_tuple(s.mu, s.B);
      },
      py::arg("params"), py::arg("t"));
  m.def(
      "fit_tanh_profile",
      [](const std::vector<double>& t, const std::vector<double>& rho) {
        TanhFit f = fit_tanh_profile(t, rho);
        py::dict d;
        d["c1"] = f.c1;
        d["alpha"] = f.alpha;
        d["d"] = f.d;
        d["max_deviation"] = f.max_deviation;
        d["converged"] = f.converged;
        return d;
      },
      py::arg("t"), py::arg("rho"));

  m.def("metric_to_sigma", &metric_to_sigma<double>, py::arg("g"));
  m.def("sigma_to_metric", &sigma_to_metric<double>, py::arg("sigma"));
  m.def("transform_sigma", &transform_sigma, py::arg("sigma"), py::arg("P"), py::arg("weight") = kSigmaWeight);
  m.def("hermitian_defect", &hermitian_defect, py::arg("sigma"), py::arg("J"));

  m.def("list_experiments", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : experiment_registry()) out.emplace_back(e.name, e.description);
    return out;
  });
  m.def(
      "_run_suite",
      [](const std::string& config, const std::string& only, bool write) {
        RunConfig cfg = parse_config(Json::parse(config));
        SuiteResult s;
        {
          py::gil_scoped_release release;
          s = run_suite(cfg, only);
          if (write) write_outputs(s, cfg);
        }
        py::dict csv;
        for (const auto& r : s.results) csv[py::str(r.name)] = csv_text(r);
        return py::make_tuple(summary_json(s, cfg).dump(), csv);
      },
      py::arg("config"), py::arg("only") = "", py::arg("write") = false);
}
