#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "qcdyn/boettcher.hpp"
#include "qcdyn/dilatation.hpp"
#include "qcdyn/error.hpp"
#include "qcdyn/export.hpp"
#include "qcdyn/koenigs.hpp"
#include "qcdyn/motion.hpp"
#include "qcdyn/parallel.hpp"
#include "qcdyn/report.hpp"

namespace py = pybind11;
using namespace qcdyn;

namespace {

// Summaries cross the boundary as JSON text and come back as dicts.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

template <class T>
py::array_t<T> array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

PolarGrid grid_of(double r_min, double r_max, int rings, int angles) {
  return PolarGrid::log_spaced(r_min, r_max, rings, angles);
}

EvalBudget budget_of(int depth, double tol) {
  EvalBudget b;
  b.max_iterations = depth;
  b.tolerance = tol;
  return b;
}

py::dict coordinate_dict(const CoordinateGrid& g, nlohmann::json summary) {
  py::dict d = to_py(summary);
  d["nodes"] = array(g.nodes);
  d["psi"] = array(g.psi);
  d["depth"] = array(g.depth);
  d["residual"] = array(g.residual);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Numerical normal forms and holomorphic motions for map germs";
  m.attr("__version__") = kToolVersion;

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<MapSpec>(m, "MapSpec")
      .def_static("power_series", &MapSpec::power_series, py::arg("coeffs"),
                  py::arg("radius") = kInfiniteRadius)
      .def_static("rational", &MapSpec::rational, py::arg("numerator"), py::arg("denominator"),
                  py::arg("radius") = kInfiniteRadius)
      .def_static("moebius_power", &MapSpec::moebius_power, py::arg("n"), py::arg("c"))
      .def_static("perturbed", &MapSpec::perturbed, py::arg("base"), py::arg("eps"), py::arg("alpha") = 1.0)
      .def_static("composite", &MapSpec::composite, py::arg("parts"))
      .def_static("linear", &MapSpec::linear, py::arg("lam"), py::arg("radius") = kInfiniteRadius)
      .def_static("power", &MapSpec::power, py::arg("n"))
      .def_static("from_json", [](const py::object& o) { return map_from_json(from_py(o)); })
      .def("to_json", [](const MapSpec& s) { return to_py(nlohmann::json(s)); })
      .def_property_readonly("validity_radius", &MapSpec::validity_radius)
      .def_property_readonly("is_analytic", &MapSpec::is_analytic)
      .def("__call__", &MapSpec::operator())
      .def("__repr__", [](const MapSpec& s) { return describe(s); });

  m.def("evaluate", &evaluate, py::arg("map"), py::arg("z"));
  m.def("iterate", [](const MapSpec& s, cplx z, int k) { return iterate(s, z, k, EvalBudget{}); },
        py::arg("map"), py::arg("z"), py::arg("k"));
  m.def("derivative", &derivative, py::arg("map"), py::arg("z"));
  m.def("local_inverse", [](const MapSpec& s, cplx w, cplx seed) { return local_inverse(s, w, seed, EvalBudget{}); },
        py::arg("map"), py::arg("w"), py::arg("seed"));
  m.def("classify", [](const MapSpec& s) { return to_py(summary_json(classify_fixed_point(s, EvalBudget{}))); },
        py::arg("map"));

  m.def(
      "koenigs",
      [](const MapSpec& s, double r_min, double r_max, int rings, int angles, int depth, double tol) {
        const FixedPointReport fp = classify_fixed_point(s, EvalBudget{});
        const PolarGrid g = grid_of(r_min, r_max, rings, angles);
        const CoordinateGrid c = fp.cls == FixedPointClass::Repelling ? koenigs_backward(s, g, budget_of(depth, tol))
                                                                       : koenigs_forward(s, g, budget_of(depth, tol));
        return coordinate_dict(c, summary_json(c));
      },
      py::arg("map"), py::arg("r_min") = 1e-3, py::arg("r_max") = 0.1, py::arg("rings") = 12,
      py::arg("angles") = 32, py::arg("depth") = 80, py::arg("tol") = 1e-13);
  m.def(
      "boettcher",
      [](const MapSpec& s, double r_min, double r_max, int rings, int angles, int depth, double tol) {
        const BoettcherResult r =
            boettcher_coordinate(s, grid_of(r_min, r_max, rings, angles), budget_of(depth, tol));
        return coordinate_dict(r.psi, summary_json(r));
      },
      py::arg("map"), py::arg("r_min") = 1e-3, py::arg("r_max") = 0.1, py::arg("rings") = 12,
      py::arg("angles") = 32, py::arg("depth") = 80, py::arg("tol") = 1e-13);
  m.def(
      "control_condition",
      [](const MapSpec& s, double delta, int n_max) { return to_py(summary_json(control_condition(s, delta, n_max, 12))); },
      py::arg("map"), py::arg("delta"), py::arg("n_max") = 60);

  m.def(
      "omega",
      [](const MapSpec& s, double r_min, double r_max, int rings, int angles) {
        const PolarGrid g = grid_of(r_min, r_max, rings, angles);
        const ModulusCurve c = omega_curve(beltrami_field(s, g));
        py::dict d = to_py(summary_json(c));
        d["t"] = array(c.t);
        d["omega"] = array(c.omega);
        return d;
      },
      py::arg("map"), py::arg("r_min") = 1e-4, py::arg("r_max") = 1.0, py::arg("rings") = 40, py::arg("angles") = 32);
  m.def(
      "holder_fit",
      [](const MapSpec& s, double r_min, double r_max, int rings, int angles) {
        return to_py(summary_json(holder_mu_bound_check(s, grid_of(r_min, r_max, rings, angles))));
      },
      py::arg("map"), py::arg("r_min") = 1e-4, py::arg("r_max") = 1.0, py::arg("rings") = 40, py::arg("angles") = 32);
  m.def(
      "tilde_omega",
      [](const std::vector<double>& t, const std::vector<double>& omega, double C, double sigma, double at) {
        const TildeOmega r = tilde_omega(ModulusCurve::from_samples(t, omega), C, sigma, at);
        return py::make_tuple(r.sum, r.bound);
      },
      py::arg("t"), py::arg("omega"), py::arg("C"), py::arg("sigma"), py::arg("at"));
  m.def("beltrami", [](const std::function<cplx(cplx)>& f, cplx z, double h) {
        const Jet j = wirtinger(f, z, h);
        return j.dzbar / j.dz;
      },
      py::arg("f"), py::arg("z"), py::arg("h") = 1e-6);
  m.def("compose_dilatation", &compose_dilatation, py::arg("mu_F"), py::arg("mu_G_at_Fz"), py::arg("F_z"));
  m.def("dilatation_K", &dilatation_K, py::arg("k"));

  m.def(
      "motion",
      [](const MapSpec& s, const std::string& kind, double r, double delta, int samples) {
        const MotionSample ms = kind == "koenig" ? build_motion_koenig(s, r, delta, samples)
                                                 : build_motion_boettcher(s, r, samples);
        const ExtendedMotion ext = extend_motion_radial(ms, annulus_grid(ms));
        py::dict d;
        d["axioms"] = to_py(summary_json(check_motion_axioms(ms)));
        d["extension"] = to_py(summary_json(ext));
        return d;
      },
      py::arg("map"), py::arg("kind"), py::arg("r"), py::arg("delta") = 0.1, py::arg("samples") = 64);

  m.def(
      "run",
      [](const py::object& config) {
        const RunManifest man = run(ExperimentConfig::from_json(from_py(config)));
        return to_py(man.to_json());
      },
      py::arg("config"));
  m.def(
      "verify_bundle",
      [](const std::string& dir) {
        const VerifyResult r = verify_bundle(dir);
        return py::make_tuple(r.ok, r.problems);
      },
      py::arg("dir"));
  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);
}
