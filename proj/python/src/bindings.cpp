#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kw/asymptotics.hpp"
#include "kw/config.hpp"
#include "kw/field_io.hpp"
#include "kw/fields.hpp"
#include "kw/functional.hpp"
#include "kw/greenfn.hpp"
#include "kw/minimize.hpp"
#include "kw/runner.hpp"
#include "kw/surface.hpp"

namespace py = pybind11;
using namespace kw;

namespace {

// Grid values as an (N, N) array indexed [i, j] with x = i·hx.
py::array_t<double> as_array(const TorusGeometry& geom, std::span<const double> v) {
  const auto n = static_cast<py::ssize_t>(geom.n());
  py::array_t<double> out({n, n});
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

SpectralField field_from_array(const TorusGeometry& geom,
                               py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (static_cast<std::size_t>(a.size()) != geom.size())
    throw std::invalid_argument("expected " + std::to_string(geom.size()) + " samples");
  return SpectralField::from_grid(geom, std::span<const double>(a.data(), geom.size()));
}

Point to_point(std::pair<double, double> p) { return {p.first, p.second}; }
std::pair<double, double> from_point(Point p) { return {p.x, p.y}; }

}  // namespace

PYBIND11_MODULE(_kw, m) {
  m.doc() = "Spectral Kazdan-Warner toolkit on the flat torus";
  m.attr("__version__") = KW_VERSION;

  py::class_<TorusGeometry>(m, "Torus")
      .def(py::init(&build_torus), py::arg("lx"), py::arg("ly"), py::arg("n"))
      .def_property_readonly("lx", &TorusGeometry::lx)
      .def_property_readonly("ly", &TorusGeometry::ly)
      .def_property_readonly("n", &TorusGeometry::n)
      .def_property_readonly("volume", &TorusGeometry::volume)
      .def("eigenvalue", &TorusGeometry::eigenvalue, py::arg("m"), py::arg("n"))
      .def("distinct_eigenvalue", [](const TorusGeometry& g, int level) { return distinct_eigenvalue(g, level); })
      .def("distance", [](const TorusGeometry& g, std::pair<double, double> a, std::pair<double, double> b) {
        return geodesic_distance(g, to_point(a), to_point(b));
      })
      .def("__repr__", [](const TorusGeometry& g) {
        return "Torus(" + format_double(g.lx()) + ", " + format_double(g.ly()) + ", " + std::to_string(g.n()) + ")";
      });

  py::class_<SpectralField>(m, "Field")
      .def(py::init(&field_from_array), py::arg("torus"), py::arg("values"))
      .def_property_readonly("torus", &SpectralField::geometry)
      .def_property_readonly("mean", &SpectralField::mean)
      .def("grid", [](const SpectralField& u) { return as_array(u.geometry(), u.grid()); })
      .def("value_at", [](const SpectralField& u, std::pair<double, double> p) { return u.value_at(to_point(p)); })
      .def("dirichlet_energy", &SpectralField::dirichlet_energy)
      .def("l2_norm_squared", &SpectralField::l2_norm_squared)
      .def("project_mean_zero", &project_mean_zero)
      .def("project_perp", &project_perp, py::arg("ell"))
      .def("h1_alpha_norm", &h1_alpha_norm, py::arg("alpha"));

  py::class_<WeightFunction>(m, "Weight")
      .def_static("uniform", &WeightFunction::uniform, py::arg("torus"))
      .def_static("cosine", &WeightFunction::cosine, py::arg("torus"), py::arg("a"))
      .def_static("bump", &WeightFunction::bump, py::arg("torus"), py::arg("a"), py::arg("kappa"),
                  py::arg("x0") = 0.5, py::arg("y0") = 0.5)
      .def("__call__", [](const WeightFunction& h, double x, double y) { return h(Point{x, y}); })
      .def_property_readonly("min", &WeightFunction::min_h)
      .def_property_readonly("max", &WeightFunction::max_h)
      .def_property_readonly("argmax", [](const WeightFunction& h) { return from_point(h.argmax()); })
      .def("grid", [](const WeightFunction& h) { return as_array(h.geometry(), h.samples()); });

  py::class_<FunctionalParams>(m, "Params")
      .def_static("subcritical", &FunctionalParams::subcritical, py::arg("alpha"), py::arg("eps"),
                  py::arg("weight"), py::arg("ell") = 0)
      .def_static("with_beta", &FunctionalParams::with_beta, py::arg("alpha"), py::arg("beta"),
                  py::arg("weight"), py::arg("ell") = 0)
      .def_readonly("alpha", &FunctionalParams::alpha)
      .def_readonly("beta", &FunctionalParams::beta)
      .def_readonly("eps", &FunctionalParams::eps)
      .def_readonly("ell", &FunctionalParams::ell);

  m.def("eval_J", &eval_J, py::arg("u"), py::arg("params"));
  m.def("grad_J", &grad_J, py::arg("u"), py::arg("params"));
  m.def("el_residual", py::overload_cast<const SpectralField&, const FunctionalParams&>(&el_residual),
        py::arg("u"), py::arg("params"));
  m.def("energy_identity_gap", &energy_identity_gap, py::arg("u"), py::arg("params"));
  m.def("weak_bound", &weak_bound, py::arg("params"));

  py::enum_<RobinMethod>(m, "RobinMethod")
      .value("split", RobinMethod::kSplit)
      .value("extrapolate", RobinMethod::kExtrapolate);

  py::class_<GreenFunction>(m, "Green")
      .def_property_readonly("source", [](const GreenFunction& g) { return from_point(g.source()); })
      .def_property_readonly("alpha", &GreenFunction::alpha)
      .def_property_readonly("ell", &GreenFunction::ell)
      .def_property_readonly("robin", &GreenFunction::robin)
      .def("__call__", [](const GreenFunction& g, double x, double y) { return g.value(Point{x, y}); })
      .def("grid", [](const GreenFunction& g) { return as_array(g.geometry(), g.grid_values()); })
      .def("robin_constant", &robin_constant, py::arg("method"));
  m.def(
      "green_solve",
      [](const TorusGeometry& g, double alpha, std::pair<double, double> p, int ell) {
        return green_solve(g, alpha, to_point(p), ell);
      },
      py::arg("torus"), py::arg("alpha"), py::arg("p"), py::arg("ell") = 0);

  py::class_<MinimizeOptions>(m, "MinimizeOptions")
      .def(py::init<>())
      .def_readwrite("tol", &MinimizeOptions::tol)
      .def_readwrite("max_iter", &MinimizeOptions::max_iter);
  py::class_<MinimizeResult>(m, "MinimizeResult")
      .def_readonly("u", &MinimizeResult::u)
      .def_readonly("J", &MinimizeResult::J)
      .def_readonly("mass", &MinimizeResult::mass)
      .def_readonly("c", &MinimizeResult::c)
      .def_property_readonly("x", [](const MinimizeResult& r) { return from_point(r.x); })
      .def_readonly("el_residual", &MinimizeResult::el_residual)
      .def_readonly("iterations", &MinimizeResult::iterations)
      .def_readonly("converged", &MinimizeResult::converged)
      .def_readonly("status", &MinimizeResult::status);
  m.def(
      "minimize",
      [](const FunctionalParams& p, const SpectralField* init, const MinimizeOptions& opts) {
        const SpectralField start = init ? *init : SpectralField(p.geometry());
        py::gil_scoped_release release;
        return minimize_subcritical(p, start, opts);
      },
      py::arg("params"), py::arg("init") = nullptr, py::arg("opts") = MinimizeOptions{});

  py::class_<Expansion>(m, "Expansion")
      .def_readonly("value", &Expansion::value)
      .def_readonly("expected", &Expansion::expected)
      .def_readonly("residual", &Expansion::residual);
  py::class_<TestFunctionBundle>(m, "TestFunction")
      .def_property_readonly("eps", &TestFunctionBundle::eps)
      .def_property_readonly("R", &TestFunctionBundle::R)
      .def_property_readonly("c", &TestFunctionBundle::c)
      .def_property_readonly("J", &TestFunctionBundle::J)
      .def_property_readonly("inner_fraction", &TestFunctionBundle::inner_fraction)
      .def("__call__", [](const TestFunctionBundle& b, double x, double y) { return b.value(Point{x, y}); })
      .def("dirichlet_expansion", &TestFunctionBundle::dirichlet_expansion)
      .def("log_mass_expansion", &TestFunctionBundle::log_mass_expansion)
      .def("J_expansion", &TestFunctionBundle::J_expansion);
  m.def(
      "test_function",
      [](const TorusGeometry& g, double eps, std::pair<double, double> p, double alpha,
         const WeightFunction& h, int ell) {
        py::gil_scoped_release release;
        return build_test_function(g, eps, to_point(p), alpha, h, ell);
      },
      py::arg("torus"), py::arg("eps"), py::arg("p"), py::arg("alpha"), py::arg("weight"),
      py::arg("ell") = 0);

  m.def("bubble_profile", py::overload_cast<double>(&bubble_profile), py::arg("r"));
  m.def("bubble_mass", &bubble_mass);

  m.def("read_field", [](const std::filesystem::path& p) {
    const FieldDump d = read_field(p);
    py::dict out;
    out["torus"] = d.geom;
    out["kind"] = d.kind;
    out["meta"] = d.meta;
    out["values"] = as_array(d.geom, d.values);
    return out;
  });

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  m.def("config_hash", [](const std::string& text) { return hash_hex(config_hash(parse_config(text))); },
        py::arg("text"));
  m.def(
      "run",
      [](const std::string& text, const std::filesystem::path& out, int threads) {
        const ExperimentConfig cfg = parse_config(text);
        RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = run(cfg, out, threads);
        }
        return py::make_tuple(manifest.exit_code(), manifest.to_json());
      },
      py::arg("config"), py::arg("out"), py::arg("threads") = 1);
}
