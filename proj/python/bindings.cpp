#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "darkcool/atom_model.hpp"
#include "darkcool/error.hpp"
#include "darkcool/lindblad.hpp"
#include "darkcool/mcwf.hpp"
#include "darkcool/philox.hpp"
#include "darkcool/semiclassical.hpp"
#include "darkcool/spectroscopy.hpp"

namespace py = pybind11;
using namespace darkcool;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

DriveConfig drive_from_kwargs(const py::kwargs& kw, DriveConfig base) {
  for (auto item : kw) {
    const auto key = py::cast<std::string>(item.first);
    const double v = py::cast<double>(item.second);
    if (key == "g_p") base.g_p = v;
    else if (key == "g41") base.g41 = v;
    else if (key == "g42") base.g42 = v;
    else if (key == "delta_p") base.delta_p = v;
    else if (key == "delta41") base.delta41 = v;
    else if (key == "delta42") base.delta42 = v;
    else if (key == "gamma41") base.gamma41 = v;
    else if (key == "gamma42") base.gamma42 = v;
    else if (key == "gamma23") base.gamma23 = v;
    else if (key == "gamma13") base.gamma13 = v;
    else throw ConfigError("unknown drive field '" + key + "'");
  }
  base.validate();
  return base;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Four-level dark-resonance laser cooling: spectra, semiclassical cooling, MCWF";
  m.attr("__version__") = DARKCOOL_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<GridError>(m, "GridError", numerical.ptr());
  py::register_exception<FitError>(m, "FitError", numerical.ptr());
  py::register_exception<IntegratorError>(m, "IntegratorError", numerical.ptr());
  py::register_exception<NonUniqueSteadyState>(m, "NonUniqueSteadyState", numerical.ptr());

  py::class_<AtomSpecies>(m, "AtomSpecies")
      .def(py::init<std::string, double, double, double>(), py::arg("name"), py::arg("mass_kg"),
           py::arg("lambda_probe_m"), py::arg("gamma_rad_s"))
      .def_static("from_amu", &AtomSpecies::from_amu, py::arg("name"), py::arg("mass_amu"),
                  py::arg("lambda_probe_m"), py::arg("gamma_rad_s"))
      .def_property_readonly("name", &AtomSpecies::name)
      .def_property_readonly("mass", &AtomSpecies::mass)
      .def_property_readonly("lambda_probe", &AtomSpecies::lambda_probe)
      .def_property_readonly("gamma", &AtomSpecies::gamma)
      .def_property_readonly("hbar_k", &AtomSpecies::hbar_k)
      .def_property_readonly("kappa", &linewidth_in_recoils);
  m.def("species", &species::by_name, py::arg("name"));

  py::class_<RecoilScales>(m, "RecoilScales")
      .def_readonly("E_r", &RecoilScales::E_r)
      .def_readonly("hbar_k", &RecoilScales::hbar_k)
      .def_readonly("omega_r", &RecoilScales::omega_r)
      .def_readonly("v_r", &RecoilScales::v_r);
  m.def("recoil_scales", &recoil_scales);
  m.def(
      "to_recoil_units",
      [](double value, const std::string& kind, const RecoilScales& s) {
        return to_recoil_units(value, parse_quantity_kind(kind), s);
      },
      py::arg("value"), py::arg("kind"), py::arg("scales"));
  m.def(
      "from_recoil_units",
      [](double value, const std::string& kind, const RecoilScales& s) {
        return from_recoil_units(value, parse_quantity_kind(kind), s);
      },
      py::arg("value"), py::arg("kind"), py::arg("scales"));

  py::class_<DriveConfig>(m, "DriveConfig")
      .def(py::init([](const py::kwargs& kw) { return drive_from_kwargs(kw, DriveConfig{}); }))
      .def_readwrite("g_p", &DriveConfig::g_p)
      .def_readwrite("g41", &DriveConfig::g41)
      .def_readwrite("g42", &DriveConfig::g42)
      .def_readwrite("delta_p", &DriveConfig::delta_p)
      .def_readwrite("delta41", &DriveConfig::delta41)
      .def_readwrite("delta42", &DriveConfig::delta42)
      .def_readwrite("gamma41", &DriveConfig::gamma41)
      .def_readwrite("gamma42", &DriveConfig::gamma42)
      .def_readwrite("gamma23", &DriveConfig::gamma23)
      .def_readwrite("gamma13", &DriveConfig::gamma13)
      .def("validate", &DriveConfig::validate)
      .def_property_readonly("weak_probe", &DriveConfig::weak_probe)
      .def("replace", [](const DriveConfig& c, const py::kwargs& kw) { return drive_from_kwargs(kw, c); })
      .def("__repr__", [](const DriveConfig& c) {
        return "DriveConfig(g_p=" + std::to_string(c.g_p) + ", g41=" + std::to_string(c.g41) +
               ", g42=" + std::to_string(c.g42) + ", delta_p=" + std::to_string(c.delta_p) + ")";
      });
  m.def("preset", [](const std::string& name) {
    if (name == "fig3_1") return presets::fig3_1();
    if (name == "fig3") return presets::fig3();
    throw ConfigError("unknown drive preset '" + name + "' (expected fig3_1 or fig3)");
  });

  m.def(
      "steady_state",
      [](const DriveConfig& cfg, double probe_factor) {
        return steady_state(build_liouvillian(cfg, probe_factor)).matrix();
      },
      py::arg("cfg"), py::arg("probe_factor") = 1.0);
  m.def(
      "liouvillian",
      [](const DriveConfig& cfg, double probe_factor) {
        return build_liouvillian(cfg, probe_factor).superoperator();
      },
      py::arg("cfg"), py::arg("probe_factor") = 1.0);

  m.def("chi", &chi_at, py::arg("cfg"), py::arg("delta_p"));
  m.def("three_level_chi", &three_level_chi, py::arg("cfg"), py::arg("delta_p"));
  m.def(
      "spectrum",
      [](const DriveConfig& cfg, double lo, double hi, int points, const std::string& kind) {
        Spectrum s;
        {
          py::gil_scoped_release release;
          s = spectrum_scan(cfg, lo, hi, points, parse_grid_kind(kind));
        }
        py::array_t<double> dp(static_cast<py::ssize_t>(s.samples.size()));
        py::array_t<std::complex<double>> chi(static_cast<py::ssize_t>(s.samples.size()));
        auto a = dp.mutable_unchecked<1>();
        auto b = chi.mutable_unchecked<1>();
        for (std::size_t k = 0; k < s.samples.size(); ++k) {
          a(k) = s.samples[k].delta_p;
          b(k) = s.samples[k].chi;
        }
        return py::make_tuple(dp, chi);
      },
      py::arg("cfg"), py::arg("lo"), py::arg("hi"), py::arg("points"),
      py::arg("grid") = "uniform");

  m.def("friction", &friction, py::arg("cfg"), py::arg("delta_p"));
  m.def(
      "diffusion",
      [](const DriveConfig& cfg, double delta_p, double kappa, int grid_halfwidth) {
        DiffusionOptions o;
        o.grid_halfwidth = grid_halfwidth;
        py::gil_scoped_release release;
        const auto r = diffusion(cfg, delta_p, kappa, o);
        return r.scaled;
      },
      py::arg("cfg"), py::arg("delta_p"), py::arg("kappa"), py::arg("grid_halfwidth") = 6);
  m.def(
      "temperature",
      [](const DriveConfig& cfg, std::vector<double> detunings, double kappa) {
        std::vector<CoolingPoint> curve;
        {
          py::gil_scoped_release release;
          curve = temperature_curve(cfg, detunings, kappa);
        }
        py::dict out;
        std::vector<double> eta, d, t;
        std::vector<std::string> status;
        for (const auto& p : curve) {
          eta.push_back(p.eta);
          d.push_back(p.diffusion);
          t.push_back(p.temperature);
          status.emplace_back(to_string(p.status));
        }
        out["delta_p"] = to_array(detunings);
        out["eta"] = to_array(eta);
        out["diffusion"] = to_array(d);
        out["temperature"] = to_array(t);
        out["status"] = status;
        return out;
      },
      py::arg("cfg"), py::arg("detunings"), py::arg("kappa"));

  m.def(
      "run_trajectory",
      [](const DriveConfig& cfg, double kappa, double t_final, std::uint64_t seed, int N,
         int samples, double initial_width) {
        GridSpec g;
        g.halfwidth = N;
        g.kappa = kappa;
        TrajectoryOptions o;
        o.samples = samples;
        o.initial_width = initial_width;
        TrajectoryRecord r;
        {
          py::gil_scoped_release release;
          r = run_trajectory(cfg, g, t_final, seed, o);
        }
        py::dict out;
        out["times"] = to_array(r.times);
        out["p_mean"] = to_array(r.p_mean);
        out["p2_mean"] = to_array(r.p2_mean);
        py::list jumps;
        for (const auto& j : r.jumps) jumps.append(py::make_tuple(j.time, j.channel, j.sign));
        out["jumps"] = jumps;
        out["jump_count"] = r.jump_count;
        return out;
      },
      py::arg("cfg"), py::arg("kappa"), py::arg("t_final"), py::arg("seed"), py::arg("N") = 50,
      py::arg("samples") = 200, py::arg("initial_width") = 5.0);

  m.def(
      "ensemble_temperature",
      [](const DriveConfig& cfg, double kappa, double t_final, int M, std::uint64_t base_seed,
         int N, unsigned threads) {
        GridSpec g;
        g.halfwidth = N;
        g.kappa = kappa;
        EnsembleOptions o;
        o.threads = threads;
        EnsembleResult r;
        {
          py::gil_scoped_release release;
          r = ensemble_temperature(cfg, g, t_final, M, base_seed, o);
        }
        py::dict out;
        out["temperature"] = r.temperature;
        out["temperature_error"] = r.temperature_error;
        out["equilibrated"] = r.equilibrated;
        out["failures"] = r.failures;
        out["times"] = to_array(r.times);
        out["p2_mean"] = to_array(r.p2_mean);
        return out;
      },
      py::arg("cfg"), py::arg("kappa"), py::arg("t_final"), py::arg("M"),
      py::arg("base_seed") = 1, py::arg("N") = 50, py::arg("threads") = 0);

  m.def(
      "validate_unraveling",
      [](const DriveConfig& cfg, double t, int M, std::uint64_t base_seed) {
        ValidationOptions o;
        o.base_seed = base_seed;
        ValidationReport r;
        {
          py::gil_scoped_release release;
          r = validate_against_master_equation(cfg, t, M, o);
        }
        py::dict out;
        out["passed"] = r.passed;
        out["max_deviation"] = r.max_deviation;
        out["max_sigma"] = r.max_sigma;
        out["max_z"] = r.max_z;
        return out;
      },
      py::arg("cfg"), py::arg("t"), py::arg("M"), py::arg("base_seed") = 1);

  m.def(
      "philox",
      [](std::uint64_t k0, std::uint64_t k1, int count) {
        Philox4x64 g(k0, k1);
        std::vector<std::uint64_t> v(static_cast<std::size_t>(count));
        for (auto& x : v) x = g();
        return v;
      },
      py::arg("k0"), py::arg("k1"), py::arg("count"));
}
