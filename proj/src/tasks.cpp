#include "darkcool/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "darkcool/error.hpp"
#include "darkcool/mcwf.hpp"
#include "darkcool/parallel.hpp"
#include "darkcool/semiclassical.hpp"
#include "darkcool/spectroscopy.hpp"

namespace darkcool {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::string header) { out_ << header << '\n'; }
  template <class... Cols>
  void row(const Cols&... cols) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cols), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::string_view v) { return std::string(v); }
  std::ostringstream out_;
};

double kappa_of(const RunConfig& cfg) {
  return cfg.species ? linewidth_in_recoils(*cfg.species) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> scan_grid(const ScanBlock& s) {
  std::vector<double> x(static_cast<std::size_t>(s.points));
  for (int k = 0; k < s.points; ++k) {
    const double f = static_cast<double>(k) / (s.points - 1);
    if (s.grid_kind == "geometric") {
      x[k] = s.lo * std::pow(s.hi / s.lo, f);
    } else {
      x[k] = s.lo + (s.hi - s.lo) * f;
    }
  }
  x.back() = s.hi;
  return x;
}

std::vector<double> detunings_in_gamma(const RunConfig& cfg) {
  auto x = scan_grid(*cfg.scan);
  if (cfg.scan->unit == "recoil") {
    const double kappa = kappa_of(cfg);
    for (auto& v : x) v /= kappa;
  }
  return x;
}

std::string si_block(const RunConfig& cfg) {
  if (!cfg.species) return {};
  const auto& sp = *cfg.species;
  const auto sc = recoil_scales(sp);
  std::ostringstream os;
  os << "\n[SI] species " << sp.name() << ": mass " << short_fmt(sp.mass()) << " kg, lambda "
     << short_fmt(sp.lambda_probe()) << " m, gamma " << short_fmt(sp.gamma()) << " 1/s\n";
  os << "[SI] E_r = " << short_fmt(sc.E_r) << " J, E_r/k_B = "
     << short_fmt(sc.E_r / constants::boltzmann * 1e9) << " nK, omega_r = "
     << short_fmt(sc.omega_r) << " rad/s, v_r = " << short_fmt(sc.v_r)
     << " m/s, kappa = gamma/omega_r = " << short_fmt(linewidth_in_recoils(sp)) << "\n";
  return os.str();
}

std::string si_temperature(const RunConfig& cfg, double t_scaled) {
  if (!cfg.species) return {};
  const double kelvin =
      from_recoil_units(t_scaled, QuantityKind::temperature, recoil_scales(*cfg.species));
  return " = " + short_fmt(kelvin * 1e9) + " nK";
}

std::string si_detuning(const RunConfig& cfg, double dp_gamma) {
  if (!cfg.species) return {};
  const double w = dp_gamma * cfg.species->gamma();
  return " = " + short_fmt(w) + " rad/s (" + short_fmt(w / (2.0 * constants::pi) * 1e-6) + " MHz)";
}

struct Result {
  std::string csv;
  std::string summary;
  nlohmann::json extra = nlohmann::json::object();
  int exit_code = 0;
};

Result run_spectrum(const RunConfig& cfg) {
  const auto& s = *cfg.scan;
  Result r;
  Spectrum spec;
  std::vector<std::string> failures;
  if (s.grid_kind == "log_dense") {
    ScanOptions opt;
    opt.threads = cfg.threads;
    spec = spectrum_scan(cfg.drive, s.lo, s.hi, s.points, GridKind::log_dense, opt);
  } else {
    const auto grid = scan_grid(s);
    spec.samples.resize(grid.size());
    std::vector<std::string> errors(grid.size());
    parallel_for(grid.size(), cfg.threads, [&](std::size_t k) {
      try {
        spec.samples[k] = {grid[k], chi_at(cfg.drive, grid[k])};
      } catch (const NumericalError& e) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        spec.samples[k] = {grid[k], {nan, nan}};
        errors[k] = e.what();
      }
    });
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (!errors[k].empty()) failures.push_back("delta_p = " + short_fmt(grid[k]) + ": " + errors[k]);
  }
  Csv csv(csv_header(Task::spectrum));
  for (const auto& x : spec.samples) csv.row(x.delta_p, x.chi.real(), x.chi.imag());
  r.csv = csv.str();

  std::ostringstream os;
  os << "spectrum: " << spec.samples.size() << " samples on [" << s.lo << ", " << s.hi
     << "] gamma (" << s.grid_kind << ")\n";
  if (!cfg.drive.weak_probe()) os << "warning: g_p outside the weak-probe regime\n";
  if (!failures.empty()) {
    r.exit_code = 3;
    os << "failed points: " << failures.size() << "\n";
    for (const auto& f : failures) os << "  " << f << "\n";
  } else if (spec.samples.size() >= 5) {
    const auto f = locate_features(spec);
    os << "peaks: " << f.peaks.size() << "\n";
    for (const auto& p : f.peaks)
      os << "  center " << short_fmt(p.center) << " gamma, Im chi " << short_fmt(p.height)
         << ", fwhm " << short_fmt(p.fwhm) << " gamma\n";
    os << "dips: " << f.dips.size() << "\n";
    for (const auto& d : f.dips)
      os << "  center " << short_fmt(d.center) << " gamma, depth " << short_fmt(d.depth) << "\n";
    if (f.spike) {
      os << "spike: center " << short_fmt(f.spike->center) << " gamma, Im chi "
         << short_fmt(f.spike->height) << ", fwhm " << short_fmt(f.spike->fwhm) << " gamma\n";
    } else {
      os << "spike: none\n";
    }
  }
  r.summary = os.str();
  return r;
}

Result run_semiclassical(const RunConfig& cfg) {
  const double kappa = kappa_of(cfg);
  const auto dps = detunings_in_gamma(cfg);
  CurveOptions opt;
  opt.threads = cfg.threads;
  std::vector<CoolingPoint> pts;
  if (cfg.task == Task::temperature) {
    pts = temperature_curve(cfg.drive, dps, kappa, opt);
  } else {
    pts.resize(dps.size());
    parallel_for(dps.size(), cfg.threads, [&](std::size_t k) {
      auto& p = pts[k];
      p.delta_p_gamma = dps[k];
      p.delta_p_recoil = dps[k] * kappa;
      try {
        if (cfg.task == Task::friction) {
          p.eta = friction(cfg.drive, dps[k]);
          p.status = p.eta > 0.0 ? PointStatus::ok : PointStatus::heating;
        } else {
          p.diffusion = diffusion(cfg.drive, dps[k], kappa, opt.diffusion).scaled;
        }
      } catch (const std::exception& e) {
        p.status = PointStatus::failed;
        p.message = e.what();
        p.eta = p.diffusion = std::numeric_limits<double>::quiet_NaN();
      }
    });
  }

  Result r;
  Csv csv(csv_header(cfg.task));
  int failed = 0;
  for (const auto& p : pts) {
    if (p.status == PointStatus::failed) ++failed;
    const auto status = to_string(p.status);
    switch (cfg.task) {
      case Task::friction: csv.row(p.delta_p_gamma, p.delta_p_recoil, p.eta, status); break;
      case Task::diffusion: csv.row(p.delta_p_gamma, p.delta_p_recoil, p.diffusion, status); break;
      default:
        csv.row(p.delta_p_gamma, p.delta_p_recoil, p.eta, p.diffusion, p.temperature, status);
    }
  }
  r.csv = csv.str();

  std::ostringstream os;
  os << to_string(cfg.task) << ": " << pts.size() << " detunings, kappa = " << short_fmt(kappa)
     << "\n";
  if (cfg.task == Task::temperature) {
    const int best = coldest_point(pts);
    if (best >= 0) {
      const auto& p = pts[best];
      os << "min T = " << short_fmt(p.temperature) << " E_r at delta_p = "
         << short_fmt(p.delta_p_recoil) << " E_r/hbar (" << short_fmt(p.delta_p_gamma)
         << " gamma)\n";
      os << "  eta = " << short_fmt(p.eta) << " E_r/hbar, D = " << short_fmt(p.diffusion)
         << " m E_r omega_r\n";
      os << "[SI] min T" << si_temperature(cfg, p.temperature) << ", delta_p"
         << si_detuning(cfg, p.delta_p_gamma) << "\n";
      r.extra["min_temperature"] = p.temperature;
      r.extra["min_delta_p_gamma"] = p.delta_p_gamma;
    } else {
      os << "no cooling point (every point heating or failed)\n";
    }
  }
  if (failed > 0) {
    r.exit_code = 3;
    os << "failed points: " << failed << "\n";
    for (const auto& p : pts)
      if (p.status == PointStatus::failed)
        os << "  delta_p = " << short_fmt(p.delta_p_gamma) << " gamma: " << p.message << "\n";
  }
  r.summary = os.str();
  return r;
}

Result run_mcwf(const RunConfig& cfg) {
  const auto& m = *cfg.mcwf;
  const double kappa = kappa_of(cfg);
  DriveConfig drive = cfg.drive;
  if (m.delta_p_recoil) drive.delta_p = *m.delta_p_recoil / kappa;
  GridSpec grid;
  grid.halfwidth = m.N;
  grid.kappa = kappa;
  EnsembleOptions opt;
  opt.threads = cfg.threads;
  opt.trajectory.samples = m.samples;
  opt.trajectory.initial_width = m.initial_width;
  opt.trajectory.propagator = m.propagator == "rk4" ? Propagator::rk4 : Propagator::spectral;
  opt.trajectory.record_jumps = false;
  const auto res = ensemble_temperature(drive, grid, m.t_final, m.M, m.base_seed, opt);

  Result r;
  Csv csv(csv_header(Task::mcwf));
  for (std::size_t k = 0; k < res.times.size(); ++k) csv.row(res.times[k], res.p_mean[k], res.p2_mean[k]);
  r.csv = csv.str();
  std::ostringstream os;
  os << "mcwf: M = " << m.M << ", N = " << m.N << ", t_final = " << short_fmt(m.t_final)
     << "/gamma, delta_p = " << short_fmt(drive.delta_p) << " gamma (" << short_fmt(drive.delta_p * kappa)
     << " E_r/hbar)\n";
  os << "trajectories ok: " << (res.trajectories - res.failures) << ", failed: " << res.failures
     << ", jumps: " << res.total_jumps << "\n";
  if (res.failures < res.trajectories) {
    os << "T = " << short_fmt(res.temperature) << " +- " << short_fmt(res.temperature_error)
       << " E_r (plateau from t = " << short_fmt(res.plateau_start) << "/gamma"
       << (res.equilibrated ? "" : ", NOT equilibrated") << ")\n";
    os << "[SI] T" << si_temperature(cfg, res.temperature) << "\n";
  }
  for (const auto& f : res.failure_messages) os << "  " << f << "\n";
  if (res.failures > 0) r.exit_code = 3;
  r.summary = os.str();
  r.extra["seeds"] = res.seeds;
  r.extra["temperature"] = res.temperature;
  r.extra["temperature_error"] = res.temperature_error;
  r.extra["equilibrated"] = res.equilibrated;
  return r;
}

Result run_validate(const RunConfig& cfg) {
  const auto& m = *cfg.mcwf;
  ValidationOptions opt;
  opt.base_seed = m.base_seed;
  opt.threads = cfg.threads;
  opt.propagator = m.propagator == "rk4" ? Propagator::rk4 : Propagator::spectral;
  const auto rep = validate_against_master_equation(cfg.drive, m.t_final, m.M, opt);
  Result r;
  Csv csv(csv_header(Task::validate));
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    for (int i = 0; i < 4; ++i)
      csv.row(rep.times[k], i + 1, rep.master[k][i], rep.mcwf[k][i], rep.sigma[k][i]);
  r.csv = csv.str();
  std::ostringstream os;
  os << "validate: M = " << m.M << " frozen-motion trajectories against the master equation\n";
  os << "max deviation " << short_fmt(rep.max_deviation) << ", max sigma " << short_fmt(rep.max_sigma)
     << ", max deviation/sigma " << short_fmt(rep.max_z) << "\n";
  os << (rep.passed ? "PASSED" : "FAILED") << " (every deviation within 3 sigma)\n";
  if (!rep.passed) r.exit_code = 3;
  r.summary = os.str();
  return r;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file '" + p.string() + "'");
  out << content;
}

}  // namespace

std::string csv_header(Task task) {
  switch (task) {
    case Task::spectrum: return "delta_p_gamma,re_chi,im_chi";
    case Task::friction: return "delta_p_gamma,delta_p_recoil,eta_scaled,status";
    case Task::diffusion: return "delta_p_gamma,delta_p_recoil,d_scaled,status";
    case Task::temperature: return "delta_p_gamma,delta_p_recoil,eta_scaled,d_scaled,t_scaled,status";
    case Task::mcwf: return "time,p_mean,p2_mean";
    case Task::validate: return "time,level,master,mcwf,sigma";
  }
  return {};
}

TaskOutcome run_task(const RunConfig& cfg) {
  Result r;
  try {
    switch (cfg.task) {
      case Task::spectrum: r = run_spectrum(cfg); break;
      case Task::friction:
      case Task::diffusion:
      case Task::temperature: r = run_semiclassical(cfg); break;
      case Task::mcwf: r = run_mcwf(cfg); break;
      case Task::validate: r = run_validate(cfg); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.exit_code = 3;
    r.summary = std::string(to_string(cfg.task)) + " failed: " + e.what() + "\n";
  }
  r.summary += si_block(cfg);

  TaskOutcome out;
  out.exit_code = r.exit_code;
  out.summary = r.summary;
  const std::filesystem::path dir(cfg.output.directory);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  if (cfg.output.csv && !r.csv.empty()) {
    write_file(dir / "data.csv", r.csv);
    out.files.push_back((dir / "data.csv").string());
  }
  if (cfg.output.manifest) {
    nlohmann::json doc = to_json(cfg);
    nlohmann::json meta = {{"version", DARKCOOL_VERSION},
                           {"columns", csv_header(cfg.task)},
                           {"exit_code", r.exit_code},
                           {"ode", {{"rtol", 1e-8}, {"atol", 1e-12}}},
                           {"diffusion", {{"grid_halfwidth", DiffusionOptions{}.grid_halfwidth},
                                          {"fit_window", {DiffusionOptions{}.fit_start, DiffusionOptions{}.fit_end}},
                                          {"rtol", DiffusionOptions{}.rtol},
                                          {"atol", DiffusionOptions{}.atol}}},
                           {"friction", {{"rtol", 1e-4}, {"max_refinements", 20}}}};
    if (cfg.species) meta["kappa"] = linewidth_in_recoils(*cfg.species);
    for (const auto& [k, v] : r.extra.items()) meta[k] = v;
    doc["manifest"] = meta;
    write_file(dir / "manifest.json", doc.dump(2) + "\n");
    out.files.push_back((dir / "manifest.json").string());
  }
  if (cfg.output.summary) {
    write_file(dir / "summary.txt", r.summary);
    out.files.push_back((dir / "summary.txt").string());
  }
  return out;
}

}  // namespace darkcool
