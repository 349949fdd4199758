// Acceptance criteria 1-8. Usage: darkcool_acceptance [N ...]; no argument runs all.
// Prints one PASS/FAIL line per criterion; exit status is nonzero if any fails.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "darkcool/atom_model.hpp"
#include "darkcool/error.hpp"
#include "darkcool/lindblad.hpp"
#include "darkcool/mcwf.hpp"
#include "darkcool/semiclassical.hpp"
#include "darkcool/spectroscopy.hpp"

using namespace darkcool;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Tolerances
constexpr double kPeakTol = 0.15;        // criterion 1: peaks at +-g42 within 15%
constexpr double kDipWindow = 0.05;      // gamma
constexpr double kSpikeFwhm = 0.1;       // criterion 2
constexpr double kSpikeCenter = 1e-3;
constexpr double kTminLo = 4.5, kTminHi = 9.0;  // criterion 3, E_r
constexpr double kDpTarget = -460.0, kDpTol = 0.30;
constexpr double kDRatio = 1e-3;         // criterion 4
constexpr double kMcwfTarget = 4e-4, kMcwfFactor = 3.0;  // criterion 5
constexpr double kSmokeCooling = 10.0;
constexpr double kCrossover = 0.30;      // criterion 6
constexpr double kHgNanoK = 0.3, kRbNanoK = 0.95;  // criterion 7, order of magnitude

const double kHgKappa = linewidth_in_recoils(species::mercury());

struct Optimum {
  CoolingPoint point;
  std::vector<CoolingPoint> curve;
};

// Coarse scan over detunings in E_r/hbar (linear or geometric), then a finer
// pass around the coldest point.
Optimum find_optimum(const DriveConfig& cfg, double kappa, double lo, double hi, int points,
                     bool geometric) {
  auto grid = [&](double a, double b, int n) {
    std::vector<double> dp(n);
    for (int k = 0; k < n; ++k) {
      const double f = static_cast<double>(k) / (n - 1);
      const double x = geometric ? -std::exp(std::log(-a) + f * (std::log(-b) - std::log(-a)))
                                 : a + f * (b - a);
      dp[k] = x / kappa;
    }
    return dp;
  };
  Optimum o;
  const auto coarse_dp = grid(lo, hi, points);
  auto coarse = temperature_curve(cfg, coarse_dp, kappa);
  const int i = coldest_point(coarse);
  if (i < 0) throw NumericalError("no cooling point in scan");
  const int a = std::max(i - 1, 0), b = std::min(i + 1, points - 1);
  const auto fine_dp = grid(coarse[a].delta_p_recoil, coarse[b].delta_p_recoil, 9);
  auto fine = temperature_curve(cfg, fine_dp, kappa);
  o.curve = coarse;
  o.curve.insert(o.curve.end(), fine.begin(), fine.end());
  const int j = coldest_point(fine);
  o.point = (j >= 0 && fine[j].temperature < coarse[i].temperature) ? fine[j] : coarse[i];
  return o;
}

Optimum no_ddr_optimum() { return find_optimum(presets::fig3_1(), kHgKappa, -800.0, -100.0, 36, false); }

Optimum ddr_optimum(double kappa) {
  return find_optimum(presets::fig3(), kappa, -0.1, -1e-4, 31, true);
}

Verdict criterion1() {
  const auto cfg = presets::fig3_1();
  const auto s = spectrum_scan(cfg, -8.0, 8.0, 1601, GridKind::uniform);
  const auto f = locate_features(s);
  Verdict v;
  std::ostringstream os;
  os << f.peaks.size() << " maxima";
  bool ok = f.peaks.size() == 2 && !f.spike;
  if (f.peaks.size() == 2) {
    for (const auto& p : f.peaks) os << fmt(" at %+.4f", p.center);
    ok = ok && std::abs(f.peaks[0].center + cfg.g42) <= kPeakTol * cfg.g42 &&
         std::abs(f.peaks[1].center - cfg.g42) <= kPeakTol * cfg.g42;
  }
  bool dip = false;
  for (const auto& d : f.dips)
    if (std::abs(d.center) < kDipWindow) {
      dip = true;
      os << fmt("; minimum at %+.2e gamma", d.center);
    }
  v.pass = ok && dip;
  os << fmt(" (targets +-%.2f +-15%%, minimum |dp| < %.2f)", cfg.g42, kDipWindow);
  v.detail = os.str();
  return v;
}

Verdict criterion2() {
  const auto cfg = presets::fig3();
  const auto s = spectrum_scan(cfg, -8.0, 8.0, 2001, GridKind::log_dense);
  const auto f = locate_features(s);
  Verdict v;
  std::ostringstream os;
  bool ok = f.peaks.size() == 2 && f.spike.has_value();
  if (f.peaks.size() == 2)
    ok = ok && std::abs(f.peaks[0].center + cfg.g42) <= kPeakTol * cfg.g42 &&
         std::abs(f.peaks[1].center - cfg.g42) <= kPeakTol * cfg.g42;
  os << f.peaks.size() << " doublet maxima";
  if (f.spike) {
    os << fmt("; spike at %+.2e gamma, FWHM %.2e gamma, height %.3g", f.spike->center,
              f.spike->fwhm, f.spike->height);
    ok = ok && f.spike->fwhm < kSpikeFwhm && std::abs(f.spike->center) < kSpikeCenter;
  } else {
    os << "; no spike";
  }
  os << fmt(" (targets FWHM < %.1f, |center| < %.0e)", kSpikeFwhm, kSpikeCenter);
  v.pass = ok;
  v.detail = os.str();
  return v;
}

Verdict criterion3() {
  const auto o = no_ddr_optimum();
  const auto& p = o.point;
  Verdict v;
  const bool t_ok = p.temperature >= kTminLo && p.temperature <= kTminHi;
  const bool dp_ok = std::abs(p.delta_p_recoil - kDpTarget) <= kDpTol * std::abs(kDpTarget);
  v.pass = t_ok && dp_ok;
  v.detail = fmt("min T = %.3g E_r at dp = %.1f E_r/hbar (%.3f gamma); targets T in [%.1f, %.0f], "
                 "dp in %.0f +-30%%; T %s, dp %s",
                 p.temperature, p.delta_p_recoil, p.delta_p_gamma, kTminLo, kTminHi, kDpTarget,
                 t_ok ? "ok" : "out of range", dp_ok ? "ok" : "out of range");
  return v;
}

Verdict criterion4() {
  const auto a = no_ddr_optimum().point;
  const auto b = ddr_optimum(kHgKappa).point;
  const double ratio = b.diffusion / a.diffusion;
  Verdict v;
  v.pass = ratio <= kDRatio;
  v.detail = fmt("D(no DDR) = %.3g at %.1f E_r/hbar, D(DDR) = %.3g at %.3g E_r/hbar, ratio %.3g "
                 "(target <= %.0e)",
                 a.diffusion, a.delta_p_recoil, b.diffusion, b.delta_p_recoil, ratio, kDRatio);
  return v;
}

GridSpec hg_grid() {
  GridSpec g;
  g.halfwidth = 50;
  g.kappa = kHgKappa;
  return g;
}

// Means of <n^2> over `blocks` equal time windows.
std::vector<double> block_means(const EnsembleResult& r, int blocks) {
  std::vector<double> out;
  const std::size_t n = r.p2_mean.size();
  for (int b = 0; b < blocks; ++b) {
    const std::size_t i0 = n * b / blocks, i1 = n * (b + 1) / blocks;
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += r.p2_mean[i];
    out.push_back(s / static_cast<double>(i1 - i0));
  }
  return out;
}

Verdict criterion5() {
  const auto cfg = presets::fig3().with_detuning(-0.001 / kHgKappa);
  const auto g = hg_grid();
  std::ostringstream os;

  // Smoke variant: M = 16, shortened run.
  const auto smoke = ensemble_temperature(cfg, g, 5e9, 16, 1);
  bool smoke_ok = smoke.failures < 16 && !smoke.p2_mean.empty();
  double initial = 0.0, last = 0.0;
  if (smoke_ok) {
    const auto m = block_means(smoke, 10);
    initial = smoke.p2_mean.front();
    last = m.back();
    for (std::size_t k = 1; k < m.size(); ++k) smoke_ok = smoke_ok && m[k] <= m[k - 1];
    smoke_ok = smoke_ok && last <= initial / kSmokeCooling;
  }
  os << fmt("smoke M=16 t=5e9: <n^2> %.3g -> %.3g (%d failed) %s; ", initial, last,
            smoke.failures, smoke_ok ? "cools" : "does not cool 10x monotonically");

  const auto full = ensemble_temperature(cfg, g, 2e10, 100, 1);
  const bool have = full.failures < full.trajectories;
  const double T = full.temperature;
  const bool full_ok = have && T <= kMcwfTarget * kMcwfFactor && T >= kMcwfTarget / kMcwfFactor;
  if (have)
    os << fmt("M=100 t=2e10: T = %.3g +- %.2g E_r (%d of 100 failed at the grid edge)", T,
              full.temperature_error, full.failures);
  else
    os << "M=100 t=2e10: every trajectory left the grid";
  os << fmt(" (target %.0e E_r within a factor %.0f)", kMcwfTarget, kMcwfFactor);
  Verdict v;
  v.pass = smoke_ok && full_ok;
  v.detail = os.str();
  return v;
}

Verdict criterion6() {
  const auto sc = no_ddr_optimum().point;
  const auto cfg = presets::fig3_1().with_detuning(sc.delta_p_gamma);
  const auto g = hg_grid();
  const auto r = ensemble_temperature(cfg, g, 2e10, 100, 1);
  EnsembleOptions wide;
  wide.trajectory.initial_width = 10.0;
  const auto w = ensemble_temperature(cfg, g, 2e10, 32, 1001, wide);
  const double rel = std::abs(r.temperature - sc.temperature) / sc.temperature;
  Verdict v;
  v.pass = r.failures == 0 && rel <= kCrossover;
  v.detail = fmt("dp = %.1f E_r/hbar: semiclassical T = %.3g E_r, MCWF (M=100) T = %.3g +- %.2g E_r, "
                 "difference %.0f%% (target <= 30%%); width-10 start (M=32) T = %.3g +- %.2g E_r",
                 sc.delta_p_recoil, sc.temperature, r.temperature, r.temperature_error,
                 100.0 * rel, w.temperature, w.temperature_error);
  return v;
}

Verdict criterion7() {
  const auto hg = species::mercury();
  const auto rb = species::rubidium87();
  const auto th = ddr_optimum(linewidth_in_recoils(hg)).point;
  const auto tr = ddr_optimum(linewidth_in_recoils(rb)).point;
  const double nk_hg = 1e9 * from_recoil_units(th.temperature, QuantityKind::temperature, recoil_scales(hg));
  const double nk_rb = 1e9 * from_recoil_units(tr.temperature, QuantityKind::temperature, recoil_scales(rb));
  const double nk_ref =
      1e9 * from_recoil_units(kMcwfTarget, QuantityKind::temperature, recoil_scales(hg));
  auto within = [](double x, double target) { return x >= target / 10.0 && x <= target * 10.0; };
  Verdict v;
  v.pass = within(nk_hg, kHgNanoK) && within(nk_rb, kRbNanoK) && within(nk_ref, kHgNanoK);
  v.detail = fmt("DDR semiclassical minima: Hg %.3g E_r = %.3g nK (target %.1f), Rb87 %.3g E_r = "
                 "%.3g nK (target %.2f); 4e-4 E_r for Hg = %.3g nK",
                 th.temperature, nk_hg, kHgNanoK, tr.temperature, nk_rb, kRbNanoK, nk_ref);
  return v;
}

// Property suites, reduced to one representative check each.
Verdict criterion8() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };

  for (const auto& cfg : {presets::fig3_1(), presets::fig3()}) {
    const auto L = build_liouvillian(cfg.with_detuning(-0.7), 1.3);
    const auto rho = evolve(DensityMatrix::pure(kLevel3), L, 30.0);
    const auto d = rho.diagnostics();
    expect(d.hermiticity_error < 1e-10 && d.trace_error < 1e-10 && d.min_eigenvalue > -1e-10,
           "lindblad trace/hermiticity/positivity");
    const auto ss = steady_state(L);
    expect(L.apply(ss.matrix()).cwiseAbs().maxCoeff() < 1e-12, "lindblad steady state");
  }

  for (const auto& cfg : {presets::fig3_1(), presets::fig3()})
    for (double dp : {1e-5, 0.4, 3.9}) {
      const auto a = chi_at(cfg, dp), b = chi_at(cfg, -dp);
      expect(std::abs(a.imag() - b.imag()) <= 1e-8 * std::abs(a.imag()), "spectral parity");
      expect(std::abs(friction(cfg, dp) + friction(cfg, -dp)) <= 1e-6 * std::abs(friction(cfg, dp)),
             "friction parity");
    }
  for (int k = 0; k <= 32; ++k) {
    const double dp = -8.0 + 0.5 * k;
    const auto a = chi_at(presets::fig3_1(), dp), b = three_level_chi(presets::fig3_1(), dp);
    expect(std::abs(a - b) <= 1e-2 * std::abs(b), "three-level oracle");
  }

  {
    DriveConfig c;
    c.g_p = 1e-3;
    c.gamma23 = 1.0;
    c.gamma13 = 1.0;
    c.gamma41 = 1.0;
    c.delta_p = -0.5;
    const double R = 2.0 * c.g_p * c.g_p / (0.25 + 0.25);
    expect(std::abs(diffusion(c, -0.5, 1e4).rate / R - 1.0) <= 0.05, "two-level diffusion oracle");
  }

  {
    auto cfg = presets::fig3_1().with_detuning(-2.0);
    cfg.g_p = 0.05;
    GridSpec g;
    g.halfwidth = 30;
    g.kappa = 80.0;
    TrajectoryOptions o;
    o.initial_width = 1.0;
    const auto a = run_trajectory(cfg, g, 1000.0, 11, o);
    const auto b = run_trajectory(cfg, g, 1000.0, 11, o);
    expect(a.p2_mean == b.p2_mean && a.jump_count == b.jump_count, "mcwf seed determinism");
    bool recoil = a.jump_count > 0;
    for (const auto& j : a.jumps) recoil = recoil && std::abs(j.sign) == 1;
    expect(recoil, "mcwf recoil bookkeeping");

    const EffectiveHamiltonian h(presets::fig3_1(), g);
    auto s = MotionalState::gaussian(g, kLevel4, 1.0);
    bool mono = true;
    for (int k = 0; k < 100; ++k) {
      const double before = s.norm2();
      step(s, h, h.suggested_dt());
      mono = mono && s.norm2() <= before;
    }
    expect(mono, "mcwf norm monotonicity");
  }

  for (const auto& cfg : {presets::fig3_1(), presets::fig3()})
    expect(validate_against_master_equation(cfg, 20.0, 500).passed, "mcwf unraveling equivalence");

  Verdict v;
  v.pass = failed.empty();
  if (v.pass) {
    v.detail = "lindblad, spectroscopy, semiclassical and mcwf property checks all hold";
  } else {
    v.detail = "failed:";
    for (const auto& f : failed) v.detail += " [" + f + "]";
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  set_warning_sink([](const std::string&) {});
  const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3,
                                                       criterion4, criterion5, criterion6,
                                                       criterion7, criterion8};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 8; ++i) which.push_back(i);

  int failures = 0;
  for (int n : which) {
    if (n < 1 || n > 8) {
      std::fprintf(stderr, "unknown criterion %d\n", n);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[n - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1f s]\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
