#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "darkcool/atom_model.hpp"

namespace darkcool {

enum class PointStatus { ok, heating, failed };
std::string_view to_string(PointStatus status);

/// One point of a cooling curve. eta, diffusion and temperature are in recoil
/// units (E_r/hbar, m E_r omega_r, E_r/k_B). For heating points temperature is +inf.
struct CoolingPoint {
  double delta_p_gamma = 0.0;
  double delta_p_recoil = 0.0;
  double eta = 0.0;
  double diffusion = 0.0;
  double temperature = 0.0;
  PointStatus status = PointStatus::ok;
  std::string message;
};

struct ForceSample {
  double x_phase;
  double velocity;  // v_r
  double force;     // hbar k gamma
};

/// Linear-response radiation force in the standing wave:
///   F = 4 g_p^2 sin(2kx) Re chi - 4 kv g_p^2 [1 - cos(2kx)] d(Im chi)/d(delta_p)
/// with kv = 2 velocity / kappa (gamma units).
ForceSample force(const DriveConfig& cfg, double delta_p, double x_phase, double velocity,
                  double kappa);

struct Derivative {
  double value;
  double step;          // final step h
  double previous;      // estimate at step 2h
  int refinements;
};

/// d(Im chi)/d(delta_p) by central differences: h starts at 1e-2 |chi / chi'|
/// and is halved until two successive estimates agree to `rtol`.
Derivative im_chi_slope(const DriveConfig& cfg, double delta_p, double rtol = 1e-4,
                        int max_refinements = 20);

/// Wavelength-averaged friction coefficient 8 g_p^2 d(Im chi)/d(delta_p), in units
/// of E_r/hbar (independent of the species).
double friction(const DriveConfig& cfg, double delta_p);

struct DiffusionOptions {
  int grid_halfwidth = 6;
  double fit_start = 5.0;  // 1/gamma
  double fit_end = 50.0;
  double sample_dt = 0.5;
  double rtol = 1e-10;
  double atol = 1e-16;
  double min_r_squared = 0.99;
  double max_boundary = 1e-6;
};

struct DiffusionResult {
  double scaled = 0.0;        // m E_r omega_r units
  double rate = 0.0;          // half the slope of <n^2> per 1/gamma
  double r_squared = 1.0;
  double boundary_occupation = 0.0;
};

/// Momentum diffusion from the growth of <p^2>: the internal steady state
/// times |p = 0> is evolved under the full master equation on the momentum
/// grid, with +-hbar k recoils in the probe coupling and in every decay
/// channel (probability 1/2 each), and <p^2> is fitted linearly on
/// [fit_start, fit_end].
DiffusionResult diffusion(const DriveConfig& cfg, double delta_p, double kappa,
                          const DiffusionOptions& options = {});

struct CurveOptions {
  unsigned threads = 0;
  DiffusionOptions diffusion{};
};

/// T = D / eta at each detuning (in gamma). Failures and heating points are
/// recorded per point; the scan never aborts.
std::vector<CoolingPoint> temperature_curve(const DriveConfig& cfg,
                                            std::span<const double> detunings, double kappa,
                                            const CurveOptions& options = {});

/// Index of the coldest ok point, or -1.
int coldest_point(const std::vector<CoolingPoint>& curve);

}  // namespace darkcool
