#pragma once

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "darkcool/atom_model.hpp"

namespace darkcool {

/// chi = <3|rho_ss|2> / g_p, so that Im chi > 0 is absorption. Units 1/gamma.
struct SusceptibilitySample {
  double delta_p;
  std::complex<double> chi;
};

enum class GridKind { uniform, log_dense };

GridKind parse_grid_kind(std::string_view name);
std::string_view to_string(GridKind kind);

struct Spectrum {
  std::vector<SusceptibilitySample> samples;
  GridKind grid_kind = GridKind::uniform;
};

struct Peak {
  double center;
  double height;
  double fwhm;
};

struct Dip {
  double center;
  double depth;  // below the lower of the two neighbouring peaks
};

struct SpectralFeatures {
  std::vector<Peak> peaks;
  std::vector<Dip> dips;
  std::optional<Peak> spike;
};

struct FeatureOptions {
  double noise_floor = 1e-3;  // relative to max Im chi
  double spike_width = 0.2;   // gamma
};

/// Weak-probe susceptibility at probe_factor 1. Warns when the weak-probe
/// condition does not hold.
SusceptibilitySample susceptibility(const DriveConfig& cfg, double delta_p);

/// Same value without validity warnings; used inside scans.
std::complex<double> chi_at(const DriveConfig& cfg, double delta_p);

/// Closed-form ladder-EIT susceptibility for g41 = 0 with
/// Gamma23 = gamma23 and Gamma4 = gamma41 + gamma42.
std::complex<double> three_level_chi(const DriveConfig& cfg, double delta_p);

struct ScanOptions {
  unsigned threads = 0;  // 0: hardware concurrency
  FeatureOptions features{};
};

/// Uniform: `points` equally spaced samples including both endpoints.
/// log_dense: a 1001-point coarse pass locates the narrowest feature, which is
/// zoomed until its FWHM spans >= 20 samples; half the points are then placed
/// within 10 widths of it and the rest geometrically outside.
Spectrum spectrum_scan(const DriveConfig& cfg, double lo, double hi, int points, GridKind kind,
                       const ScanOptions& options = {});

/// Coherence of an atom moving with velocity `velocity` (units of v_r) at
/// phase kx in the standing wave, to first order in g_p:
///   g_p [e^{-ikx} chi(dp - kv) + e^{ikx} chi(dp + kv)],  kv = 2 velocity / kappa.
std::complex<double> moving_coherence(const DriveConfig& cfg, double delta_p, double velocity,
                                      double x_phase, double kappa);

SpectralFeatures locate_features(const Spectrum& s, const FeatureOptions& options = {});

}  // namespace darkcool
