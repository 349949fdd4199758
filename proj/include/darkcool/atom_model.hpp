#pragma once

#include <string>
#include <string_view>

namespace darkcool {

namespace constants {
// CODATA 2018 (h and k_B exact by SI definition).
inline constexpr double planck = 6.62607015e-34;
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double hbar = planck / (2.0 * pi);
inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double atomic_mass_unit = 1.66053906660e-27;
}  // namespace constants

/// An atomic species: mass, probe wavelength and the reference linewidth
/// gamma that all drive parameters are measured in.
class AtomSpecies {
 public:
  AtomSpecies(std::string name, double mass_kg, double lambda_probe_m, double gamma_rad_s);

  static AtomSpecies from_amu(std::string name, double mass_amu, double lambda_probe_m,
                              double gamma_rad_s);

  const std::string& name() const noexcept { return name_; }
  double mass() const noexcept { return mass_; }
  double lambda_probe() const noexcept { return lambda_; }
  double gamma() const noexcept { return gamma_; }
  double wave_number() const noexcept { return 2.0 * constants::pi / lambda_; }
  double hbar_k() const noexcept { return constants::planck / lambda_; }

 private:
  std::string name_;
  double mass_;
  double lambda_;
  double gamma_;
};

namespace species {
/// Hg, 253.7 nm intercombination line; gamma = 1/125 ns.
AtomSpecies mercury();
/// 87Rb D2 line; gamma = 2 pi x 6.0666 MHz.
AtomSpecies rubidium87();
/// Looks up "hg" / "mercury" / "rb87". Throws ConfigError for unknown names.
AtomSpecies by_name(std::string_view name);
}  // namespace species

struct RecoilScales {
  double E_r;      // J
  double hbar_k;   // kg m/s
  double omega_r;  // rad/s, E_r / hbar
  double v_r;      // m/s, hbar_k / m

  double mass() const noexcept { return hbar_k / v_r; }
};

RecoilScales recoil_scales(const AtomSpecies& species);

/// gamma / omega_r: the linewidth measured in recoil frequencies. A detuning
/// of x gamma is x * kappa in units of E_r/hbar, and the kinetic energy of
/// momentum n hbar k is n^2 / kappa in units of hbar gamma.
double linewidth_in_recoils(const AtomSpecies& species);

enum class QuantityKind { detuning, friction, diffusion, temperature };

QuantityKind parse_quantity_kind(std::string_view name);
std::string_view to_string(QuantityKind kind);

/// SI value -> recoil units. Detuning and friction in rad/s and 1/s are divided
/// by E_r/hbar; diffusion (kg^2 m^2 s^-3) by m E_r (E_r/hbar); temperature (K)
/// by E_r/k_B.
double to_recoil_units(double value, QuantityKind kind, const RecoilScales& scales);
double from_recoil_units(double scaled, QuantityKind kind, const RecoilScales& scales);

/// Rabi frequencies, detunings and decay rates of the four-level scheme, all in
/// units of gamma. Levels: |3> probe ground, |2> probe excited, |4> upper
/// level, |1> second ground level reached via gamma41.
struct DriveConfig {
  double g_p = 0.0;
  double g41 = 0.0;
  double g42 = 0.0;
  double delta_p = 0.0;
  double delta41 = 0.0;
  double delta42 = 0.0;
  double gamma41 = 0.0;
  double gamma42 = 0.0;
  double gamma23 = 0.0;
  double gamma13 = 0.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// g_p <= 1e-2 * max(gamma23, g42).
  bool weak_probe() const noexcept;
  DriveConfig with_detuning(double dp) const {
    DriveConfig c = *this;
    c.delta_p = dp;
    return c;
  }
};

namespace presets {
/// Autler-Townes regime: gamma41 = 1, gamma23 = 0.14, gamma42 = 0.79,
/// gamma13 = 0.01, g_p = 1e-4, g41 = 0, g42 = 4.
DriveConfig fig3_1();
/// Interacting dark states: fig3_1 with g41 = 0.04 and gamma13 = 0.
DriveConfig fig3();
}  // namespace presets

}  // namespace darkcool
