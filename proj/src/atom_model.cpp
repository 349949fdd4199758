#include "darkcool/atom_model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <utility>

#include "darkcool/error.hpp"

namespace darkcool {

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink;
}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "darkcool: warning: " << message << '\n';
  }
}

AtomSpecies::AtomSpecies(std::string name, double mass_kg, double lambda_probe_m,
                         double gamma_rad_s)
    : name_(std::move(name)), mass_(mass_kg), lambda_(lambda_probe_m), gamma_(gamma_rad_s) {
  if (!(mass_ > 0.0) || !std::isfinite(mass_)) throw ConfigError("species.mass must be > 0");
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
    throw ConfigError("species.lambda must be > 0");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw ConfigError("species.gamma must be > 0");
}

AtomSpecies AtomSpecies::from_amu(std::string name, double mass_amu, double lambda_probe_m,
                                  double gamma_rad_s) {
  return AtomSpecies(std::move(name), mass_amu * constants::atomic_mass_unit, lambda_probe_m,
                     gamma_rad_s);
}

namespace species {
AtomSpecies mercury() { return AtomSpecies::from_amu("hg", 200.59, 253.7e-9, 1.0 / 125e-9); }

AtomSpecies rubidium87() {
  return AtomSpecies::from_amu("rb87", 86.909, 780.24e-9, 2.0 * constants::pi * 6.0666e6);
}

AtomSpecies by_name(std::string_view name) {
  if (name == "hg" || name == "mercury") return mercury();
  if (name == "rb87" || name == "rubidium87") return rubidium87();
  throw ConfigError("unknown species preset '" + std::string(name) + "'");
}
}  // namespace species

RecoilScales recoil_scales(const AtomSpecies& species) {
  RecoilScales s{};
  s.hbar_k = species.hbar_k();
  s.E_r = s.hbar_k * s.hbar_k / (2.0 * species.mass());
  s.omega_r = s.E_r / constants::hbar;
  s.v_r = s.hbar_k / species.mass();
  return s;
}

double linewidth_in_recoils(const AtomSpecies& species) {
  return species.gamma() / recoil_scales(species).omega_r;
}

QuantityKind parse_quantity_kind(std::string_view name) {
  if (name == "detuning") return QuantityKind::detuning;
  if (name == "friction") return QuantityKind::friction;
  if (name == "diffusion") return QuantityKind::diffusion;
  if (name == "temperature") return QuantityKind::temperature;
  throw ConfigError("unknown quantity kind '" + std::string(name) + "'");
}

std::string_view to_string(QuantityKind kind) {
  switch (kind) {
    case QuantityKind::detuning: return "detuning";
    case QuantityKind::friction: return "friction";
    case QuantityKind::diffusion: return "diffusion";
    case QuantityKind::temperature: return "temperature";
  }
  return "?";
}

namespace {
double unit_of(QuantityKind kind, const RecoilScales& s) {
  switch (kind) {
    case QuantityKind::detuning:
    case QuantityKind::friction: return s.omega_r;
    case QuantityKind::diffusion: return s.mass() * s.E_r * s.omega_r;
    case QuantityKind::temperature: return s.E_r / constants::boltzmann;
  }
  throw ConfigError("unsupported quantity kind");
}
}  // namespace

double to_recoil_units(double value, QuantityKind kind, const RecoilScales& scales) {
  return value / unit_of(kind, scales);
}

double from_recoil_units(double scaled, QuantityKind kind, const RecoilScales& scales) {
  return scaled * unit_of(kind, scales);
}

void DriveConfig::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"drive.g_p", g_p},         {"drive.g41", g41},         {"drive.g42", g42},
      {"drive.delta_p", delta_p}, {"drive.delta41", delta41}, {"drive.delta42", delta42},
      {"drive.gamma41", gamma41}, {"drive.gamma42", gamma42}, {"drive.gamma23", gamma23},
      {"drive.gamma13", gamma13}};
  for (const auto& [key, value] : fields) {
    if (!std::isfinite(value)) throw ConfigError(std::string(key) + " must be finite");
  }
  // Detunings may have either sign; everything else is a magnitude.
  for (const auto& [key, value] : fields) {
    const std::string_view k(key);
    if (k.find("delta") != std::string_view::npos) continue;
    if (value < 0.0) throw ConfigError(std::string(key) + " must be >= 0");
  }
}

bool DriveConfig::weak_probe() const noexcept {
  return g_p <= 1e-2 * std::max(gamma23, g42);
}

namespace presets {
DriveConfig fig3_1() {
  DriveConfig c;
  c.gamma41 = 1.0;
  c.gamma23 = 0.14;
  c.gamma42 = 0.79;
  c.gamma13 = 0.01;
  c.g_p = 1e-4;
  c.g41 = 0.0;
  c.g42 = 4.0;
  return c;
}

DriveConfig fig3() {
  DriveConfig c = fig3_1();
  c.g41 = 0.04;
  c.gamma13 = 0.0;
  return c;
}
}  // namespace presets

}  // namespace darkcool
