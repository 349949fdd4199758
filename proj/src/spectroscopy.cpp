#include "darkcool/spectroscopy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "darkcool/error.hpp"
#include "darkcool/lindblad.hpp"
#include "darkcool/parallel.hpp"

namespace darkcool {

GridKind parse_grid_kind(std::string_view name) {
  if (name == "uniform") return GridKind::uniform;
  if (name == "log_dense" || name == "log-dense-near-zero" || name == "log-dense")
    return GridKind::log_dense;
  throw ConfigError("unknown grid_kind '" + std::string(name) + "'");
}

std::string_view to_string(GridKind kind) {
  return kind == GridKind::uniform ? "uniform" : "log_dense";
}

std::complex<double> chi_at(const DriveConfig& cfg, double delta_p) {
  if (!(cfg.g_p > 0.0)) throw DomainError("susceptibility requires g_p > 0");
  const auto rho = steady_state(build_liouvillian(cfg.with_detuning(delta_p), 1.0));
  return rho.element(kLevel3, kLevel2) / cfg.g_p;
}

SusceptibilitySample susceptibility(const DriveConfig& cfg, double delta_p) {
  if (!cfg.weak_probe()) {
    std::ostringstream os;
    os << "g_p = " << cfg.g_p << " exceeds the weak-probe bound 1e-2 * max(gamma23, g42)";
    warn(os.str());
  }
  return {delta_p, chi_at(cfg, delta_p)};
}

std::complex<double> three_level_chi(const DriveConfig& cfg, double delta_p) {
  using C = std::complex<double>;
  const C i{0.0, 1.0};
  const double gamma4 = cfg.gamma41 + cfg.gamma42;
  return 1.0 / ((delta_p - i * cfg.gamma23 / 2.0) -
                cfg.g42 * cfg.g42 / (delta_p - i * gamma4 / 2.0));
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) x[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  if (n > 1) x.back() = hi;
  return x;
}

Spectrum evaluate(const DriveConfig& cfg, const std::vector<double>& grid, GridKind kind,
                  unsigned threads) {
  Spectrum s;
  s.grid_kind = kind;
  s.samples.resize(grid.size());
  parallel_for(grid.size(), threads,
               [&](std::size_t k) { s.samples[k] = {grid[k], chi_at(cfg, grid[k])}; });
  return s;
}

void sort_unique(std::vector<double>& x) {
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
}

// Geometric points at distances [d0, d1] from c on one side, excluding d0.
void geometric_side(std::vector<double>& out, double c, double d0, double d1, int n, int sign) {
  if (n <= 0 || d1 <= d0) return;
  const double r = std::log(d1 / d0);
  for (int k = 1; k <= n; ++k) out.push_back(c + sign * d0 * std::exp(r * k / n));
}

const Peak* nearest_peak(const SpectralFeatures& f, double c) {
  const Peak* best = f.spike ? &*f.spike : nullptr;
  for (const auto& p : f.peaks)
    if (!best || std::abs(p.center - c) < std::abs(best->center - c)) best = &p;
  return best;
}

}  // namespace

Spectrum spectrum_scan(const DriveConfig& cfg, double lo, double hi, int points, GridKind kind,
                       const ScanOptions& options) {
  if (!(lo < hi)) throw DomainError("spectrum_scan requires lo < hi");
  if (points < 2) throw DomainError("spectrum_scan requires at least 2 points");
  cfg.validate();
  if (!cfg.weak_probe()) warn("spectrum_scan: probe is outside the weak-probe regime");
  if (kind == GridKind::uniform || points < 16)
    return evaluate(cfg, linspace(lo, hi, points), kind, options.threads);

  std::vector<double> coarse = linspace(lo, hi, 1001);
  if (lo < 0.0 && hi > 0.0) coarse.push_back(0.0);
  sort_unique(coarse);
  const Spectrum first = evaluate(cfg, coarse, kind, options.threads);
  const auto features = locate_features(first, options.features);

  double center = std::clamp(0.0, lo, hi);
  double width = (hi - lo) / 1000.0;
  const Peak* target = features.spike ? &*features.spike : nullptr;
  if (!target) {
    for (const auto& p : features.peaks)
      if (!target || p.fwhm < target->fwhm) target = &p;
  }
  if (target) {
    center = target->center;
    width = std::max(target->fwhm, 1e-300);
    for (int iter = 0; iter < 40; ++iter) {
      const double a = std::max(lo, center - 5.0 * width);
      const double b = std::min(hi, center + 5.0 * width);
      if (!(b > a)) break;
      auto zoom_grid = linspace(a, b, 401);
      const double spacing = (b - a) / 400.0;
      const auto zoom = evaluate(cfg, zoom_grid, kind, options.threads);
      const Peak* p = nearest_peak(locate_features(zoom, options.features), center);
      if (!p) break;
      center = p->center;
      const bool resolved = p->fwhm >= 20.0 * spacing;
      width = p->fwhm;
      if (resolved) break;
    }
  }

  const int n_dense = points / 2;
  const double a = std::max(lo, center - 10.0 * width);
  const double b = std::min(hi, center + 10.0 * width);
  std::vector<double> grid = linspace(a, b, std::max(n_dense, 2));
  const double left = a - lo, right = hi - b;
  const int n_out = points - static_cast<int>(grid.size());
  const double d0 = std::max(10.0 * width, 1e-300);
  const double wl = left > 0.0 ? std::log1p(left / d0) : 0.0;
  const double wr = right > 0.0 ? std::log1p(right / d0) : 0.0;
  const int n_left = wl + wr > 0.0 ? static_cast<int>(std::lround(n_out * wl / (wl + wr))) : 0;
  geometric_side(grid, center, center - a, center - lo, n_left, -1);
  geometric_side(grid, center, b - center, hi - center, n_out - n_left, +1);
  grid.push_back(lo);
  grid.push_back(hi);
  sort_unique(grid);
  return evaluate(cfg, grid, kind, options.threads);
}

std::complex<double> moving_coherence(const DriveConfig& cfg, double delta_p, double velocity,
                                      double x_phase, double kappa) {
  if (!(kappa > 0.0)) throw DomainError("moving_coherence requires kappa > 0");
  using C = std::complex<double>;
  const C i{0.0, 1.0};
  const double kv = 2.0 * velocity / kappa;
  const C chi0 = chi_at(cfg, delta_p);
  const double h = 1e-7 * std::max(1.0, std::abs(delta_p));
  const C slope = (chi_at(cfg, delta_p + h) - chi_at(cfg, delta_p - h)) / (2.0 * h);
  const double local_width = std::abs(slope) > 0.0 ? std::abs(chi0) / std::abs(slope) : 1.0;
  if (std::abs(kv) > local_width) {
    std::ostringstream os;
    os << "moving_coherence: Doppler shift " << kv << " exceeds local feature width "
       << local_width << " at delta_p = " << delta_p;
    warn(os.str());
  }
  return cfg.g_p * (std::exp(-i * x_phase) * chi_at(cfg, delta_p - kv) +
                    std::exp(i * x_phase) * chi_at(cfg, delta_p + kv));
}

SpectralFeatures locate_features(const Spectrum& s, const FeatureOptions& options) {
  const auto& smp = s.samples;
  const std::size_t n = smp.size();
  if (n < 5) throw DomainError("locate_features needs at least 5 samples");
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = smp[k].delta_p;
    y[k] = smp[k].chi.imag();
  }
  SpectralFeatures out;
  const double ymax = *std::max_element(y.begin(), y.end());
  if (!(ymax > 0.0)) return out;
  const double floor = options.noise_floor * ymax;

  auto crossing = [&](std::size_t i, int dir) -> std::optional<double> {
    const double half = 0.5 * y[i];
    std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i);
    while (j >= 0 && j < static_cast<std::ptrdiff_t>(n) && y[j] > half) j += dir;
    if (j < 0 || j >= static_cast<std::ptrdiff_t>(n)) return std::nullopt;
    const std::size_t inner = static_cast<std::size_t>(j - dir);
    const std::size_t outer = static_cast<std::size_t>(j);
    const double f = (y[inner] - half) / (y[inner] - y[outer]);
    return x[inner] + f * (x[outer] - x[inner]);
  };

  std::vector<Peak> all;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > floor)) continue;
    const auto l = crossing(i, -1);
    const auto r = crossing(i, +1);
    double fwhm;
    if (l && r) {
      fwhm = *r - *l;
    } else if (l) {
      fwhm = 2.0 * (x[i] - *l);
    } else if (r) {
      fwhm = 2.0 * (*r - x[i]);
    } else {
      continue;
    }
    if (fwhm > 0.0) all.push_back({x[i], y[i], fwhm});
  }

  for (std::size_t k = 0; k + 1 < all.size(); ++k) {
    std::size_t lo_idx = 0;
    double ymin = ymax;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[j] <= all[k].center || x[j] >= all[k + 1].center) continue;
      if (y[j] < ymin) {
        ymin = y[j];
        lo_idx = j;
      }
    }
    const double depth = std::min(all[k].height, all[k + 1].height) - ymin;
    if (depth > floor) out.dips.push_back({x[lo_idx], depth});
  }

  std::optional<std::size_t> spike;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k].fwhm < options.spike_width && (!spike || all[k].fwhm < all[*spike].fwhm)) spike = k;
  }
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (spike && k == *spike) {
      out.spike = all[k];
    } else {
      out.peaks.push_back(all[k]);
    }
  }
  return out;
}

}  // namespace darkcool
