#include "darkcool/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "darkcool/error.hpp"
#include "darkcool/lindblad.hpp"
#include "darkcool/momentum_grid.hpp"
#include "darkcool/ode.hpp"
#include "darkcool/parallel.hpp"
#include "darkcool/spectroscopy.hpp"

namespace darkcool {

std::string_view to_string(PointStatus status) {
  switch (status) {
    case PointStatus::ok: return "ok";
    case PointStatus::heating: return "heating";
    case PointStatus::failed: return "failed";
  }
  return "?";
}

Derivative im_chi_slope(const DriveConfig& cfg, double delta_p, double rtol,
                        int max_refinements) {
  const auto chi0 = chi_at(cfg, delta_p);
  const double probe = 1e-7 * std::max(1.0, std::abs(delta_p));
  const auto dchi = (chi_at(cfg, delta_p + probe) - chi_at(cfg, delta_p - probe)) / (2.0 * probe);
  double width = std::abs(dchi) > 0.0 ? std::abs(chi0) / std::abs(dchi) : 1.0;
  width = std::clamp(width, 1e-12, 1.0);
  const double floor = 1e-8 * std::abs(dchi);

  auto estimate = [&](double h) {
    return (chi_at(cfg, delta_p + h).imag() - chi_at(cfg, delta_p - h).imag()) / (2.0 * h);
  };
  double h = 1e-2 * width;
  double prev = estimate(h);
  for (int k = 1; k <= max_refinements; ++k) {
    h *= 0.5;
    const double cur = estimate(h);
    if (std::abs(cur - prev) <= rtol * std::abs(cur) + floor) return {cur, h, prev, k};
    prev = cur;
  }
  std::ostringstream os;
  os << "friction derivative did not converge at delta_p = " << delta_p << " after "
     << max_refinements << " refinements";
  throw NumericalError(os.str());
}

double friction(const DriveConfig& cfg, double delta_p) {
  return 8.0 * cfg.g_p * cfg.g_p * im_chi_slope(cfg, delta_p).value;
}

ForceSample force(const DriveConfig& cfg, double delta_p, double x_phase, double velocity,
                  double kappa) {
  if (!(kappa > 0.0)) throw DomainError("force requires kappa > 0");
  const double kv = 2.0 * velocity / kappa;
  const double g2 = cfg.g_p * cfg.g_p;
  const double chi_re = chi_at(cfg, delta_p).real();
  double f = 4.0 * g2 * std::sin(2.0 * x_phase) * chi_re;
  if (velocity != 0.0) {
    const double slope = im_chi_slope(cfg, delta_p).value;
    f -= 4.0 * kv * g2 * (1.0 - std::cos(2.0 * x_phase)) * slope;
  }
  return {x_phase, velocity, f};
}

DiffusionResult diffusion(const DriveConfig& cfg, double delta_p, double kappa,
                          const DiffusionOptions& options) {
  cfg.validate();
  if (!(kappa > 0.0)) throw DomainError("diffusion requires kappa > 0");
  if (!(options.fit_end > options.fit_start && options.fit_start >= 0.0 && options.sample_dt > 0.0))
    throw DomainError("diffusion fit window is empty");
  if (cfg.g_p == 0.0) return {};

  const DriveConfig c = cfg.with_detuning(delta_p);
  GridSpec grid;
  grid.halfwidth = options.grid_halfwidth;
  grid.kappa = kappa;
  grid.validate();
  const int d = grid.dim();
  const int N = grid.halfwidth;
  const auto rates = level_decay_rates(c);
  SparseMatrixc Heff = joint_hamiltonian(c, grid);
  const std::complex<double> I{0.0, 1.0};
  for (int n = -N; n <= N; ++n)
    for (int i = 0; i < 4; ++i)
      if (rates[i] != 0.0) Heff.coeffRef(grid.index(i, n), grid.index(i, n)) -= 0.5 * I * rates[i];
  Heff.makeCompressed();
  std::vector<Channel> channels;
  for (const auto& ch : decay_channels(c))
    if (ch.rate > 0.0) channels.push_back(ch);

  const auto rho_int = steady_state(build_liouvillian(c, 1.0)).matrix();
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d) * d);
  {
    Eigen::Map<Eigen::MatrixXcd> rho(y.data(), d, d);
    rho.block(grid.index(0, 0), grid.index(0, 0), 4, 4) = rho_int;
  }

  // Each channel acts as sqrt(rate/2) |lower, n+u><upper, n| for u = +-1.
  auto rhs = [&](double, const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
    Eigen::Map<const Eigen::MatrixXcd> rho(v.data(), d, d);
    Eigen::VectorXcd out(v.size());
    Eigen::Map<Eigen::MatrixXcd> drho(out.data(), d, d);
    drho.noalias() = -I * (Heff * rho);
    drho += I * (Heff * rho.adjoint()).adjoint();
    for (const auto& ch : channels) {
      const double w = 0.5 * ch.rate;
      for (int u : {-1, 1}) {
        for (int m = std::max(-N, -N - u); m <= std::min(N, N - u); ++m) {
          for (int n = std::max(-N, -N - u); n <= std::min(N, N - u); ++n) {
            drho(grid.index(ch.lower, n + u), grid.index(ch.lower, m + u)) +=
                w * rho(grid.index(ch.upper, n), grid.index(ch.upper, m));
          }
        }
      }
    }
    return out;
  };

  ode::Options opt;
  opt.rtol = options.rtol;
  opt.atol = options.atol;
  const int samples = static_cast<int>(std::floor(options.fit_end / options.sample_dt + 1e-9));
  std::vector<double> ts, p2;
  DiffusionResult res;
  double t = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double tk = std::min(k * options.sample_dt, options.fit_end);
    if (tk > t) ode::integrate(rhs, y, t, tk, opt);
    t = tk;
    Eigen::Map<const Eigen::MatrixXcd> rho(y.data(), d, d);
    double m2 = 0.0, edge = 0.0;
    for (int n = -N; n <= N; ++n) {
      for (int i = 0; i < 4; ++i) {
        const double pop = rho(grid.index(i, n), grid.index(i, n)).real();
        m2 += static_cast<double>(n) * n * pop;
        if (n == -N || n == N) edge += pop;
      }
    }
    res.boundary_occupation = std::max(res.boundary_occupation, edge);
    if (edge > options.max_boundary) {
      std::ostringstream os;
      os << "momentum grid too small: boundary occupation " << edge << " at t = " << t
         << " (N = " << N << "); increase the grid halfwidth";
      throw GridError(os.str(), t);
    }
    if (tk >= options.fit_start - 1e-12) {
      ts.push_back(tk);
      p2.push_back(m2);
    }
  }

  const double n = static_cast<double>(ts.size());
  if (n < 3) throw FitError("diffusion fit window contains fewer than 3 samples");
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += p2[k];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    sty += (ts[k] - mt) * (p2[k] - my);
    syy += (p2[k] - my) * (p2[k] - my);
  }
  const double slope = sty / stt;
  const double ss_res = syy - slope * sty;
  res.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (res.r_squared < options.min_r_squared) {
    std::ostringstream os;
    os << "diffusion fit failed: <p^2> growth is not linear (R^2 = " << res.r_squared
       << ") at delta_p = " << delta_p;
    throw FitError(os.str());
  }
  res.rate = 0.5 * slope;
  res.scaled = 2.0 * kappa * res.rate;
  return res;
}

std::vector<CoolingPoint> temperature_curve(const DriveConfig& cfg,
                                            std::span<const double> detunings, double kappa,
                                            const CurveOptions& options) {
  cfg.validate();
  std::vector<CoolingPoint> out(detunings.size());
  parallel_for(detunings.size(), options.threads, [&](std::size_t k) {
    CoolingPoint& p = out[k];
    p.delta_p_gamma = detunings[k];
    p.delta_p_recoil = detunings[k] * kappa;
    try {
      p.eta = friction(cfg, detunings[k]);
      p.diffusion = diffusion(cfg, detunings[k], kappa, options.diffusion).scaled;
      if (p.eta > 0.0) {
        p.temperature = p.diffusion / p.eta;
        p.status = PointStatus::ok;
      } else {
        p.temperature = std::numeric_limits<double>::infinity();
        p.status = PointStatus::heating;
      }
    } catch (const std::exception& e) {
      p.status = PointStatus::failed;
      p.temperature = std::numeric_limits<double>::quiet_NaN();
      p.message = e.what();
    }
  });
  return out;
}

int coldest_point(const std::vector<CoolingPoint>& curve) {
  int best = -1;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (curve[k].status != PointStatus::ok) continue;
    if (best < 0 || curve[k].temperature < curve[best].temperature) best = static_cast<int>(k);
  }
  return best;
}

}  // namespace darkcool
