#include "darkcool/mcwf.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "darkcool/error.hpp"
#include "darkcool/parallel.hpp"

namespace darkcool {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};
constexpr std::uint64_t kStreamTag = 0x6d637766ULL;

}  // namespace

MotionalState::MotionalState(GridSpec grid, Eigen::VectorXcd amplitudes)
    : grid_(grid), amps_(std::move(amplitudes)) {
  grid_.validate();
  if (amps_.size() != grid_.dim()) throw DomainError("MotionalState: amplitude vector has wrong size");
}

MotionalState MotionalState::gaussian(const GridSpec& grid, Level level, double width) {
  if (!(width >= 0.0)) throw DomainError("initial momentum width must be >= 0");
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(grid.dim());
  const int N = grid.halfwidth;
  for (int n = -N; n <= N; ++n) {
    if (width == 0.0) {
      if (n == 0) a(grid.index(level, n)) = 1.0;
    } else {
      a(grid.index(level, n)) = std::exp(-static_cast<double>(n) * n / (4.0 * width * width));
    }
  }
  MotionalState s(grid, a);
  s.normalize();
  return s;
}

void MotionalState::normalize() {
  const double n = amps_.norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize a zero state");
  amps_ /= n;
}

double MotionalState::p_mean() const {
  const int N = grid_.halfwidth;
  double s = 0.0;
  for (int n = -N; n <= N; ++n)
    s += (n + grid_.p_offset) * amps_.segment(grid_.index(0, n), 4).squaredNorm();
  return s / norm2();
}

double MotionalState::p2_mean() const {
  const int N = grid_.halfwidth;
  double s = 0.0;
  for (int n = -N; n <= N; ++n) {
    const double p = n + grid_.p_offset;
    s += p * p * amps_.segment(grid_.index(0, n), 4).squaredNorm();
  }
  return s / norm2();
}

double MotionalState::boundary_occupation() const {
  if (grid_.frozen) return 0.0;
  const int N = grid_.halfwidth;
  return (amps_.segment(grid_.index(0, -N), 4).squaredNorm() +
          amps_.segment(grid_.index(0, N), 4).squaredNorm()) /
         norm2();
}

std::array<double, 4> MotionalState::populations() const {
  std::array<double, 4> p{};
  const int N = grid_.halfwidth;
  for (int n = -N; n <= N; ++n)
    for (int i = 0; i < 4; ++i) p[i] += std::norm(amps_(grid_.index(i, n)));
  const double total = norm2();
  for (auto& v : p) v /= total;
  return p;
}

EffectiveHamiltonian::EffectiveHamiltonian(const DriveConfig& cfg, const GridSpec& grid)
    : cfg_(cfg), grid_(grid), channels_(decay_channels(cfg)) {
  herm_ = joint_hamiltonian(cfg, grid);
  const auto rates = level_decay_rates(cfg);
  heff_ = herm_;
  for (int n = -grid.halfwidth; n <= grid.halfwidth; ++n)
    for (int i = 0; i < 4; ++i)
      if (rates[i] != 0.0) heff_.coeffRef(grid.index(i, n), grid.index(i, n)) -= 0.5 * kI * rates[i];
  heff_.makeCompressed();
  max_decay_ = *std::max_element(rates.begin(), rates.end());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(herm_),
                                                      Eigen::EigenvaluesOnly);
  span_ = es.eigenvalues().maxCoeff() - es.eigenvalues().minCoeff();
}

double EffectiveHamiltonian::suggested_dt() const {
  double dt = std::numeric_limits<double>::infinity();
  if (max_decay_ > 0.0) dt = std::min(dt, 0.1 / max_decay_);
  if (span_ > 0.0) dt = std::min(dt, 0.02 * 2.0 * 3.14159265358979323846 / span_);
  return std::isfinite(dt) ? dt : 1.0;
}

void step(MotionalState& state, const EffectiveHamiltonian& heff, double dt) {
  if (!(dt > 0.0)) throw DomainError("step requires dt > 0");
  const auto& H = heff.matrix();
  Eigen::VectorXcd& y = state.amplitudes();
  const double before = y.squaredNorm();
  const Eigen::VectorXcd k1 = -kI * (H * y);
  const Eigen::VectorXcd k2 = -kI * (H * (y + 0.5 * dt * k1));
  const Eigen::VectorXcd k3 = -kI * (H * (y + 0.5 * dt * k2));
  const Eigen::VectorXcd k4 = -kI * (H * (y + dt * k3));
  y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const double after = y.squaredNorm();
  if (after > before + 1e-12) {
    std::ostringstream os;
    os << "norm increased from " << before << " to " << after << " in one step (dt = " << dt
       << "); reduce the step size";
    throw IntegratorError(os.str());
  }
}

JumpEvent jump(MotionalState& state, const EffectiveHamiltonian& heff, Philox4x64& rng) {
  const GridSpec& g = state.grid();
  const auto& channels = heff.channels();
  const Eigen::VectorXcd& a = state.amplitudes();
  const int N = g.halfwidth;
  std::vector<double> w(channels.size(), 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].rate == 0.0) continue;
    double p = 0.0;
    for (int n = -N; n <= N; ++n) p += std::norm(a(g.index(channels[c].upper, n)));
    w[c] = channels[c].rate * p;
    total += w[c];
  }
  if (!(total > 0.0)) throw NumericalError("quantum jump triggered but every channel weight is zero");

  const double x = rng.uniform() * total;
  std::size_t chosen = 0;
  double acc = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (w[c] == 0.0) continue;
    chosen = c;
    acc += w[c];
    if (x < acc) break;
  }
  const int sign = rng.uniform() < 0.5 ? -1 : 1;
  const int u = g.frozen ? 0 : sign;
  const auto& ch = channels[chosen];
  Eigen::VectorXcd next = Eigen::VectorXcd::Zero(a.size());
  for (int n = -N; n <= N; ++n) {
    if (n + u < -N || n + u > N) continue;
    next(g.index(ch.lower, n + u)) = a(g.index(ch.upper, n));
  }
  state.amplitudes() = std::move(next);
  state.normalize();
  return {0.0, static_cast<int>(chosen), u};
}

SpectralPropagator::SpectralPropagator(const EffectiveHamiltonian& heff) {
  const Eigen::MatrixXcd H(heff.matrix());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of H_eff failed");
  lambda_ = es.eigenvalues();
  V_ = es.eigenvectors();
  Vinv_ = V_.fullPivLu().inverse();
  gram_ = V_.adjoint() * V_;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(V_);
  const auto& s = svd.singularValues();
  cond_ = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
}

Eigen::VectorXcd SpectralPropagator::to_modes(const Eigen::VectorXcd& psi) const {
  return Vinv_ * psi;
}

Eigen::VectorXcd SpectralPropagator::evolve_modes(const Eigen::VectorXcd& modes, double t) const {
  return (modes.array() * (-kI * lambda_.array() * t).exp()).matrix();
}

Eigen::VectorXcd SpectralPropagator::from_modes(const Eigen::VectorXcd& modes, double t) const {
  return V_ * evolve_modes(modes, t);
}

double SpectralPropagator::norm2(const Eigen::VectorXcd& modes, double t) const {
  const Eigen::VectorXcd c = evolve_modes(modes, t);
  return c.dot(gram_ * c).real();
}

Philox4x64 trajectory_rng(std::uint64_t seed) { return Philox4x64(seed, kStreamTag); }

namespace {

std::vector<double> sample_grid(double t_final, const TrajectoryOptions& o) {
  std::vector<double> ts = o.sample_times;
  if (ts.empty()) {
    if (o.samples < 2) throw DomainError("trajectory needs at least 2 samples");
    ts.resize(static_cast<std::size_t>(o.samples));
    for (int k = 0; k < o.samples; ++k) ts[k] = t_final * k / (o.samples - 1);
    ts.back() = t_final;
  }
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 0.0 || ts[k] > t_final || (k > 0 && ts[k] < ts[k - 1]))
      throw DomainError("sample times must be ascending within [0, t_final]");
  }
  return ts;
}

void check_boundary(const MotionalState& s, double limit, double t) {
  const double b = s.boundary_occupation();
  if (b > limit) {
    std::ostringstream os;
    os << "momentum grid boundary occupation " << b << " exceeds " << limit << " at t = " << t
       << " (N = " << s.grid().halfwidth << ")";
    throw GridError(os.str(), t);
  }
}

void record(TrajectoryRecord& rec, const MotionalState& s, double t) {
  rec.times.push_back(t);
  rec.p_mean.push_back(s.p_mean());
  rec.p2_mean.push_back(s.p2_mean());
  rec.populations.push_back(s.populations());
}

void apply_jump(TrajectoryRecord& rec, MotionalState& s, const EffectiveHamiltonian& heff,
                Philox4x64& rng, double t, const TrajectoryOptions& o) {
  check_boundary(s, o.max_boundary, t);
  JumpEvent ev = jump(s, heff, rng);
  ev.time = t;
  ++rec.jump_count;
  if (o.record_jumps) rec.jumps.push_back(ev);
  check_boundary(s, o.max_boundary, t);
}

}  // namespace

TrajectoryRecord run_trajectory(const EffectiveHamiltonian& heff,
                                const SpectralPropagator* propagator, double t_final,
                                std::uint64_t seed, const TrajectoryOptions& options) {
  if (!(t_final > 0.0)) throw DomainError("t_final must be > 0");
  const auto ts = sample_grid(t_final, options);
  TrajectoryRecord rec;
  rec.seed = seed;
  Philox4x64 rng = trajectory_rng(seed);
  MotionalState state =
      MotionalState::gaussian(heff.grid(), options.initial_level, options.initial_width);
  check_boundary(state, options.max_boundary, 0.0);
  double threshold = rng.uniform();

  const bool spectral = options.propagator == Propagator::spectral && propagator &&
                        propagator->condition_number() <= options.max_condition;
  if (spectral) {
    const SpectralPropagator& P = *propagator;
    double t0 = 0.0;
    Eigen::VectorXcd modes = P.to_modes(state.amplitudes());
    for (double tk : ts) {
      while (P.norm2(modes, tk - t0) <= threshold) {
        const double span = tk - t0;
        double tau = 0.0;
        if (P.norm2(modes, 0.0) > threshold) {
          auto f = [&](double x) { return P.norm2(modes, x) - threshold; };
          std::uintmax_t iters = 200;
          const auto root = boost::math::tools::toms748_solve(
              f, 0.0, span, boost::math::tools::eps_tolerance<double>(48), iters);
          tau = 0.5 * (root.first + root.second);
        }
        state.amplitudes() = P.from_modes(modes, tau);
        state.normalize();
        t0 += tau;
        apply_jump(rec, state, heff, rng, t0, options);
        modes = P.to_modes(state.amplitudes());
        threshold = rng.uniform();
      }
      state.amplitudes() = P.from_modes(modes, tk - t0);
      check_boundary(state, options.max_boundary, tk);
      record(rec, state, tk);
    }
    return rec;
  }

  const double dt = heff.suggested_dt();
  double t = 0.0;
  for (double tk : ts) {
    while (tk - t > 1e-12 * std::max(1.0, tk)) {
      const double h = std::min(dt, tk - t);
      step(state, heff, h);
      t += h;
      if (state.norm2() <= threshold) {
        state.normalize();
        apply_jump(rec, state, heff, rng, t, options);
        threshold = rng.uniform();
      }
    }
    t = tk;
    check_boundary(state, options.max_boundary, tk);
    record(rec, state, tk);
  }
  return rec;
}

TrajectoryRecord run_trajectory(const DriveConfig& cfg, const GridSpec& grid, double t_final,
                                std::uint64_t seed, const TrajectoryOptions& options) {
  const EffectiveHamiltonian heff(cfg, grid);
  std::optional<SpectralPropagator> P;
  if (options.propagator == Propagator::spectral) P.emplace(heff);
  if (P && P->condition_number() > options.max_condition) {
    std::ostringstream os;
    os << "H_eff eigenbasis condition number " << P->condition_number()
       << " too large; using the Runge-Kutta propagator";
    warn(os.str());
  }
  return run_trajectory(heff, P ? &*P : nullptr, t_final, seed, options);
}

PlateauInfo detect_plateau(const std::vector<double>& times,
                           const std::vector<std::vector<double>>& p2,
                           std::span<const double> start_fractions, double fallback_start) {
  PlateauInfo info;
  const std::size_t S = times.size();
  const std::size_t M = p2.size();
  auto first_at = [&](double frac) {
    const double t_start = times.front() + frac * (times.back() - times.front());
    std::size_t k = 0;
    while (k < S && times[k] < t_start - 1e-12 * std::abs(times.back())) ++k;
    return k;
  };
  auto mean_se = [&](const std::vector<double>& v) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
    return std::pair{m, std::sqrt(var / static_cast<double>(v.size()))};
  };
  if (M >= 2 && S >= 4) {
    for (double frac : start_fractions) {
      const std::size_t k0 = first_at(frac);
      if (S - k0 < 4) continue;
      const std::size_t mid = k0 + (S - k0) / 2;
      std::vector<double> a(M), b(M);
      for (std::size_t j = 0; j < M; ++j) {
        a[j] = std::accumulate(p2[j].begin() + k0, p2[j].begin() + mid, 0.0) /
               static_cast<double>(mid - k0);
        b[j] = std::accumulate(p2[j].begin() + mid, p2[j].end(), 0.0) /
               static_cast<double>(S - mid);
      }
      const auto [ma, sa] = mean_se(a);
      const auto [mb, sb] = mean_se(b);
      if (std::abs(ma - mb) <= 2.0 * std::hypot(sa, sb)) {
        info.found = true;
        info.first_sample = k0;
        return info;
      }
    }
  }
  info.first_sample = std::min(first_at(fallback_start), S == 0 ? 0 : S - 1);
  return info;
}

EnsembleResult ensemble_temperature(const DriveConfig& cfg, const GridSpec& grid, double t_final,
                                    int M, std::uint64_t base_seed,
                                    const EnsembleOptions& options) {
  if (M < 2) throw DomainError("ensemble needs M >= 2 trajectories");
  const EffectiveHamiltonian heff(cfg, grid);
  std::optional<SpectralPropagator> P;
  if (options.trajectory.propagator == Propagator::spectral) P.emplace(heff);

  std::vector<std::optional<TrajectoryRecord>> recs(static_cast<std::size_t>(M));
  std::vector<std::string> errors(static_cast<std::size_t>(M));
  parallel_for(recs.size(), options.threads, [&](std::size_t j) {
    try {
      recs[j] = run_trajectory(heff, P ? &*P : nullptr, t_final, base_seed + j, options.trajectory);
    } catch (const NumericalError& e) {
      errors[j] = e.what();
    }
  });

  EnsembleResult res;
  res.trajectories = M;
  std::vector<std::vector<double>> p2;
  for (std::size_t j = 0; j < recs.size(); ++j) {
    res.seeds.push_back(base_seed + j);
    if (!recs[j]) {
      ++res.failures;
      res.failure_messages.push_back("seed " + std::to_string(base_seed + j) + ": " + errors[j]);
      continue;
    }
    const auto& r = *recs[j];
    res.total_jumps += r.jump_count;
    if (res.times.empty()) {
      res.times = r.times;
      res.p_mean.assign(r.times.size(), 0.0);
      res.p2_mean.assign(r.times.size(), 0.0);
    }
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      res.p_mean[k] += r.p_mean[k];
      res.p2_mean[k] += r.p2_mean[k];
    }
    p2.push_back(r.p2_mean);
  }
  const double ok = static_cast<double>(p2.size());
  if (p2.empty()) {
    res.temperature = std::numeric_limits<double>::quiet_NaN();
    res.temperature_error = std::numeric_limits<double>::quiet_NaN();
    return res;
  }
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    res.p_mean[k] /= ok;
    res.p2_mean[k] /= ok;
  }

  const auto plateau =
      detect_plateau(res.times, p2, options.plateau_starts, options.fallback_start);
  res.equilibrated = plateau.found;
  res.plateau_start = res.times[plateau.first_sample];
  for (const auto& v : p2) {
    const auto first = v.begin() + static_cast<std::ptrdiff_t>(plateau.first_sample);
    res.trajectory_p2.push_back(std::accumulate(first, v.end(), 0.0) /
                                static_cast<double>(v.end() - first));
  }
  const double m = std::accumulate(res.trajectory_p2.begin(), res.trajectory_p2.end(), 0.0) / ok;
  double ss = 0.0;
  for (double x : res.trajectory_p2) ss += (x - m) * (x - m);
  res.temperature = 2.0 * m;
  res.temperature_error = ok > 1 ? 2.0 * std::sqrt(ss / (ok - 1.0) / ok) : 0.0;
  if (!res.equilibrated) warn("MCWF ensemble did not reach a detectable plateau; using the last 25%");
  return res;
}

ValidationReport validate_against_master_equation(const DriveConfig& cfg, double t, int M,
                                                  const ValidationOptions& options) {
  if (!(t > 0.0)) throw DomainError("validation time must be > 0");
  if (M < 2) throw DomainError("validation needs M >= 2 trajectories");
  const GridSpec grid = GridSpec::frozen_motion(options.probe_factor);
  const EffectiveHamiltonian heff(cfg, grid);
  std::optional<SpectralPropagator> P;
  if (options.propagator == Propagator::spectral) P.emplace(heff);

  TrajectoryOptions topt;
  topt.sample_times = {0.25 * t, 0.5 * t, t};
  topt.initial_level = options.initial_level;
  topt.initial_width = 0.0;
  topt.propagator = options.propagator;
  topt.record_jumps = false;

  std::vector<TrajectoryRecord> recs(static_cast<std::size_t>(M));
  parallel_for(recs.size(), options.threads, [&](std::size_t j) {
    recs[j] = run_trajectory(heff, P ? &*P : nullptr, t, options.base_seed + j, topt);
  });

  ValidationReport rep;
  rep.times = topt.sample_times;
  const auto me = evolve_sampled(DensityMatrix::pure(options.initial_level),
                                 build_liouvillian(cfg, options.probe_factor), rep.times);
  rep.passed = true;
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    std::array<double, 4> mean{}, sig{}, exact{};
    for (int i = 0; i < 4; ++i) {
      double s = 0.0, s2 = 0.0;
      for (const auto& r : recs) {
        s += r.populations[k][i];
        s2 += r.populations[k][i] * r.populations[k][i];
      }
      mean[i] = s / M;
      exact[i] = me[k].population(static_cast<Level>(i));
      // Populations lie in [0, 1]; q (1 - q) keeps rare levels from being judged
      // against a sample that never visited them.
      const double q = std::clamp(exact[i], 0.0, 1.0);
      const double var = std::max((s2 - M * mean[i] * mean[i]) / (M - 1), q * (1.0 - q));
      sig[i] = std::sqrt(std::max(var, 0.0) / M);
      const double dev = std::abs(mean[i] - exact[i]);
      rep.max_deviation = std::max(rep.max_deviation, dev);
      rep.max_sigma = std::max(rep.max_sigma, sig[i]);
      if (sig[i] > 0.0) rep.max_z = std::max(rep.max_z, dev / sig[i]);
      if (dev > 3.0 * sig[i] + 1e-9) rep.passed = false;
    }
    rep.master.push_back(exact);
    rep.mcwf.push_back(mean);
    rep.sigma.push_back(sig);
  }
  return rep;
}

}  // namespace darkcool
