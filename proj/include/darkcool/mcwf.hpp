#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "darkcool/atom_model.hpp"
#include "darkcool/lindblad.hpp"
#include "darkcool/momentum_grid.hpp"
#include "darkcool/philox.hpp"

namespace darkcool {

/// Amplitudes c_{i,n} on the joint grid.
class MotionalState {
 public:
  MotionalState(GridSpec grid, Eigen::VectorXcd amplitudes);

  /// Internal level `level` with amplitudes proportional to exp(-n^2 / (4 w^2)),
  /// so that <n^2> is close to w^2. width = 0 puts everything in n = 0.
  static MotionalState gaussian(const GridSpec& grid, Level level, double width);

  const GridSpec& grid() const noexcept { return grid_; }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amps_; }

  double norm2() const { return amps_.squaredNorm(); }
  void normalize();

  // Normalized expectation values; momenta in units of hbar k.
  double p_mean() const;
  double p2_mean() const;
  double boundary_occupation() const;
  std::array<double, 4> populations() const;

 private:
  GridSpec grid_;
  Eigen::VectorXcd amps_;
};

/// H - (i/2) sum_c gamma_c C_c^dag C_c on the joint grid, where the sum over
/// the four decay channels is diagonal: {gamma13, gamma23, 0, gamma41 + gamma42}
/// on |1>..|4> in every momentum sector.
class EffectiveHamiltonian {
 public:
  EffectiveHamiltonian(const DriveConfig& cfg, const GridSpec& grid);

  const DriveConfig& config() const noexcept { return cfg_; }
  const GridSpec& grid() const noexcept { return grid_; }
  const SparseMatrixc& hermitian() const noexcept { return herm_; }
  const SparseMatrixc& matrix() const noexcept { return heff_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }

  /// Largest total decay rate of any level.
  double max_decay() const noexcept { return max_decay_; }
  /// max - min eigenvalue of the Hermitian part.
  double spectral_span() const noexcept { return span_; }
  /// min(0.1 / max_decay, 0.02 * 2 pi / spectral_span).
  double suggested_dt() const;

 private:
  DriveConfig cfg_;
  GridSpec grid_;
  SparseMatrixc herm_;
  SparseMatrixc heff_;
  std::vector<Channel> channels_;
  double max_decay_ = 0.0;
  double span_ = 0.0;
};

/// One fourth-order Runge-Kutta step of i d(psi)/dt = H_eff psi. Throws
/// IntegratorError when the norm grows by more than 1e-12.
void step(MotionalState& state, const EffectiveHamiltonian& heff, double dt);

struct JumpEvent {
  double time = 0.0;
  int channel = -1;  // index into EffectiveHamiltonian::channels()
  int sign = 0;      // recoil +-1, 0 when motion is frozen
};

/// Applies one quantum jump: channel c with probability proportional to
/// gamma_c ||C_c psi||^2, recoil sign +-1 with probability 1/2, then
/// renormalizes. Throws NumericalError if every channel weight vanishes.
JumpEvent jump(MotionalState& state, const EffectiveHamiltonian& heff, Philox4x64& rng);

/// Exact propagation by eigendecomposition H_eff = V diag(lambda) V^-1:
/// psi(t) = V exp(-i lambda t) V^-1 psi(0), ||psi(t)||^2 = c(t)^dag V^dag V c(t).
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const EffectiveHamiltonian& heff);

  double condition_number() const noexcept { return cond_; }
  const Eigen::VectorXcd& eigenvalues() const noexcept { return lambda_; }
  Eigen::VectorXcd to_modes(const Eigen::VectorXcd& psi) const;
  Eigen::VectorXcd evolve_modes(const Eigen::VectorXcd& modes, double t) const;
  Eigen::VectorXcd from_modes(const Eigen::VectorXcd& modes, double t) const;
  double norm2(const Eigen::VectorXcd& modes, double t) const;

 private:
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd V_;
  Eigen::MatrixXcd Vinv_;
  Eigen::MatrixXcd gram_;
  double cond_ = 1.0;
};

enum class Propagator { spectral, rk4 };

struct TrajectoryOptions {
  int samples = 200;                 // equally spaced on [0, t_final], both ends included
  std::vector<double> sample_times;  // overrides `samples` when non-empty
  Level initial_level = kLevel3;
  double initial_width = 5.0;        // hbar k
  Propagator propagator = Propagator::spectral;
  double max_condition = 1e8;        // spectral falls back to rk4 above this
  double max_boundary = 1e-6;
  bool record_jumps = true;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> p_mean;
  std::vector<double> p2_mean;
  std::vector<std::array<double, 4>> populations;
  std::vector<JumpEvent> jumps;
  long jump_count = 0;
};

/// Key of the random stream owned by trajectory `seed`.
Philox4x64 trajectory_rng(std::uint64_t seed);

/// Deterministic in (cfg, grid, t_final, seed, options). Throws GridError with
/// the time at which the boundary occupation first exceeded the bound.
TrajectoryRecord run_trajectory(const DriveConfig& cfg, const GridSpec& grid, double t_final,
                                std::uint64_t seed, const TrajectoryOptions& options = {});

/// Variant reusing a prebuilt Hamiltonian and (optionally) its propagator.
TrajectoryRecord run_trajectory(const EffectiveHamiltonian& heff,
                                const SpectralPropagator* propagator, double t_final,
                                std::uint64_t seed, const TrajectoryOptions& options = {});

struct EnsembleOptions {
  TrajectoryOptions trajectory{};
  unsigned threads = 0;
  std::array<double, 3> plateau_starts{0.2, 0.4, 0.6};
  double fallback_start = 0.75;
};

struct EnsembleResult {
  int trajectories = 0;
  int failures = 0;
  std::vector<std::string> failure_messages;
  std::vector<std::uint64_t> seeds;
  double temperature = 0.0;        // E_r / k_B, from 2 <n^2>
  double temperature_error = 0.0;  // standard error across trajectories
  bool equilibrated = false;
  double plateau_start = 0.0;      // time
  std::vector<double> times;       // ensemble means over successful trajectories
  std::vector<double> p_mean;
  std::vector<double> p2_mean;
  std::vector<double> trajectory_p2;  // plateau average of each successful trajectory
  long total_jumps = 0;
};

/// Runs M trajectories with seeds base_seed .. base_seed + M - 1 and extracts the
/// plateau temperature.
EnsembleResult ensemble_temperature(const DriveConfig& cfg, const GridSpec& grid, double t_final,
                                    int M, std::uint64_t base_seed,
                                    const EnsembleOptions& options = {});

struct PlateauInfo {
  bool found = false;
  std::size_t first_sample = 0;
};

/// Earliest start fraction at which the two halves of the remaining window agree
/// within 2 combined standard errors. `p2[j][k]` is trajectory j at sample k.
PlateauInfo detect_plateau(const std::vector<double>& times,
                           const std::vector<std::vector<double>>& p2,
                           std::span<const double> start_fractions, double fallback_start);

struct ValidationReport {
  std::vector<double> times;
  std::vector<std::array<double, 4>> master;
  std::vector<std::array<double, 4>> mcwf;
  std::vector<std::array<double, 4>> sigma;
  double max_deviation = 0.0;
  double max_sigma = 0.0;
  double max_z = 0.0;  // largest deviation / sigma
  bool passed = false;
};

struct ValidationOptions {
  Level initial_level = kLevel4;
  double probe_factor = 2.0;
  std::uint64_t base_seed = 1;
  unsigned threads = 0;
  Propagator propagator = Propagator::spectral;
};

/// Frozen-motion unraveling check: MCWF ensemble populations against the
/// master equation at t/4, t/2 and t. sigma is the standard error of the mean,
/// with the variance bounded below by q (1 - q) at the master value q. Passes
/// when every deviation is within 3 sigma (plus 1e-9 for exact cases).
ValidationReport validate_against_master_equation(const DriveConfig& cfg, double t, int M,
                                                  const ValidationOptions& options = {});

}  // namespace darkcool
