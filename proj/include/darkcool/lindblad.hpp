#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "darkcool/atom_model.hpp"
#include "darkcool/ode.hpp"

namespace darkcool {

using cdouble = std::complex<double>;
using Matrix4c = Eigen::Matrix<cdouble, 4, 4>;
using Vector16c = Eigen::Matrix<cdouble, 16, 1>;
using Matrix16c = Eigen::Matrix<cdouble, 16, 16>;

/// Zero-based indices of the internal levels |1>..|4>.
enum Level : int { kLevel1 = 0, kLevel2 = 1, kLevel3 = 2, kLevel4 = 3 };

struct StateDiagnostics {
  double hermiticity_error;  // max |rho_lm - conj(rho_ml)|
  double trace_error;        // |tr rho - 1|
  double min_eigenvalue;     // of the Hermitian part
};

/// 4x4 density matrix of the internal levels. Construction checks the
/// physical invariants (Hermitian, unit trace, positive to tolerance).
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix4c& rho);

  static DensityMatrix pure(Level level);
  static DensityMatrix maximally_mixed();
  /// Symmetrizes and renormalizes before checking; for numerically produced states.
  static DensityMatrix from_numerical(const Matrix4c& rho);

  const Matrix4c& matrix() const noexcept { return rho_; }
  double population(Level level) const { return rho_(level, level).real(); }
  /// <l|rho|m>
  cdouble element(Level l, Level m) const { return rho_(l, m); }
  StateDiagnostics diagnostics() const;

 private:
  Matrix4c rho_;
};

StateDiagnostics diagnose(const Matrix4c& rho);

struct InternalHamiltonian {
  Matrix4c matrix;
  double probe_factor;
};

/// Rotating-frame internal Hamiltonian (hbar = gamma = 1):
///   diag(delta41 - delta42, 0, delta_p, -delta42)
///   + probe_factor * g_p (|3><2| + h.c.) + g41 (|1><4| + h.c.) + g42 (|2><4| + h.c.)
/// probe_factor = 2 cos(kx) lies in [0, 2]; 1 is a single travelling wave.
InternalHamiltonian build_hamiltonian(const DriveConfig& cfg, double probe_factor = 1.0);

/// Decay channel gamma * D[|lower><upper|].
struct Channel {
  std::string name;
  double rate;
  Level lower;
  Level upper;
};

/// gamma23 |3><2|, gamma42 |2><4|, gamma41 |1><4|, gamma13 |3><1|.
std::vector<Channel> decay_channels(const DriveConfig& cfg);

class Liouvillian {
 public:
  Liouvillian(Matrix16c superoperator, std::vector<Channel> channels, DriveConfig cfg,
              double probe_factor);

  /// Acts on column-major vec(rho): index l + 4 m.
  const Matrix16c& superoperator() const noexcept { return super_; }
  const std::vector<Channel>& channels() const noexcept { return channels_; }
  const DriveConfig& config() const noexcept { return cfg_; }
  double probe_factor() const noexcept { return probe_factor_; }

  Matrix4c apply(const Matrix4c& rho) const;
  Eigen::Matrix<cdouble, 16, 1> eigenvalues() const;
  /// Smallest |Re lambda| among the eigenvalues not at zero; 0 if none.
  double slowest_rate() const;

 private:
  Matrix16c super_;
  std::vector<Channel> channels_;
  DriveConfig cfg_;
  double probe_factor_;
};

Liouvillian build_liouvillian(const DriveConfig& cfg, double probe_factor = 1.0);

/// Null vector of L with unit trace, from a dense solve in which one row is
/// replaced by the trace condition. Throws NonUniqueSteadyState if the null
/// space is degenerate.
DensityMatrix steady_state(const Liouvillian& L);

/// Dimension of the numerical null space of L (singular values below
/// 1e-12 * max(1, sigma_max)).
int null_space_dimension(const Liouvillian& L);

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
};

/// rho(t) by adaptive Dormand-Prince integration. Every accepted step is
/// checked for Hermiticity, trace and positivity; a violation throws IntegratorError.
DensityMatrix evolve(const DensityMatrix& rho0, const Liouvillian& L, double t,
                     const EvolveOptions& options = {});

/// rho at each of the (ascending, non-negative) sample times.
std::vector<DensityMatrix> evolve_sampled(const DensityMatrix& rho0, const Liouvillian& L,
                                          std::span<const double> times,
                                          const EvolveOptions& options = {});

}  // namespace darkcool
