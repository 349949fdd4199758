#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <array>
#include <complex>

#include "darkcool/atom_model.hpp"
#include "darkcool/lindblad.hpp"

namespace darkcool {

/// Joint (internal x momentum) basis |i, n>, n in [-N, N] in units of hbar k,
/// flattened as (n + N) * 4 + i.
struct GridSpec {
  int halfwidth = 50;
  double kappa = 0.0;     // gamma / omega_r; the kinetic energy of |n> is (n + p)^2 / kappa
  double p_offset = 0.0;  // continuous momentum offset in units of hbar k
  // Motion frozen: a single momentum sector, no kinetic term and no recoil
  // shifts; the probe enters with the on-site amplitude probe_factor * g_p.
  bool frozen = false;
  double probe_factor = 2.0;

  static GridSpec frozen_motion(double probe_factor = 2.0) {
    GridSpec g;
    g.halfwidth = 0;
    g.frozen = true;
    g.probe_factor = probe_factor;
    return g;
  }

  int sectors() const noexcept { return 2 * halfwidth + 1; }
  int dim() const noexcept { return 4 * sectors(); }
  int index(int level, int n) const noexcept { return (n + halfwidth) * 4 + level; }
  void validate() const;
};

using SparseMatrixc = Eigen::SparseMatrix<std::complex<double>>;

/// Hermitian Hamiltonian on the joint space. Each sector carries the internal
/// couplings g41, g42 and the detuning diagonal plus (n + p)^2 / kappa; the
/// standing-wave probe 2 g_p cos(kx) couples |3, n> to |2, n +- 1> with g_p.
SparseMatrixc joint_hamiltonian(const DriveConfig& cfg, const GridSpec& grid);

/// Total decay rate out of each internal level: {gamma13, gamma23, 0, gamma41 + gamma42}.
std::array<double, 4> level_decay_rates(const DriveConfig& cfg);

}  // namespace darkcool
