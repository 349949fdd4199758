#include "darkcool/momentum_grid.hpp"

#include <vector>

#include "darkcool/error.hpp"

namespace darkcool {

void GridSpec::validate() const {
  if (frozen) {
    if (halfwidth != 0) throw DomainError("frozen-motion grid must have halfwidth 0");
    if (!(probe_factor >= 0.0 && probe_factor <= 2.0))
      throw DomainError("probe_factor must lie in [0, 2]");
    return;
  }
  if (halfwidth < 1) throw DomainError("grid halfwidth N must be >= 1");
  if (!(kappa > 0.0)) throw DomainError("grid kappa must be > 0");
}

SparseMatrixc joint_hamiltonian(const DriveConfig& cfg, const GridSpec& grid) {
  grid.validate();
  cfg.validate();
  DriveConfig no_probe = cfg;
  no_probe.g_p = 0.0;
  const Matrix4c h = build_hamiltonian(no_probe, 0.0).matrix;

  using T = Eigen::Triplet<std::complex<double>>;
  std::vector<T> trip;
  const int N = grid.halfwidth;
  for (int n = -N; n <= N; ++n) {
    const double kinetic = grid.frozen ? 0.0 : (n + grid.p_offset) * (n + grid.p_offset) / grid.kappa;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        std::complex<double> v = h(i, j);
        if (i == j) v += kinetic;
        if (v != 0.0) trip.emplace_back(grid.index(i, n), grid.index(j, n), v);
      }
    }
    if (grid.frozen) {
      const double g = grid.probe_factor * cfg.g_p;
      if (g != 0.0) {
        trip.emplace_back(grid.index(kLevel3, n), grid.index(kLevel2, n), g);
        trip.emplace_back(grid.index(kLevel2, n), grid.index(kLevel3, n), g);
      }
      continue;
    }
    if (cfg.g_p == 0.0) continue;
    for (int u : {-1, 1}) {
      const int m = n + u;
      if (m < -N || m > N) continue;
      trip.emplace_back(grid.index(kLevel3, n), grid.index(kLevel2, m), cfg.g_p);
      trip.emplace_back(grid.index(kLevel2, m), grid.index(kLevel3, n), cfg.g_p);
    }
  }
  SparseMatrixc H(grid.dim(), grid.dim());
  H.setFromTriplets(trip.begin(), trip.end());
  H.makeCompressed();
  return H;
}

std::array<double, 4> level_decay_rates(const DriveConfig& cfg) {
  return {cfg.gamma13, cfg.gamma23, 0.0, cfg.gamma41 + cfg.gamma42};
}

}  // namespace darkcool
