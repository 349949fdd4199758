#include "darkcool/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "darkcool/error.hpp"

namespace darkcool {

namespace {

constexpr cdouble kI{0.0, 1.0};

// Matrix of the map X -> A X B on column-major vec(X).
Matrix16c sandwich(const Matrix4c& A, const Matrix4c& B) {
  Matrix16c M;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      for (int l = 0; l < 4; ++l)
        for (int k = 0; k < 4; ++k) M(i + 4 * j, k + 4 * l) = A(i, k) * B(l, j);
  return M;
}

Vector16c vec(const Matrix4c& m) { return Eigen::Map<const Vector16c>(m.data()); }

Matrix4c unvec(const Vector16c& v) { return Eigen::Map<const Matrix4c>(v.data()); }

void require_valid(const StateDiagnostics& d, const char* where) {
  if (d.hermiticity_error > 1e-10 || d.trace_error > 1e-9 || d.min_eigenvalue < -1e-8) {
    std::ostringstream os;
    os << where << ": density matrix invariant violated (hermiticity " << d.hermiticity_error
       << ", trace error " << d.trace_error << ", min eigenvalue " << d.min_eigenvalue << ")";
    throw IntegratorError(os.str());
  }
}

}  // namespace

StateDiagnostics diagnose(const Matrix4c& rho) {
  StateDiagnostics d{};
  d.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  d.trace_error = std::abs(rho.trace() - 1.0);
  const Matrix4c herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

DensityMatrix::DensityMatrix(const Matrix4c& rho) : rho_(rho) {
  const auto d = diagnose(rho_);
  if (d.hermiticity_error > 1e-10) throw DomainError("density matrix is not Hermitian");
  if (d.trace_error > 1e-9) throw DomainError("density matrix trace differs from 1");
  if (d.min_eigenvalue < -1e-8) throw DomainError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(Level level) {
  Matrix4c m = Matrix4c::Zero();
  m(level, level) = 1.0;
  return DensityMatrix(m);
}

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(Matrix4c::Identity() * 0.25);
}

DensityMatrix DensityMatrix::from_numerical(const Matrix4c& rho) {
  Matrix4c h = 0.5 * (rho + rho.adjoint());
  h /= h.trace().real();
  return DensityMatrix(h);
}

StateDiagnostics DensityMatrix::diagnostics() const { return diagnose(rho_); }

InternalHamiltonian build_hamiltonian(const DriveConfig& cfg, double probe_factor) {
  cfg.validate();
  if (!(probe_factor >= 0.0 && probe_factor <= 2.0))
    throw DomainError("probe_factor must lie in [0, 2]");
  Matrix4c H = Matrix4c::Zero();
  H(kLevel1, kLevel1) = cfg.delta41 - cfg.delta42;
  H(kLevel3, kLevel3) = cfg.delta_p;
  H(kLevel4, kLevel4) = -cfg.delta42;
  H(kLevel3, kLevel2) = H(kLevel2, kLevel3) = probe_factor * cfg.g_p;
  H(kLevel1, kLevel4) = H(kLevel4, kLevel1) = cfg.g41;
  H(kLevel2, kLevel4) = H(kLevel4, kLevel2) = cfg.g42;
  return {H, probe_factor};
}

std::vector<Channel> decay_channels(const DriveConfig& cfg) {
  return {{"gamma23", cfg.gamma23, kLevel3, kLevel2},
          {"gamma42", cfg.gamma42, kLevel2, kLevel4},
          {"gamma41", cfg.gamma41, kLevel1, kLevel4},
          {"gamma13", cfg.gamma13, kLevel3, kLevel1}};
}

Liouvillian::Liouvillian(Matrix16c superoperator, std::vector<Channel> channels, DriveConfig cfg,
                         double probe_factor)
    : super_(std::move(superoperator)),
      channels_(std::move(channels)),
      cfg_(cfg),
      probe_factor_(probe_factor) {}

Matrix4c Liouvillian::apply(const Matrix4c& rho) const { return unvec(super_ * vec(rho)); }

Eigen::Matrix<cdouble, 16, 1> Liouvillian::eigenvalues() const {
  Eigen::ComplexEigenSolver<Matrix16c> es(super_, false);
  return es.eigenvalues();
}

double Liouvillian::slowest_rate() const {
  const auto ev = eigenvalues();
  const double scale = std::max(1.0, super_.cwiseAbs().maxCoeff());
  double slowest = 0.0;
  for (int i = 0; i < ev.size(); ++i) {
    const double r = std::abs(ev[i].real());
    if (std::abs(ev[i]) < 1e-10 * scale) continue;
    if (r > 0.0 && (slowest == 0.0 || r < slowest)) slowest = r;
  }
  return slowest;
}

Liouvillian build_liouvillian(const DriveConfig& cfg, double probe_factor) {
  const Matrix4c H = build_hamiltonian(cfg, probe_factor).matrix;
  const Matrix4c id = Matrix4c::Identity();
  Matrix16c L = -kI * (sandwich(H, id) - sandwich(id, H));
  auto channels = decay_channels(cfg);
  for (const auto& ch : channels) {
    if (ch.rate == 0.0) continue;
    Matrix4c C = Matrix4c::Zero();
    C(ch.lower, ch.upper) = 1.0;
    const Matrix4c CdC = C.adjoint() * C;
    L += ch.rate * (sandwich(C, C.adjoint()) - 0.5 * sandwich(CdC, id) - 0.5 * sandwich(id, CdC));
  }
  return Liouvillian(L, std::move(channels), cfg, probe_factor);
}

int null_space_dimension(const Liouvillian& L) {
  Eigen::JacobiSVD<Matrix16c> svd(L.superoperator());
  const auto& s = svd.singularValues();
  const double tol = 1e-12 * std::max(1.0, s[0]);
  return static_cast<int>((s.array() <= tol).count());
}

DensityMatrix steady_state(const Liouvillian& L) {
  const int dim = null_space_dimension(L);
  if (dim > 1) {
    const auto& c = L.config();
    std::ostringstream os;
    os << "non-unique steady state: null space of dimension " << dim << " for g_p=" << c.g_p
       << ", g41=" << c.g41 << ", g42=" << c.g42 << ", gamma13=" << c.gamma13
       << ", delta_p=" << c.delta_p;
    if (c.g41 == 0.0 && c.gamma13 == 0.0) os << " (population trapped in |1>: g41 = gamma13 = 0)";
    throw NonUniqueSteadyState(os.str());
  }
  Matrix16c A = L.superoperator();
  Vector16c b = Vector16c::Zero();
  A.row(0).setZero();
  for (int i = 0; i < 4; ++i) A(0, i + 4 * i) = 1.0;
  b(0) = 1.0;
  const Vector16c x = A.fullPivLu().solve(b);
  const Matrix4c rho = unvec(x);
  const double residual = (L.superoperator() * x).norm();
  const double scale = L.superoperator().norm() * x.norm();
  if (!(residual <= 1e-10 * std::max(scale, 1e-300))) {
    std::ostringstream os;
    os << "steady-state residual " << residual / scale << " exceeds 1e-10";
    throw NumericalError(os.str());
  }
  return DensityMatrix::from_numerical(rho);
}

std::vector<DensityMatrix> evolve_sampled(const DensityMatrix& rho0, const Liouvillian& L,
                                          std::span<const double> times,
                                          const EvolveOptions& options) {
  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  Vector16c y = vec(rho0.matrix());
  const Matrix16c& S = L.superoperator();
  const bool inert = S.cwiseAbs().maxCoeff() == 0.0;
  ode::Options opt;
  opt.rtol = options.rtol;
  opt.atol = options.atol;
  double t = 0.0;
  for (double ts : times) {
    if (ts < t) throw DomainError("evolve: sample times must be ascending and non-negative");
    if (!inert && ts > t) {
      ode::integrate([&S](double, const Vector16c& v) -> Vector16c { return S * v; }, y, t, ts,
                     opt);
    }
    t = ts;
    const Matrix4c rho = unvec(y);
    require_valid(diagnose(rho), "evolve");
    out.push_back(DensityMatrix::from_numerical(rho));
  }
  return out;
}

DensityMatrix evolve(const DensityMatrix& rho0, const Liouvillian& L, double t,
                     const EvolveOptions& options) {
  if (!(t >= 0.0)) throw DomainError("evolve: duration must be >= 0");
  const double times[] = {t};
  return evolve_sampled(rho0, L, times, options).front();
}

}  // namespace darkcool
