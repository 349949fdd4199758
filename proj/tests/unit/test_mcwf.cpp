#include <cmath>
#include <vector>

#include "darkcool/error.hpp"
#include "darkcool/mcwf.hpp"
#include "doctest.h"

using namespace darkcool;

namespace {

GridSpec small_grid(int N = 8, double kappa = 80.0) {
  GridSpec g;
  g.halfwidth = N;
  g.kappa = kappa;
  return g;
}

}  // namespace

TEST_SUITE("mcwf") {
  TEST_CASE("Philox4x64 matches the numpy bit generator") {
    Philox4x64 a(0, 0);
    const std::uint64_t ka[8] = {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
                                 0x907d7a052fd5b4dcULL, 0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
                                 0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL};
    for (auto v : ka) CHECK(a() == v);
    Philox4x64 b(0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL);
    const std::uint64_t kb[8] = {0xd96148ed4eef3177ULL, 0x3756c9977974e2e4ULL, 0xaca97084472822a9ULL,
                                 0xf84393111bc816fcULL, 0xafeacafa58106bc2ULL, 0x8ceec2cd5d66be03ULL,
                                 0xf35d32a580766947ULL, 0x71552ce89be91f93ULL};
    for (auto v : kb) CHECK(b() == v);
  }

  TEST_CASE("effective Hamiltonian structure") {
    const auto cfg = presets::fig3().with_detuning(-0.2);
    const auto g = small_grid(4);
    const EffectiveHamiltonian h(cfg, g);
    const Eigen::MatrixXcd H(h.hermitian());
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    for (int n = -3; n < 4; ++n) {
      CHECK(H(g.index(kLevel2, n + 1), g.index(kLevel3, n)).real() == doctest::Approx(cfg.g_p));
      CHECK(H(g.index(kLevel2, n - 1), g.index(kLevel3, n)).real() == doctest::Approx(cfg.g_p));
      CHECK(H(g.index(kLevel3, n), g.index(kLevel3, n)).real() ==
            doctest::Approx(-0.2 + n * n / g.kappa));
    }
    const Eigen::MatrixXcd A = (Eigen::MatrixXcd(h.matrix()) - H) * std::complex<double>(0.0, 1.0);
    for (int n = -4; n <= 4; ++n) {
      CHECK(A(g.index(kLevel1, n), g.index(kLevel1, n)).real() == doctest::Approx(0.0));
      CHECK(A(g.index(kLevel2, n), g.index(kLevel2, n)).real() == doctest::Approx(0.5 * 0.14));
      CHECK(A(g.index(kLevel3, n), g.index(kLevel3, n)).real() == doctest::Approx(0.0));
      CHECK(A(g.index(kLevel4, n), g.index(kLevel4, n)).real() == doctest::Approx(0.5 * 1.79));
    }
  }

  TEST_CASE("no probe keeps momentum sectors decoupled") {
    auto cfg = presets::fig3();
    cfg.g_p = 0.0;
    const auto g = small_grid(3);
    const Eigen::MatrixXcd H(EffectiveHamiltonian(cfg, g).matrix());
    for (int a = 0; a < g.dim(); ++a)
      for (int b = 0; b < g.dim(); ++b)
        if (a / 4 != b / 4) CHECK(H(a, b) == std::complex<double>(0.0));
  }

  TEST_CASE("norm decays as exp(-gamma23 t) from level 2") {
    DriveConfig c;
    c.gamma23 = 0.14;
    const auto g = GridSpec::frozen_motion();
    const EffectiveHamiltonian h(c, g);
    auto s = MotionalState::gaussian(g, kLevel2, 0.0);
    const double dt = 0.05;
    for (int k = 0; k < 200; ++k) step(s, h, dt);
    CHECK(s.norm2() == doctest::Approx(std::exp(-0.14 * 10.0)).epsilon(1e-9));
  }

  TEST_CASE("norm is conserved without decay and never grows with it") {
    auto c = presets::fig3();
    c.gamma41 = c.gamma42 = c.gamma23 = c.gamma13 = 0.0;
    c.g_p = 0.3;
    const auto g = small_grid(6);
    const EffectiveHamiltonian h(c, g);
    auto s = MotionalState::gaussian(g, kLevel3, 1.0);
    for (int k = 0; k < 100; ++k) {
      const double before = s.norm2();
      step(s, h, 0.005);
      CHECK(std::abs(s.norm2() - before) < 1e-12);
    }
    const SpectralPropagator sp(h);
    const auto modes = sp.to_modes(MotionalState::gaussian(g, kLevel3, 1.0).amplitudes());
    CHECK(std::abs(sp.norm2(modes, 1e6) - 1.0) < 1e-10);

    const EffectiveHamiltonian hd(presets::fig3_1(), g);
    auto sd = MotionalState::gaussian(g, kLevel4, 1.0);
    double prev = sd.norm2();
    for (int k = 0; k < 200; ++k) {
      step(sd, hd, hd.suggested_dt());
      CHECK(sd.norm2() <= prev + 1e-15);
      prev = sd.norm2();
    }
  }

  TEST_CASE("jumps: channel split, recoil signs and bookkeeping") {
    const auto cfg = presets::fig3_1();
    const auto g = small_grid(2);
    const EffectiveHamiltonian h(cfg, g);
    Philox4x64 rng(7, 11);
    int n41 = 0, n42 = 0, plus = 0;
    const int trials = 10000;
    for (int k = 0; k < trials; ++k) {
      auto s = MotionalState::gaussian(g, kLevel4, 0.0);
      const auto e = jump(s, h, rng);
      CHECK(std::abs(s.norm2() - 1.0) < 1e-14);
      const auto& ch = h.channels()[e.channel];
      REQUIRE(ch.upper == kLevel4);
      if (ch.lower == kLevel1) ++n41;
      if (ch.lower == kLevel2) ++n42;
      REQUIRE(std::abs(e.sign) == 1);
      if (e.sign > 0) ++plus;
      CHECK(std::abs(s.amplitudes()(g.index(ch.lower, e.sign))) == doctest::Approx(1.0));
      CHECK(s.p_mean() == doctest::Approx(e.sign));
    }
    const double f = static_cast<double>(n41) / trials;
    const double sig = std::sqrt(0.25 / trials);
    CHECK(std::abs(f - 1.0 / 1.79) < 3.0 * std::sqrt(f * (1 - f) / trials));
    CHECK(n41 + n42 == trials);
    CHECK(std::abs(static_cast<double>(plus) / trials - 0.5) < 3.0 * sig);
  }

  TEST_CASE("every recorded jump moves momentum by one recoil") {
    auto cfg = presets::fig3_1().with_detuning(-2.0);
    cfg.g_p = 0.05;
    const auto g = small_grid(40, 80.0);
    TrajectoryOptions o;
    o.initial_width = 1.0;
    const auto r = run_trajectory(cfg, g, 2000.0, 3, o);
    REQUIRE(r.jump_count > 5);
    CHECK(static_cast<long>(r.jumps.size()) == r.jump_count);
    for (const auto& j : r.jumps) CHECK(std::abs(j.sign) == 1);
  }

  TEST_CASE("same seed gives bit-identical trajectories") {
    auto cfg = presets::fig3_1().with_detuning(-2.0);
    cfg.g_p = 0.05;
    const auto g = small_grid(30);
    TrajectoryOptions o;
    o.initial_width = 1.0;
    const auto a = run_trajectory(cfg, g, 500.0, 42, o);
    const auto b = run_trajectory(cfg, g, 500.0, 42, o);
    const auto c = run_trajectory(cfg, g, 500.0, 43, o);
    CHECK(a.p2_mean == b.p2_mean);
    CHECK(a.p_mean == b.p_mean);
    CHECK(a.jump_count == b.jump_count);
    CHECK(a.p2_mean != c.p2_mean);
  }

  TEST_CASE("rk4 and spectral propagators agree") {
    auto cfg = presets::fig3_1().with_detuning(-1.0);
    cfg.g_p = 0.05;
    const auto g = small_grid(10);
    TrajectoryOptions o;
    o.initial_width = 1.0;
    o.samples = 5;
    const auto a = run_trajectory(cfg, g, 40.0, 5, o);
    o.propagator = Propagator::rk4;
    const auto b = run_trajectory(cfg, g, 40.0, 5, o);
    REQUIRE(a.jump_count == b.jump_count);
    for (std::size_t k = 0; k < a.p2_mean.size(); ++k)
      CHECK(a.p2_mean[k] == doctest::Approx(b.p2_mean[k]).epsilon(1e-4));
  }

  TEST_CASE("a drive-free ensemble keeps the initial envelope") {
    DriveConfig c;
    c.gamma23 = 0.14;
    const auto g = small_grid(30);
    EnsembleOptions o;
    o.trajectory.initial_width = 3.0;
    o.trajectory.samples = 20;
    const auto r = ensemble_temperature(c, g, 100.0, 4, 1, o);
    const auto s0 = MotionalState::gaussian(g, kLevel3, 3.0);
    CHECK(r.failures == 0);
    CHECK(r.temperature == doctest::Approx(2.0 * s0.p2_mean()).epsilon(1e-12));
    CHECK(r.total_jumps == 0);
  }

  TEST_CASE("grid boundary violations are reported with a time") {
    DriveConfig c;
    c.gamma23 = 0.14;
    const auto g = small_grid(3);
    TrajectoryOptions o;
    o.initial_width = 3.0;
    CHECK_THROWS_AS(run_trajectory(c, g, 1.0, 1, o), GridError);
  }

  TEST_CASE("plateau detection") {
    std::vector<double> t;
    std::vector<std::vector<double>> p2(8);
    Philox4x64 rng(1, 2);
    for (int k = 0; k < 100; ++k) {
      t.push_back(k);
      for (auto& row : p2) row.push_back(1.0 + 10.0 * std::exp(-k / 5.0) + 0.01 * rng.uniform());
    }
    const std::array<double, 3> starts{0.2, 0.4, 0.6};
    const auto p = detect_plateau(t, p2, starts, 0.75);
    CHECK(p.found);
    CHECK(p.first_sample >= 20);
  }

  TEST_CASE("unraveling reproduces the master equation at both presets") {
    for (const auto& cfg : {presets::fig3_1(), presets::fig3()}) {
      const auto r = validate_against_master_equation(cfg, 20.0, 500);
      CHECK(r.passed);
      CHECK(r.max_z < 3.0);
    }
  }

  TEST_CASE("unraveling is exact without decay") {
    auto c = presets::fig3();
    c.gamma41 = c.gamma42 = c.gamma23 = c.gamma13 = 0.0;
    const auto r = validate_against_master_equation(c, 5.0, 4);
    CHECK(r.passed);
    CHECK(r.max_deviation < 1e-7);
  }

  TEST_CASE("Monte Carlo error shrinks as M^-1/2") {
    const auto cfg = presets::fig3_1();
    const auto a = validate_against_master_equation(cfg, 20.0, 100);
    const auto b = validate_against_master_equation(cfg, 20.0, 400);
    const double ratio = a.max_sigma / b.max_sigma;
    CHECK(ratio > 1.0);
    CHECK(ratio < 3.0);
  }
}
