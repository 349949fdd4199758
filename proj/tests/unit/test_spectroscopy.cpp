#include <cmath>

#include "darkcool/error.hpp"
#include "darkcool/spectroscopy.hpp"
#include "doctest.h"

using namespace darkcool;

TEST_SUITE("spectroscopy") {
  TEST_CASE("three-level oracle agrees pointwise within 1%") {
    const auto cfg = presets::fig3_1();
    for (int k = 0; k <= 160; ++k) {
      const double dp = -8.0 + 0.1 * k;
      const auto a = chi_at(cfg, dp);
      const auto b = three_level_chi(cfg, dp);
      CHECK(std::abs(a - b) <= 1e-2 * std::abs(b));
    }
  }

  TEST_CASE("two-level limit is a Lorentzian") {
    DriveConfig c;
    c.g_p = 1e-5;
    c.gamma23 = 1.0;
    c.gamma13 = 1.0;
    c.gamma41 = 1.0;
    for (double dp : {-3.0, -0.5, 0.0, 0.7}) {
      const auto expected = 1.0 / std::complex<double>(dp, -0.5);
      CHECK(std::abs(chi_at(c, dp) - expected) < 1e-6 * std::abs(expected));
    }
  }

  TEST_CASE("spectral parity at both presets") {
    for (const auto& cfg : {presets::fig3_1(), presets::fig3()}) {
      for (double dp : {1e-6, 1e-3, 0.37, 2.0, 3.96, 7.5}) {
        const auto a = chi_at(cfg, dp);
        const auto b = chi_at(cfg, -dp);
        CHECK(a.imag() == doctest::Approx(b.imag()).epsilon(1e-8));
        CHECK(a.real() == doctest::Approx(-b.real()).epsilon(1e-8).scale(1e-12));
      }
    }
  }

  TEST_CASE("absorption is non-negative") {
    const auto s = spectrum_scan(presets::fig3(), -8.0, 8.0, 801, GridKind::uniform);
    REQUIRE(s.samples.size() == 801);
    for (const auto& x : s.samples) CHECK(x.chi.imag() > -1e-12);
  }

  TEST_CASE("uniform grid includes both endpoints") {
    const auto s = spectrum_scan(presets::fig3_1(), -1.0, 2.0, 7, GridKind::uniform);
    REQUIRE(s.samples.size() == 7);
    CHECK(s.samples.front().delta_p == -1.0);
    CHECK(s.samples.back().delta_p == 2.0);
    CHECK(s.samples[2].delta_p == doctest::Approx(0.0));
  }

  TEST_CASE("scan argument checks") {
    CHECK_THROWS_AS(spectrum_scan(presets::fig3_1(), 1.0, -1.0, 11, GridKind::uniform), DomainError);
    CHECK_THROWS_AS(spectrum_scan(presets::fig3_1(), -1.0, 1.0, 1, GridKind::uniform), DomainError);
    DriveConfig c = presets::fig3_1();
    c.g_p = 0.0;
    CHECK_THROWS_AS(chi_at(c, 0.0), DomainError);
    CHECK(parse_grid_kind("log_dense") == GridKind::log_dense);
    CHECK_THROWS_AS(parse_grid_kind("spiral"), ConfigError);
  }

  TEST_CASE("feature finder on a synthetic doublet with a spike") {
    Spectrum s;
    auto lor = [](double x, double c, double w) { return 1.0 / (1.0 + 4.0 * (x - c) * (x - c) / (w * w)); };
    for (int k = 0; k <= 4000; ++k) {
      const double x = -8.0 + 16.0 * k / 4000.0;
      const double y = lor(x, -4.0, 1.0) + lor(x, 4.0, 1.0) + 0.5 * lor(x, 0.0, 0.05);
      s.samples.push_back({x, {0.0, y}});
    }
    const auto f = locate_features(s);
    REQUIRE(f.peaks.size() == 2);
    CHECK(f.peaks[0].center == doctest::Approx(-4.0).epsilon(1e-3));
    CHECK(f.peaks[1].center == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(f.peaks[0].fwhm == doctest::Approx(1.0).epsilon(0.02));
    REQUIRE(f.spike.has_value());
    CHECK(std::abs(f.spike->center) < 1e-3);
    CHECK(f.spike->fwhm == doctest::Approx(0.05).epsilon(0.05));
  }

  TEST_CASE("moving coherence reduces to the standing-wave response at rest") {
    const auto cfg = presets::fig3_1();
    const double dp = -2.0, kx = 0.4;
    const auto rho32 = moving_coherence(cfg, dp, 0.0, kx, 82.0);
    CHECK(std::abs(rho32 - 2.0 * std::cos(kx) * cfg.g_p * chi_at(cfg, dp)) <
          1e-12 * std::abs(rho32));
  }
}
