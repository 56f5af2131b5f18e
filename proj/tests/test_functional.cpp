#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kw/functional.hpp"
#include "oracles.hpp"

using namespace kw;
using std::numbers::pi;

namespace {

SpectralField random_field(const TorusGeometry& geom, std::mt19937_64& rng, double scale) {
  const auto basis = eigenbasis(geom, 24);
  const auto c = oracle::random_vector(rng, basis.modes.size(), scale);
  return SpectralField::from_modes(geom, basis.modes, c);
}

}  // namespace

TEST_CASE("J at the zero field") {
  const auto geom = build_torus(1, 1, 32);
  const auto flat = FunctionalParams::subcritical(0.0, 0.1, WeightFunction::uniform(geom));
  CHECK(std::abs(eval_J(SpectralField(geom), flat)) <= 1e-14);

  const auto big = build_torus(2, 1, 32);
  const auto p = FunctionalParams::subcritical(3.0, 0.5, WeightFunction::uniform(big));
  CHECK(eval_J(SpectralField(big), p) == doctest::Approx(-4 * pi * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("J of a single mode against the Bessel oracle") {
  // h ≡ 1, u = t·sqrt(2) cos(2πx): ∫ e^u = I0(sqrt(2) t).
  const auto geom = build_torus(1, 1, 64);
  const auto modes = eigenspace_modes(geom, 1);
  Mode cosx;
  for (const auto& m : modes)
    if (m.m == 1 && m.n == 0 && m.parity == Parity::kCos) cosx = m;
  const double t = 1.3;
  const std::vector<double> c{t};
  const auto u = SpectralField::from_modes(geom, std::span<const Mode>(&cosx, 1), c);
  for (double alpha : {0.0, 10.0}) {
    const auto p = FunctionalParams::with_beta(alpha, 4 * pi, WeightFunction::uniform(geom));
    const double expected = 0.5 * t * t * (4 * pi * pi - alpha) -
                            4 * pi * std::log(oracle::bessel_i0(std::sqrt(2.0) * t));
    CHECK(eval_J(u, p) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(5);
  const auto geom = build_torus(1, 1, 32);
  for (double alpha : {0.0, 10.0}) {
    const auto p = FunctionalParams::with_beta(alpha, 4 * pi, WeightFunction::cosine(geom, 0.4));
    const Functional f(p);
    for (int trial = 0; trial < 10; ++trial) {
      const auto u = random_field(geom, rng, 0.5);
      const auto v = random_field(geom, rng, 1.0);
      const auto g = SpectralField::from_spectrum(geom, f.evaluate(u).gradient);
      const double d = 1e-5;
      const double fd = (f.value(u + v * d) - f.value(u - v * d)) / (2 * d);
      CHECK(std::abs(fd - g.inner(v)) <= 1e-6 * std::abs(g.inner(v)));
    }
  }
}

TEST_CASE("gradient lies in the admissible subspace") {
  std::mt19937_64 rng(8);
  const auto geom = build_torus(1, 1, 32);
  const auto p = FunctionalParams::with_beta(50.0, 4 * pi, WeightFunction::cosine(geom, 0.4), 1);
  const auto g = grad_J(random_field(geom, rng, 0.5), p);
  CHECK(g.mean() == 0.0);
  for (double c : g.coefficients(eigenspace_modes(geom, 1))) CHECK(c == 0.0);
  const auto& s = g.spectrum();
  for (int j = 0; j < s.columns(); ++j) CHECK(s.at(s.n / 2, j) == 0.0);
}

TEST_CASE("coercivity and mask") {
  const auto geom = build_torus(1, 1, 16);
  const auto h = WeightFunction::uniform(geom);
  CHECK(is_coercive(FunctionalParams::subcritical(0.9 * 4 * pi * pi, 0.1, h)));
  CHECK_FALSE(is_coercive(FunctionalParams::subcritical(4 * pi * pi, 0.1, h)));
  CHECK(is_coercive(FunctionalParams::subcritical(4 * pi * pi, 0.1, h, 1)));
  const auto mask = admissible_mask(geom, 1);
  int count = 0;
  for (bool b : mask) count += b;
  // 15 x 9 retained half-spectrum entries minus Nyquist column, mean and E_1.
  int expected = 0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 9; ++j) {
      if (i == 8 || j == 8 || (i == 0 && j == 0)) continue;
      const int m = i < 8 ? i : i - 16;
      if (m * m + j * j <= 1) continue;
      ++expected;
    }
  CHECK(count == expected);
}

TEST_CASE("large fields use the shifted mass") {
  const auto geom = build_torus(1, 1, 32);
  const auto modes = eigenspace_modes(geom, 1);
  const std::vector<double> c{600.0};
  const auto u = SpectralField::from_modes(geom, std::span<const Mode>(modes.data(), 1), c);
  const auto p = FunctionalParams::subcritical(0.0, 0.5, WeightFunction::uniform(geom));
  const auto ev = Functional(p).evaluate(u);
  CHECK(ev.mass.log_scaled());
  CHECK(std::isfinite(ev.J));
  CHECK(ev.mass.log() > 600.0);
  CHECK(ev.mass.log() <= std::sqrt(2.0) * 600.0);
}

TEST_CASE("residual, weak bound and energy identity at the trivial critical point") {
  const auto geom = build_torus(1, 1, 32);
  const auto h = WeightFunction::uniform(geom);
  const auto p = FunctionalParams::subcritical(0.0, 0.2, h);
  const SpectralField zero(geom);
  CHECK(el_residual(zero, p) <= 1e-14);
  CHECK(energy_identity_gap(zero, p) <= 1e-14);
  CHECK(weak_bound(p) == 0.0);
  CHECK(weak_bound_check(0.0, p));
  CHECK_FALSE(weak_bound_check(1e-6, p));
  const auto cosp = FunctionalParams::subcritical(0.0, 0.2, WeightFunction::cosine(geom, 0.3));
  CHECK(el_residual(zero, cosp) > 1e-3);
}
