#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kw/fields.hpp"
#include "oracles.hpp"

using namespace kw;
using std::numbers::pi;

namespace {

SpectralField random_field(const TorusGeometry& geom, std::mt19937_64& rng,
                           int modes, double scale, double mean = 0.0) {
  const auto basis = eigenbasis(geom, modes);
  const auto c = oracle::random_vector(rng, basis.modes.size(), scale);
  return SpectralField::from_modes(geom, basis.modes, c, mean);
}

}  // namespace

TEST_CASE("synthesize and analyze") {
  const auto geom = build_torus(1, 1, 32);
  const auto basis = eigenbasis(geom, 20);
  std::vector<double> coeffs(basis.modes.size(), 0.0);
  CHECK(synthesize(geom, basis.modes, coeffs) == std::vector<double>(geom.size(), 0.0));

  // Mode 0 is cos(2πx): coefficient 1 gives √2 cos(2πx).
  REQUIRE(basis.modes[0].m == 0);
  coeffs[0] = 1.0;
  const auto grid = synthesize(geom, basis.modes, coeffs);
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j)
      CHECK(grid[geom.index(i, j)] ==
            doctest::Approx(basis.modes[0].value(geom, geom.grid_point(i, j))).epsilon(1e-13));

  std::mt19937_64 rng(11);
  const auto all = eigenbasis(geom, 31 * 31 - 1);
  const auto c = oracle::random_vector(rng, all.modes.size());
  const auto g = synthesize(geom, all.modes, c, 0.3);
  const auto back = analyze(geom, all.modes, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) worst = std::max(worst, std::abs(back[k] - c[k]));
  CHECK(worst <= 1e-11);
  const auto again = SpectralField::from_grid(geom, g);
  worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(again.grid()[k] - g[k]));
  CHECK(worst <= 1e-11);
  CHECK(again.mean() == doctest::Approx(0.3));
}

TEST_CASE("h1_alpha_norm") {
  const auto geom = build_torus(1, 1, 32);
  const auto modes = eigenspace_modes(geom, 1);
  const double c = 0.7;
  const auto u = SpectralField::from_modes(geom, std::span(modes).first(1), std::vector<double>{c});
  CHECK(h1_alpha_norm(u, 0.0) == doctest::Approx(c * 2 * pi).epsilon(1e-14));
  CHECK(std::abs(h1_alpha_norm(u, 4 * pi * pi)) <= 1e-6);
  CHECK(h1_alpha_norm(u, 50.0) < 0.0);

  // Grid quadrature of |∇u|² − αu² with spectral derivatives.
  std::mt19937_64 rng(3);
  const auto v = random_field(geom, rng, 60, 0.3);
  const auto dx = v.derivative_x();
  const auto dy = v.derivative_y();
  std::vector<double> integrand(geom.size());
  for (std::size_t k = 0; k < integrand.size(); ++k)
    integrand[k] = dx.grid()[k] * dx.grid()[k] + dy.grid()[k] * dy.grid()[k] -
                   10.0 * v.grid()[k] * v.grid()[k];
  const double q = integrate(geom, integrand);
  CHECK(quadratic_form(v, 10.0) == doctest::Approx(q).epsilon(1e-9));
  CHECK(h1_alpha_norm(v, 10.0) == doctest::Approx(std::sqrt(q)).epsilon(1e-9));
}

TEST_CASE("Parseval") {
  const auto geom = build_torus(1.5, 0.8, 32);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const auto u = random_field(geom, rng, 100, 1.0, 0.4);
    const auto basis = eigenbasis(geom, 100);
    double s = u.mean() * u.mean() * geom.volume();
    for (double c : u.coefficients(basis.modes)) s += c * c;
    std::vector<double> sq(geom.size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = u.grid()[k] * u.grid()[k];
    CHECK(u.l2_norm_squared() == doctest::Approx(s).epsilon(1e-10));
    CHECK(integrate(geom, sq) == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("projections") {
  const auto geom = build_torus(1, 1, 32);
  std::vector<double> three(geom.size(), 3.0);
  const auto c3 = SpectralField::from_grid(geom, three);
  CHECK(project_mean_zero(c3).l2_norm_squared() <= 1e-24);

  const auto basis = eigenbasis(geom, 4);
  const auto cosmode = SpectralField::from_modes(geom, std::span(basis.modes).first(1),
                                                 std::vector<double>{1.0}, 3.0);
  const auto stripped = project_mean_zero(cosmode);
  CHECK(std::abs(stripped.mean()) <= 1e-15);
  CHECK(stripped.coefficient(basis.modes[0]) == doctest::Approx(1.0));
  CHECK(project_mean_zero(stripped).spectrum().data == stripped.spectrum().data);

  const auto e1 = eigenspace_modes(geom, 1);
  std::mt19937_64 rng(9);
  const auto in_e1 = SpectralField::from_modes(geom, e1, oracle::random_vector(rng, e1.size()));
  CHECK(project_perp(in_e1, 1).l2_norm_squared() <= 1e-28);

  const auto u = random_field(geom, rng, 200, 1.0, 0.5);
  const auto p1 = project_perp(u, 1);
  for (double c : p1.coefficients(e1)) CHECK(std::abs(c) <= 1e-12);
  CHECK(project_perp(p1, 1).spectrum().data == p1.spectrum().data);

  const auto e2 = eigenspace_modes(geom, 2);
  const auto p2 = project_perp(u, 2);
  for (double c : p2.coefficients(e2)) CHECK(std::abs(c) <= 1e-12);
  CHECK(project_perp(p2, 1).spectrum().data == p2.spectrum().data);
  CHECK(std::abs(project_perp(u, 0).mean()) <= 1e-15);
}

TEST_CASE("weights") {
  const auto geom = build_torus(1, 1, 32);
  const auto u = WeightFunction::uniform(geom);
  for (double v : u.samples()) CHECK(v == 1.0);
  const auto c = WeightFunction::cosine(geom, 0.5);
  CHECK(c.max_h() == doctest::Approx(1.5));
  CHECK(c.min_h() == doctest::Approx(0.5));
  CHECK(c.total() == doctest::Approx(1.0).epsilon(1e-14));
  const auto b = WeightFunction::bump(geom, 1.0, 8.0, 0.25, 0.25);
  CHECK(b.argmax().x == doctest::Approx(0.25));
  CHECK(b.argmax().y == doctest::Approx(0.25));
  CHECK(b.min_h() > 1.0);
  CHECK_THROWS(WeightFunction::cosine(geom, 1.0));
  CHECK_THROWS(WeightFunction::bump(geom, -1.0, 1.0, 0, 0));
}

TEST_CASE("exp_mass") {
  const auto geom = build_torus(1, 1, 64);
  const auto zero = SpectralField(geom);
  const auto h1 = WeightFunction::uniform(geom);
  CHECK(exp_mass(zero, h1).value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exp_mass(zero, WeightFunction::cosine(geom, 0.5)).value() ==
        doctest::Approx(1.0).epsilon(1e-14));

  const auto modes = eigenspace_modes(geom, 1);
  for (double t : {0.5, 2.0, 6.0}) {
    const auto u = SpectralField::from_modes(geom, std::span(modes).first(1), std::vector<double>{t});
    CHECK(exp_mass(u, h1).value() ==
          doctest::Approx(oracle::bessel_i0(std::sqrt(2.0) * t)).epsilon(1e-12));
  }

  // Log-shifted regime: the mass of u + c is e^c times the mass of u.
  const auto u = SpectralField::from_modes(geom, std::span(modes).first(1), std::vector<double>{1.0});
  const auto big = u.plus_constant(900.0);
  const auto m = exp_mass(big, h1);
  CHECK(m.log_scaled());
  CHECK(m.log() == doctest::Approx(900.0 + std::log(oracle::bessel_i0(std::sqrt(2.0)))).epsilon(1e-14));

  // Monotone in pointwise-ordered inputs.
  std::mt19937_64 rng(2);
  const auto basis = eigenbasis(geom, 30);
  const auto v = SpectralField::from_modes(geom, basis.modes, oracle::random_vector(rng, 30, 0.2));
  const auto w = v.plus_constant(0.01);
  CHECK(exp_mass(v, h1).value() < exp_mass(w, h1).value());
}

TEST_CASE("fit_peak") {
  const auto geom = build_torus(1, 1, 64);
  const auto modes = eigenspace_modes(geom, 1);
  const auto u = SpectralField::from_modes(geom, std::span(modes).first(1), std::vector<double>{1.0});
  const auto fit = fit_peak(u.grid(), 64, 1, 1);
  CHECK(fit.location.x == doctest::Approx(0.0));
  CHECK(fit.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(fit.degenerate);  // constant along y

  const auto flat = fit_peak(std::vector<double>(64 * 64, 0.0), 64, 1, 1);
  CHECK(flat.degenerate);
  CHECK(flat.value == 0.0);
}
