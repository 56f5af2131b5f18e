#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kw/surface.hpp"
#include "oracles.hpp"

using namespace kw;
using std::numbers::pi;

TEST_CASE("build_torus validates its inputs") {
  CHECK(build_torus(1, 1, 64).volume() == 1.0);
  CHECK(build_torus(2, 1, 64).volume() == 2.0);
  CHECK_THROWS_WITH(build_torus(1, 1, 7), "N must be a power of two ≥ 16");
  CHECK_THROWS_WITH(build_torus(1, 1, 8), "N must be a power of two ≥ 16");
  CHECK_THROWS(build_torus(0, 1, 16));
  CHECK_THROWS(build_torus(1, -2, 16));
}

TEST_CASE("unit torus spectrum") {
  const auto geom = build_torus(1, 1, 64);
  const auto basis = eigenbasis(geom, 40);
  CHECK(basis.distinct_eigenvalues[0] == doctest::Approx(4 * pi * pi).epsilon(1e-15));
  CHECK(basis.multiplicities[0] == 4);
  CHECK(basis.distinct_eigenvalues[1] == doctest::Approx(8 * pi * pi));
  int total = 0;
  for (int m : basis.multiplicities) total += m;
  CHECK(total == 40);
  for (std::size_t k = 1; k < basis.distinct_eigenvalues.size(); ++k)
    CHECK(basis.distinct_eigenvalues[k] > basis.distinct_eigenvalues[k - 1]);
  for (const auto& m : basis.modes) CHECK(m.eigenvalue == geom.eigenvalue(m.m, m.n));
}

TEST_CASE("rectangular torus first eigenvalue") {
  const auto geom = build_torus(2, 1, 32);
  CHECK(eigenbasis(geom, 4).distinct_eigenvalues[0] == doctest::Approx(pi * pi));
  CHECK(distinct_eigenvalue(geom, 1) == doctest::Approx(pi * pi));
}

TEST_CASE("eigenbasis rejects bad sizes") {
  const auto geom = build_torus(1, 1, 16);
  CHECK_THROWS(eigenbasis(geom, 3));
  CHECK_THROWS(eigenbasis(geom, 15 * 15));
  CHECK_NOTHROW(eigenbasis(geom, 15 * 15 - 1));
}

TEST_CASE("modes are orthonormal under the grid quadrature") {
  const auto geom = build_torus(1.3, 0.7, 32);
  const auto basis = eigenbasis(geom, 60);
  std::vector<std::vector<double>> samples;
  for (const auto& m : basis.modes) {
    std::vector<double> v(geom.size());
    for (int i = 0; i < geom.n(); ++i)
      for (int j = 0; j < geom.n(); ++j) v[geom.index(i, j)] = m.value(geom, geom.grid_point(i, j));
    samples.push_back(std::move(v));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < samples.size(); ++a)
    for (std::size_t b = a; b < samples.size(); ++b) {
      std::vector<double> prod(geom.size());
      for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = samples[a][k] * samples[b][k];
      worst = std::max(worst, std::abs(integrate(geom, prod) - (a == b ? 1.0 : 0.0)));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("eigenspace and resolved levels") {
  const auto geom = build_torus(1, 1, 16);
  CHECK(eigenspace_modes(geom, 0).empty());
  CHECK(eigenspace_modes(geom, 1).size() == 4);
  CHECK(eigenspace_modes(geom, 2).size() == 8);
  CHECK(eigenspace_modes(geom, 3).size() == 12);
  CHECK_THROWS(eigenspace_modes(geom, resolved_levels(geom) + 1));
}

TEST_CASE("geodesic distance") {
  const auto geom = build_torus(1, 1, 16);
  CHECK(geodesic_distance(geom, {0, 0}, {0.5, 0}) == doctest::Approx(0.5));
  CHECK(geodesic_distance(geom, {0, 0}, {0.9, 0}) == doctest::Approx(0.1));
  CHECK(geodesic_distance(geom, {0.1, 0.2}, {0.1, 0.2}) == 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const Point a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    CHECK(geodesic_distance(geom, a, b) == geodesic_distance(geom, b, a));
    CHECK(geodesic_distance(geom, a, c) <=
          geodesic_distance(geom, a, b) + geodesic_distance(geom, b, c) + 1e-15);
  }
}

TEST_CASE("integrate") {
  const auto geom = build_torus(1, 1, 64);
  std::vector<double> one(geom.size(), 1.0), c(geom.size()), e(geom.size());
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) {
      c[geom.index(i, j)] = std::cos(2 * pi * i / 64.0);
      e[geom.index(i, j)] = std::exp(std::cos(2 * pi * i / 64.0));
    }
  CHECK(integrate(geom, one) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(integrate(geom, c)) <= 1e-14);
  CHECK(integrate(geom, e) == doctest::Approx(oracle::bessel_i0(1.0)).epsilon(1e-13));
  CHECK(oracle::bessel_i0(1.0) == doctest::Approx(1.26606588).epsilon(1e-8));
  CHECK_THROWS(integrate(geom, std::vector<double>(10)));
}
