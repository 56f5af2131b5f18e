#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kw/config.hpp"

using namespace kw;

namespace {

bool mentions(const ConfigError& e, const std::string& what) {
  for (const auto& v : e.violations())
    if (v.find(what) != std::string::npos) return true;
  return false;
}

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("config was accepted: " << text);
  return ConfigError({});
}

// Random config that passes validation, drawn over every key.
ExperimentConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ExperimentConfig c;
  c.torus.lx = 0.5 + u(rng);
  c.torus.ly = 0.5 + u(rng);
  c.torus.n = 16 << (rng() % 4);
  const char* kinds[] = {"uniform", "cosine", "bump"};
  c.weight.kind = kinds[rng() % 3];
  c.weight.a = 0.9 * u(rng);
  c.weight.kappa = 20 * u(rng);
  c.weight.x0 = u(rng);
  c.weight.y0 = u(rng);
  c.run.pipeline = {Stage::kGreen, Stage::kTestfn};
  if (rng() % 2) c.run.pipeline.push_back(Stage::kSweep);
  c.run.alpha = 5 * u(rng);
  c.run.ell = static_cast<int>(rng() % 2);
  if (rng() % 2) c.run.eps = 0.05 + 0.9 * u(rng);
  c.run.eps_schedule = {0.5, 0.4 * u(rng) + 1e-3};
  c.run.beta = 30 + u(rng);
  c.run.p = {u(rng), u(rng)};
  c.run.method = rng() % 2 ? "split" : "extrapolate";
  c.run.eps_grid = {0.1, 0.01 * (1 + u(rng))};
  c.run.ks = {2 + u(rng), 100 * (1 + u(rng))};
  c.run.r = 0.1 * u(rng) + 1e-3;
  c.run.ts = {u(rng), 10 * u(rng)};
  c.run.input = rng() % 2 ? "" : "dumps/u";
  c.run.radius = 0.01 + u(rng);
  c.run.delta = 0.01 + u(rng);
  c.solver.tol = 1e-12 + 1e-6 * u(rng);
  c.solver.max_iter = 1 + static_cast<int>(rng() % 50000);
  c.output.directory = rng() % 2 ? "" : "out/run";
  c.output.formats = rng() % 2 ? std::vector<std::string>{"csv"} : std::vector<std::string>{"json", "fields"};
  return c;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = parse_config("");
  CHECK(c.torus.n == 128);
  CHECK(c.solver.tol == 1e-9);
  CHECK(c.torus.lx == 1.0);
  CHECK(c.weight.kind == "uniform");
  CHECK(c.run.pipeline.empty());
  CHECK_FALSE(c.run.eps.has_value());

  const auto d = parse_config("# comment\n\n  torus.Lx = 2   # trailing\nrun.eps=0.25\n");
  CHECK(d.torus.lx == 2.0);
  CHECK(d.run.eps == 0.25);
}

TEST_CASE("alpha above the first eigenvalue is rejected for minimization") {
  const auto e = error_of("run.pipeline = minimize\nrun.alpha = 50\nrun.eps = 0.1\n");
  CHECK(mentions(e, "run.alpha"));
  CHECK(mentions(e, "α < λ₁"));

  // λ₂ = 8π² on the unit torus admits α = 50 once E₁ is projected out.
  CHECK_NOTHROW(parse_config("run.pipeline = minimize\nrun.alpha = 50\nrun.ell = 1\nrun.eps = 0.1\n"));
  // Without a minimization stage α is unconstrained.
  CHECK_NOTHROW(parse_config("run.pipeline = green\nrun.alpha = 50\n"));
  // The bound follows the torus: λ₁ = π² on a 2 x 2 torus.
  const auto big = error_of("torus.Lx = 2\ntorus.Ly = 2\nrun.pipeline = sweep\nrun.alpha = 10\n"
                            "run.eps_schedule = 0.5, 0.1\n");
  CHECK(mentions(big, "run.alpha"));
}

TEST_CASE("eps schedule must be strictly decreasing") {
  CHECK(mentions(error_of("run.eps_schedule = 0.5, 0.5, 0.1\n"), "run.eps_schedule"));
  CHECK(mentions(error_of("run.eps_schedule = 0.1, 0.2\n"), "strictly decreasing"));
  CHECK(mentions(error_of("run.eps_grid = 1e-3, 1e-2\n"), "run.eps_grid"));
  CHECK_NOTHROW(parse_config("run.eps_schedule = 0.5, 0.2, 0.1\n"));
}

TEST_CASE("unknown keys and bad values are errors, all reported together") {
  const auto e = error_of("torus.N = 100\nweight.kind = gauss\nsolver.tol = abc\nrun.foo = 1\n"
                          "run.eps = 2\nrun.eps = 0.1\nno equals sign\n");
  CHECK(mentions(e, "torus.N"));
  CHECK(mentions(e, "weight.kind"));
  CHECK(mentions(e, "solver.tol: expected a number"));
  CHECK(mentions(e, "run.foo: unknown key"));
  CHECK(mentions(e, "run.eps: duplicate key"));
  CHECK(mentions(e, "line 7"));
  CHECK(e.violations().size() >= 6);

  CHECK(mentions(error_of("run.pipeline = green, fit\n"), "unknown stage"));
  CHECK(mentions(error_of("output.formats = csv, xml\n"), "output.formats"));
  CHECK(mentions(error_of("weight.kind = cosine\nweight.a = 1.5\n"), "weight.a"));
  CHECK(mentions(error_of("run.pipeline = probe-beta\nrun.beta = 20\n"), "run.beta"));
  CHECK(mentions(error_of("run.pipeline = probe-ray\nrun.alpha = 1\n"), "λ₁"));
  CHECK(mentions(error_of("run.pipeline = diagnose\n"), "run.input"));
  CHECK(mentions(error_of("run.pipeline = minimize\n"), "run.eps"));
}

TEST_CASE("serialization round-trips losslessly") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_config(rng);
    REQUIRE(validate(c).empty());
    const auto text = to_text(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(to_text(back) == text);
    CHECK(config_hash(back) == config_hash(c));
  }
}

TEST_CASE("hash tracks every value") {
  ExperimentConfig a;
  ExperimentConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.run.alpha = std::nextafter(0.0, 1.0);
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hash_hex(0x1234).size() == 16);
  CHECK(hash_hex(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("weight blocks build the catalog") {
  const auto geom = build_torus(1, 1, 16);
  WeightConfig w;
  w.kind = "cosine";
  w.a = 0.5;
  CHECK(w.build(geom)(Point{0, 0}) == doctest::Approx(1.5));
  w.kind = "bump";
  w.a = 1.0;
  w.kappa = 8.0;
  w.x0 = 0.25;
  w.y0 = 0.25;
  CHECK(w.build(geom)(Point{0.25, 0.25}) == doctest::Approx(2.0));
  w.kind = "nope";
  CHECK_THROWS(w.build(geom));
}
