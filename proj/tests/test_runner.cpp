#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "kw/runner.hpp"

using namespace kw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kw_runner_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

bool any_failed(const RunManifest& m) {
  for (const auto& op : m.operations)
    for (const auto& c : op.checks)
      if (!c.passed) return true;
  return false;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.torus.n = 32;
  return c;
}

}  // namespace

TEST_CASE("uniform-weight sweep is bounded") {
  auto c = small_config();
  c.run.pipeline = {Stage::kSweep};
  c.run.eps_schedule = {0.5, 0.2, 0.1, 0.05};
  const auto dir = scratch("sweep");
  const auto m = run(c, dir, 1);
  REQUIRE(m.operations.size() == 1);
  CHECK(m.operations[0].status == "ok");
  CHECK(m.operations[0].message == "verdict bounded");
  CHECK(m.exit_code() == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "sweep.json"));
  CHECK(j["verdict"] == "bounded");
  CHECK(j["records"].size() == 4);
  for (const auto& r : j["records"]) CHECK(r["J"].get<double>() == 0.0);
  CHECK(csv_rows(dir / "sweep.csv").size() == 5);
}

TEST_CASE("testfn emits one row per eps with decreasing residuals") {
  auto c = small_config();
  c.torus.n = 128;
  c.weight.kind = "cosine";
  c.weight.a = 0.5;
  c.run.alpha = 2 * std::acos(-1.0) * std::acos(-1.0);
  c.run.pipeline = {Stage::kTestfn};
  const auto dir = scratch("testfn");
  const auto m = run(c, dir, 3);
  REQUIRE(m.operations[0].status == "ok");
  const auto rows = csv_rows(dir / "testfn.csv");
  REQUIRE(rows.size() == 4);
  const auto& header = rows[0];
  for (const char* name : {"dirichlet_residual", "log_mass_residual", "J_residual"}) {
    const auto col = std::find(header.begin(), header.end(), name) - header.begin();
    REQUIRE(col < static_cast<long>(header.size()));
    CHECK(std::stod(rows[2][col]) < std::stod(rows[1][col]));
    CHECK(std::stod(rows[3][col]) < std::stod(rows[2][col]));
  }
  const auto j = nlohmann::json::parse(slurp(dir / "testfn.json"));
  CHECK(j.contains("target_constant"));
  CHECK(m.exit_code() == (any_failed(m) ? 1 : 0));

  // Thread count does not change the table.
  const auto serial = scratch("testfn_serial");
  run(c, serial, 1);
  CHECK(slurp(serial / "testfn.csv") == slurp(dir / "testfn.csv"));
}

TEST_CASE("identical configs give bit-identical CSV and complete manifests") {
  auto c = small_config();
  c.weight.kind = "cosine";
  c.weight.a = 0.3;
  c.run.pipeline = {Stage::kGreen, Stage::kMinimize, Stage::kDiagnose, Stage::kProbeBeta};
  c.run.eps = 0.5;
  c.run.ks = {1e8, 1e10, 1e12};
  c.output.formats = {"csv", "json", "fields"};
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const auto ma = run(c, a, 2);
  const auto mb = run(c, b, 2);
  CHECK(ma.config_hash == mb.config_hash);
  REQUIRE(ma.files == mb.files);
  int csv = 0;
  for (const auto& f : ma.files) {
    if (fs::path(f).extension() == ".csv") {
      ++csv;
      CHECK(slurp(a / f) == slurp(b / f));
    }
  }
  CHECK(csv == 4);
  CHECK(manifest_problems(a).empty());
  CHECK(manifest_problems(b).empty());
  for (const char* f : {"config.kw", "green.desc", "green.bin", "minimize.desc", "minimize.bin"}) {
    CHECK(std::find(ma.files.begin(), ma.files.end(), f) != ma.files.end());
  }

  const auto man = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(man["config_hash"] == ma.config_hash);
  CHECK(man["operations"].size() == 4);
  CHECK(man["exit_code"] == ma.exit_code());

  std::ofstream(a / "stray.txt") << "x";
  fs::remove(a / "green.json");
  const auto problems = manifest_problems(a);
  CHECK(problems.size() == 2);
}

TEST_CASE("the saved config reproduces the run") {
  auto c = small_config();
  c.run.pipeline = {Stage::kProbeRay};
  c.run.alpha = 4 * std::acos(-1.0) * std::acos(-1.0);
  const auto a = scratch("replay_a");
  run(c, a, 1);
  const auto again = load_config(a / "config.kw");
  CHECK(again == c);
  const auto b = scratch("replay_b");
  run(again, b, 1);
  CHECK(slurp(a / "probe-ray.csv") == slurp(b / "probe-ray.csv"));
  const auto header = slurp(a / "probe-ray.csv").substr(0, 24);
  CHECK(header == "# kw-csv v1 stage=probe-");
}

TEST_CASE("stage failures are recorded and set the exit code") {
  auto c = small_config();
  c.run.pipeline = {Stage::kDiagnose};
  c.run.input = "/nonexistent/u";
  c.run.green = "/nonexistent/g";
  const auto dir = scratch("fail");
  const auto m = run(c, dir, 1);
  REQUIRE(m.operations.size() == 1);
  CHECK(m.operations[0].status == "failed");
  CHECK(m.operations[0].message.find("cannot open") != std::string::npos);
  CHECK(m.exit_code() == 2);
  CHECK(manifest_problems(dir).empty());
}

TEST_CASE("failing checks set exit code 1") {
  auto c = small_config();
  c.torus.n = 64;
  c.run.pipeline = {Stage::kProbeBeta};
  c.run.ks = {1e2, 1e3, 1e4};
  const auto m = run(c, scratch("probe"), 1);
  CHECK(m.operations[0].status == "ok");
  CHECK(any_failed(m));
  CHECK(m.exit_code() == 1);
}

TEST_CASE("invalid configs are refused before anything is written") {
  auto c = small_config();
  c.run.pipeline = {Stage::kMinimize};
  const auto dir = scratch("invalid");
  CHECK_THROWS_AS(run(c, dir, 1), ConfigError);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("output directory resolution") {
  ExperimentConfig c;
  c.output.directory = "somewhere";
  CHECK(resolve_output_dir(c) == fs::path("somewhere"));
  c.output.directory.clear();
  const auto p = resolve_output_dir(c);
  CHECK(p.filename().string() == "run-" + hash_hex(config_hash(c)));
  CHECK(env_threads() >= 1);
}
