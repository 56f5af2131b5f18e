#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "kw/field_io.hpp"
#include "oracles.hpp"

using namespace kw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kw_field_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("dump and load round-trip bit for bit") {
  std::mt19937_64 rng(11);
  const auto geom = build_torus(2.0, 0.75, 32);
  const auto values = oracle::random_vector(rng, geom.size(), 3.0);
  const auto dir = scratch("roundtrip");
  const auto paths = write_field(dir / "u", geom, values, "minimizer", {{"eps", "0.25"}});
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].extension() == ".desc");
  CHECK(fs::file_size(paths[1]) == geom.size() * 8);

  for (const fs::path& p : {dir / "u", dir / "u.desc", dir / "u.bin"}) {
    const FieldDump d = read_field(p);
    CHECK(d.geom == geom);
    CHECK(d.kind == "minimizer");
    CHECK(d.meta.at("eps") == "0.25");
    REQUIRE(d.values.size() == values.size());
    CHECK(std::memcmp(d.values.data(), values.data(), values.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("binary layout is little-endian and x-major") {
  const auto geom = build_torus(1, 1, 16);
  std::vector<double> values(geom.size(), 0.0);
  values[geom.index(1, 0)] = 1.0;
  const auto dir = scratch("layout");
  write_field(dir / "f", geom, values, "test");
  std::ifstream in(dir / "f.bin", std::ios::binary);
  std::vector<unsigned char> bytes(geom.size() * 8);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  // 1.0 = 0x3FF0000000000000 stored low byte first at sample 16.
  const std::size_t at = 16 * 8;
  for (int k = 0; k < 6; ++k) CHECK(bytes[at + k] == 0);
  CHECK(bytes[at + 6] == 0xF0);
  CHECK(bytes[at + 7] == 0x3F);

  std::ifstream desc(dir / "f.desc");
  std::string text((std::istreambuf_iterator<char>(desc)), std::istreambuf_iterator<char>());
  CHECK(text.find("N = 16") != std::string::npos);
  CHECK(text.find("Lx = 1") != std::string::npos);
  CHECK(text.find("kind = test") != std::string::npos);
}

TEST_CASE("malformed dumps are rejected") {
  const auto geom = build_torus(1, 1, 16);
  const std::vector<double> values(geom.size(), 0.5);
  const auto dir = scratch("bad");
  CHECK_THROWS(write_field(dir / "short", geom, std::span<const double>(values.data(), 10), "x"));
  CHECK_THROWS(read_field(dir / "missing"));

  write_field(dir / "trunc", geom, values, "x");
  fs::resize_file(dir / "trunc.bin", 100);
  CHECK_THROWS_WITH(read_field(dir / "trunc"), doctest::Contains("bytes"));

  write_field(dir / "nokind", geom, values, "x");
  std::ofstream(dir / "nokind.desc") << "N = 16\nLx = 1\nLy = 1\n";
  CHECK_THROWS_WITH(read_field(dir / "nokind"), doctest::Contains("kind"));
}
