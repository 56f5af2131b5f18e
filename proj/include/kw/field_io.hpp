#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kw/surface.hpp"

namespace kw {

/// Grid samples read back from disk. `meta` holds descriptor keys beyond
/// N, Lx, Ly and kind (e.g. the source point of a Green function).
struct FieldDump {
  TorusGeometry geom{1.0, 1.0, 16};
  std::string kind;
  std::map<std::string, std::string> meta;
  std::vector<double> values;
};

/// Writes `<stem>.bin` (raw little-endian doubles, x-major grid order) and
/// `<stem>.desc` (key = value text). Returns both paths, descriptor first.
std::vector<std::filesystem::path> write_field(
    const std::filesystem::path& stem, const TorusGeometry& geom,
    std::span<const double> values, const std::string& kind,
    const std::map<std::string, std::string>& meta = {});

/// Accepts the stem, the `.desc` path or the `.bin` path.
FieldDump read_field(const std::filesystem::path& path);

}  // namespace kw
