#include "kw/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kw {

namespace {

namespace fs = std::filesystem;

fs::path stem_of(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".desc" || ext == ".bin") return fs::path(path).replace_extension();
  return path;
}

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  return fs::path(stem.string() + suffix);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int k = 0; k < 8; ++k) r |= ((v >> (8 * k)) & 0xffu) << (8 * (7 - k));
    return r;
  }
  return v;
}

}  // namespace

std::vector<fs::path> write_field(const fs::path& stem, const TorusGeometry& geom,
                                  std::span<const double> values, const std::string& kind,
                                  const std::map<std::string, std::string>& meta) {
  if (values.size() != geom.size()) {
    throw std::invalid_argument("field has " + std::to_string(values.size()) +
                                " samples, grid needs " + std::to_string(geom.size()));
  }
  const fs::path base = stem_of(stem);
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  const fs::path desc = with_suffix(base, ".desc");
  const fs::path bin = with_suffix(base, ".bin");

  std::ofstream d(desc);
  if (!d) throw std::runtime_error("cannot write " + desc.string());
  d << "N = " << geom.n() << "\n";
  d << "Lx = " << format_double(geom.lx()) << "\n";
  d << "Ly = " << format_double(geom.ly()) << "\n";
  d << "kind = " << kind << "\n";
  for (const auto& [k, v] : meta) d << k << " = " << v << "\n";
  if (!d) throw std::runtime_error("write failed: " + desc.string());

  std::vector<std::uint64_t> raw(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    raw[k] = to_little(std::bit_cast<std::uint64_t>(values[k]));
  }
  std::ofstream b(bin, std::ios::binary);
  if (!b) throw std::runtime_error("cannot write " + bin.string());
  b.write(reinterpret_cast<const char*>(raw.data()),
          static_cast<std::streamsize>(raw.size() * sizeof(std::uint64_t)));
  if (!b) throw std::runtime_error("write failed: " + bin.string());
  return {desc, bin};
}

FieldDump read_field(const fs::path& path) {
  const fs::path base = stem_of(path);
  const fs::path desc = with_suffix(base, ".desc");
  const fs::path bin = with_suffix(base, ".bin");

  std::ifstream d(desc);
  if (!d) throw std::runtime_error("cannot open " + desc.string());
  std::map<std::string, std::string> keys;
  std::string line;
  int lineno = 0;
  while (std::getline(d, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(desc.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    keys[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  for (const char* k : {"N", "Lx", "Ly", "kind"}) {
    if (!keys.count(k)) throw std::runtime_error(desc.string() + ": missing key " + k);
  }

  FieldDump out;
  out.geom = TorusGeometry(std::stod(keys["Lx"]), std::stod(keys["Ly"]), std::stoi(keys["N"]));
  out.kind = keys["kind"];
  for (const auto& [k, v] : keys)
    if (k != "N" && k != "Lx" && k != "Ly" && k != "kind") out.meta[k] = v;

  std::ifstream b(bin, std::ios::binary | std::ios::ate);
  if (!b) throw std::runtime_error("cannot open " + bin.string());
  const auto bytes = static_cast<std::size_t>(b.tellg());
  if (bytes != out.geom.size() * sizeof(double)) {
    throw std::runtime_error(bin.string() + ": expected " +
                             std::to_string(out.geom.size() * sizeof(double)) + " bytes, found " +
                             std::to_string(bytes));
  }
  b.seekg(0);
  std::vector<std::uint64_t> raw(out.geom.size());
  b.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  out.values.resize(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    out.values[k] = std::bit_cast<double>(to_little(raw[k]));
  }
  return out;
}

}  // namespace kw
