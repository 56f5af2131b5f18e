#include "kw/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace kw {

namespace {

constexpr std::array<std::pair<Stage, std::string_view>, 7> kStages{{
    {Stage::kGreen, "green"},
    {Stage::kMinimize, "minimize"},
    {Stage::kSweep, "sweep"},
    {Stage::kTestfn, "testfn"},
    {Stage::kProbeBeta, "probe-beta"},
    {Stage::kProbeRay, "probe-ray"},
    {Stage::kDiagnose, "diagnose"},
}};

const std::set<std::string, std::less<>> kFormats{"csv", "json", "fields"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view what) {
  throw ConfigError({std::string(key) + ": " + std::string(what) + ", got '" +
                     std::string(value) + "'"});
}

double to_double(std::string_view key, std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    bad_value(key, s, "expected a number");
  }
  return v;
}

int to_int(std::string_view key, std::string_view s) {
  s = trim(s);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    bad_value(key, s, "expected an integer");
  }
  return v;
}

std::vector<double> to_doubles(std::string_view key, std::string_view s) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(to_double(key, item));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += format_double(v[k]);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    out += f(v[k]);
  }
  return out;
}

struct Key {
  std::string_view name;
  std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
  /// Empty optional: the key is at its unset state and is not printed.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  using SV = std::string_view;
  static const std::vector<Key> table = {
      {"torus.Lx", [](C& c, SV k, SV v) { c.torus.lx = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.torus.lx)); }},
      {"torus.Ly", [](C& c, SV k, SV v) { c.torus.ly = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.torus.ly)); }},
      {"torus.N", [](C& c, SV k, SV v) { c.torus.n = to_int(k, v); },
       [](const C& c) { return std::optional(std::to_string(c.torus.n)); }},
      {"weight.kind", [](C& c, SV, SV v) { c.weight.kind = std::string(trim(v)); },
       [](const C& c) { return std::optional(c.weight.kind); }},
      {"weight.a", [](C& c, SV k, SV v) { c.weight.a = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.weight.a)); }},
      {"weight.kappa", [](C& c, SV k, SV v) { c.weight.kappa = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.weight.kappa)); }},
      {"weight.x0", [](C& c, SV k, SV v) { c.weight.x0 = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.weight.x0)); }},
      {"weight.y0", [](C& c, SV k, SV v) { c.weight.y0 = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.weight.y0)); }},
      {"run.pipeline",
       [](C& c, SV k, SV v) {
         c.run.pipeline.clear();
         for (auto item : split_list(v)) {
           const auto s = parse_stage(item);
           if (!s) bad_value(k, item, "unknown stage");
           c.run.pipeline.push_back(*s);
         }
       },
       [](const C& c) {
         return std::optional(join<Stage>(c.run.pipeline, [](const Stage& s) { return std::string(stage_name(s)); }));
       }},
      {"run.alpha", [](C& c, SV k, SV v) { c.run.alpha = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.run.alpha)); }},
      {"run.ell", [](C& c, SV k, SV v) { c.run.ell = to_int(k, v); },
       [](const C& c) { return std::optional(std::to_string(c.run.ell)); }},
      {"run.eps", [](C& c, SV k, SV v) { c.run.eps = to_double(k, v); },
       [](const C& c) {
         return c.run.eps ? std::optional(format_double(*c.run.eps)) : std::nullopt;
       }},
      {"run.eps_schedule", [](C& c, SV k, SV v) { c.run.eps_schedule = to_doubles(k, v); },
       [](const C& c) { return std::optional(join_doubles(c.run.eps_schedule)); }},
      {"run.beta", [](C& c, SV k, SV v) { c.run.beta = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.run.beta)); }},
      {"run.p",
       [](C& c, SV k, SV v) {
         const auto xy = to_doubles(k, v);
         if (xy.size() != 2) bad_value(k, v, "expected x, y");
         c.run.p = {xy[0], xy[1]};
       },
       [](const C& c) {
         return std::optional(format_double(c.run.p[0]) + ", " + format_double(c.run.p[1]));
       }},
      {"run.method", [](C& c, SV, SV v) { c.run.method = std::string(trim(v)); },
       [](const C& c) { return std::optional(c.run.method); }},
      {"run.eps_grid", [](C& c, SV k, SV v) { c.run.eps_grid = to_doubles(k, v); },
       [](const C& c) { return std::optional(join_doubles(c.run.eps_grid)); }},
      {"run.ks", [](C& c, SV k, SV v) { c.run.ks = to_doubles(k, v); },
       [](const C& c) { return std::optional(join_doubles(c.run.ks)); }},
      {"run.r", [](C& c, SV k, SV v) { c.run.r = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.run.r)); }},
      {"run.ts", [](C& c, SV k, SV v) { c.run.ts = to_doubles(k, v); },
       [](const C& c) { return std::optional(join_doubles(c.run.ts)); }},
      {"run.input", [](C& c, SV, SV v) { c.run.input = std::string(trim(v)); },
       [](const C& c) { return std::optional(c.run.input); }},
      {"run.green", [](C& c, SV, SV v) { c.run.green = std::string(trim(v)); },
       [](const C& c) { return std::optional(c.run.green); }},
      {"run.radius", [](C& c, SV k, SV v) { c.run.radius = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.run.radius)); }},
      {"run.delta", [](C& c, SV k, SV v) { c.run.delta = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.run.delta)); }},
      {"solver.tol", [](C& c, SV k, SV v) { c.solver.tol = to_double(k, v); },
       [](const C& c) { return std::optional(format_double(c.solver.tol)); }},
      {"solver.max_iter", [](C& c, SV k, SV v) { c.solver.max_iter = to_int(k, v); },
       [](const C& c) { return std::optional(std::to_string(c.solver.max_iter)); }},
      {"output.directory", [](C& c, SV, SV v) { c.output.directory = std::string(trim(v)); },
       [](const C& c) { return std::optional(c.output.directory); }},
      {"output.formats",
       [](C& c, SV, SV v) {
         c.output.formats.clear();
         for (auto item : split_list(v)) c.output.formats.emplace_back(item);
       },
       [](const C& c) {
         return std::optional(join<std::string>(c.output.formats, [](const std::string& s) { return s; }));
       }},
  };
  return table;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view stage_name(Stage s) {
  for (const auto& [stage, name] : kStages)
    if (stage == s) return name;
  return "?";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& [stage, n] : kStages)
    if (n == name) return stage;
  return std::nullopt;
}

WeightFunction WeightConfig::build(const TorusGeometry& geom) const {
  if (kind == "uniform") return WeightFunction::uniform(geom);
  if (kind == "cosine") return WeightFunction::cosine(geom, a);
  if (kind == "bump") return WeightFunction::bump(geom, a, kappa, x0, y0);
  throw std::invalid_argument("weight.kind: unknown kind '" + kind + "'");
}

bool ExperimentConfig::has_stage(Stage s) const {
  return std::find(run.pipeline.begin(), run.pipeline.end(), s) != run.pipeline.end();
}

bool ExperimentConfig::has_format(std::string_view f) const {
  return std::find(output.formats.begin(), output.formats.end(), f) != output.formats.end();
}

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& v : violations) msg += "\n  " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError({std::string(key) + ": unknown key"});
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  auto fail = [&](const std::string& key, const std::string& msg) { out.push_back(key + ": " + msg); };

  const auto& t = cfg.torus;
  if (!(t.lx > 0.0)) fail("torus.Lx", "must be positive");
  if (!(t.ly > 0.0)) fail("torus.Ly", "must be positive");
  if (t.n < 16 || (t.n & (t.n - 1)) != 0) fail("torus.N", "must be a power of two ≥ 16");
  const bool geom_ok = out.empty();

  const auto& w = cfg.weight;
  if (w.kind == "cosine") {
    if (!(std::abs(w.a) < 1.0)) fail("weight.a", "cosine weight needs |a| < 1");
  } else if (w.kind == "bump") {
    if (!(w.a > -1.0)) fail("weight.a", "bump weight needs a > -1");
    if (!(w.kappa >= 0.0)) fail("weight.kappa", "bump weight needs kappa ≥ 0");
  } else if (w.kind != "uniform") {
    fail("weight.kind", "must be one of uniform, cosine, bump (got '" + w.kind + "')");
  }

  const auto& r = cfg.run;
  if (r.ell < 0) fail("run.ell", "must be ≥ 0");
  const bool minimizing = cfg.has_stage(Stage::kMinimize) || cfg.has_stage(Stage::kSweep);
  if (geom_ok && r.ell >= 0) {
    const auto geom = cfg.geometry();
    if (minimizing) {
      const double bound = distinct_eigenvalue(geom, r.ell + 1);
      if (!(r.alpha < bound)) {
        const std::string level = r.ell == 0 ? "λ₁" : "λ_" + std::to_string(r.ell + 1);
        fail("run.alpha", "minimization requires α < " + level + " = " + format_double(bound) +
                              " for ell = " + std::to_string(r.ell) + " (got " + format_double(r.alpha) + ")");
      }
    }
    if (cfg.has_stage(Stage::kProbeRay)) {
      const double l1 = distinct_eigenvalue(geom, 1);
      if (!(r.alpha >= l1)) {
        fail("run.alpha", "probe-ray requires α ≥ λ₁ = " + format_double(l1) + " (got " +
                              format_double(r.alpha) + ")");
      }
    }
    if (cfg.has_stage(Stage::kProbeBeta) && !(r.r > 0.0 && r.r < geom.min_side() / 4.0)) {
      fail("run.r", "must lie in (0, min(Lx, Ly)/4)");
    }
  }
  if (r.eps && !(*r.eps > 0.0 && *r.eps < 1.0)) fail("run.eps", "must lie in (0, 1)");
  if (cfg.has_stage(Stage::kMinimize) && !r.eps) fail("run.eps", "required by the minimize stage");
  for (double e : r.eps_schedule)
    if (!(e > 0.0 && e < 1.0)) fail("run.eps_schedule", "entries must lie in (0, 1)");
  if (!strictly_decreasing(r.eps_schedule)) fail("run.eps_schedule", "must be strictly decreasing");
  if (cfg.has_stage(Stage::kSweep) && r.eps_schedule.empty()) {
    fail("run.eps_schedule", "required by the sweep stage");
  }
  for (double e : r.eps_grid)
    if (!(e > 0.0 && e < 1.0)) fail("run.eps_grid", "entries must lie in (0, 1)");
  if (!strictly_decreasing(r.eps_grid)) fail("run.eps_grid", "must be strictly decreasing");
  if (cfg.has_stage(Stage::kTestfn) && r.eps_grid.empty()) fail("run.eps_grid", "required by the testfn stage");
  if (cfg.has_stage(Stage::kProbeBeta)) {
    if (!(r.beta > 8.0 * 3.14159265358979323846)) fail("run.beta", "probe-beta requires β > 8π");
    if (r.ks.size() < 2) fail("run.ks", "needs at least two values");
    for (double k : r.ks)
      if (!(k >= 2.0)) fail("run.ks", "entries must be ≥ 2");
  }
  if (cfg.has_stage(Stage::kProbeRay) && r.ts.empty()) fail("run.ts", "required by the probe-ray stage");
  if (r.method != "split" && r.method != "extrapolate") {
    fail("run.method", "must be split or extrapolate (got '" + r.method + "')");
  }
  if (cfg.has_stage(Stage::kDiagnose)) {
    if (r.input.empty() && !minimizing) fail("run.input", "diagnose needs a field dump or a minimize/sweep stage");
    if (r.green.empty() && !cfg.has_stage(Stage::kGreen)) {
      fail("run.green", "diagnose needs a Green dump or a green stage");
    }
    if (!(r.radius > 0.0)) fail("run.radius", "must be positive");
    if (!(r.delta > 0.0)) fail("run.delta", "must be positive");
  }
  if (!(cfg.solver.tol > 0.0)) fail("solver.tol", "must be positive");
  if (cfg.solver.max_iter < 1) fail("solver.max_iter", "must be ≥ 1");
  for (const auto& f : cfg.output.formats)
    if (!kFormats.count(f)) fail("output.formats", "unknown format '" + f + "'");
  return out;
}

ExperimentConfig parse_config(std::string_view text, bool check) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::set<std::string, std::less<>> seen;
  std::size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + ": expected key = value");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      errors.push_back(std::string(key) + ": duplicate key (" + where + ")");
      continue;
    }
    try {
      apply_setting(cfg, key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      for (const auto& v : e.violations()) errors.push_back(v + " (" + where + ")");
    }
  }
  if (check)
    for (auto& v : validate(cfg)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, bool check) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), check);
}

std::string to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) {
    if (const auto v = k.get(cfg)) {
      out += k.name;
      out += " = ";
      out += *v;
      out += "\n";
    }
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : to_text(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kw
