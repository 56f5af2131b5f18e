#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kw/fields.hpp"

namespace kw {

enum class Stage { kGreen, kMinimize, kSweep, kTestfn, kProbeBeta, kProbeRay, kDiagnose };

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

struct WeightConfig {
  std::string kind = "uniform";
  double a = 0.0;
  double kappa = 0.0;
  double x0 = 0.5;
  double y0 = 0.5;

  WeightFunction build(const TorusGeometry& geom) const;
  bool operator==(const WeightConfig&) const = default;
};

/// Everything a run needs, read from `key = value` text with dotted keys
/// (`torus.N = 256`). Lists are comma separated.
struct ExperimentConfig {
  struct Torus {
    double lx = 1.0;
    double ly = 1.0;
    int n = 128;
    bool operator==(const Torus&) const = default;
  } torus;

  WeightConfig weight;

  struct Run {
    /// Stages executed by `run`, in pipeline order after sorting.
    std::vector<Stage> pipeline;
    double alpha = 0.0;
    int ell = 0;
    std::optional<double> eps;
    std::vector<double> eps_schedule;
    /// β for the divergence probe.
    double beta = 9.0 * 3.14159265358979323846;
    /// Green function source.
    std::array<double, 2> p{0.5, 0.5};
    std::string method = "split";
    std::vector<double> eps_grid{1e-2, 1e-3, 1e-4};
    std::vector<double> ks{1e2, 1e3, 1e4};
    double r = 0.05;
    std::vector<double> ts{1.0, 20.0, 40.0};
    /// Field and Green dumps for `diagnose`; empty means the ones produced
    /// earlier in the same run.
    std::string input;
    std::string green;
    /// Concentration radius and far-field distance for `diagnose`.
    double radius = 0.1;
    double delta = 0.25;
    bool operator==(const Run&) const = default;
  } run;

  struct Solver {
    double tol = 1e-9;
    int max_iter = 20000;
    bool operator==(const Solver&) const = default;
  } solver;

  struct Output {
    std::string directory;
    /// Subset of csv, json, fields.
    std::vector<std::string> formats{"csv", "json"};
    bool operator==(const Output&) const = default;
  } output;

  TorusGeometry geometry() const { return TorusGeometry(torus.lx, torus.ly, torus.n); }
  bool has_stage(Stage s) const;
  bool has_format(std::string_view f) const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Carries every violation found, each prefixed by its key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Sets one dotted key from its text form. Throws ConfigError on an unknown
/// key or malformed value.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Cross-field rules; empty when the config is valid.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// With `check` false only per-key errors are reported; cross-field rules
/// are left for a later validate().
ExperimentConfig parse_config(std::string_view text, bool check = true);
ExperimentConfig load_config(const std::filesystem::path& path, bool check = true);

/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& cfg);

/// FNV-1a of the canonical text.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

/// `%.17g`.
std::string format_double(double v);

}  // namespace kw
