#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kw/config.hpp"

namespace kw {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OperationRecord {
  std::string stage;
  /// "ok" or "failed" (the stage threw).
  std::string status;
  std::string started;
  std::string finished;
  std::string message;
  std::vector<Check> checks;
  /// Scalar outputs of the stage, for quick inspection.
  std::vector<std::pair<std::string, double>> scalars;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::string started;
  std::string finished;
  std::vector<OperationRecord> operations;
  /// Emitted files relative to the run directory. manifest.json itself is
  /// not listed.
  std::vector<std::string> files;

  /// 0 when every stage ran and every check passed, 1 when a check failed,
  /// 2 when a stage threw.
  int exit_code() const;
  std::string to_json() const;
};

/// Runs the configured pipeline into `dir` (created if needed) and writes
/// manifest.json there. Stages run in the fixed order green, minimize,
/// sweep, testfn, probe-beta, probe-ray, diagnose.
RunManifest run(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                int threads = 0);

/// KW_THREADS, or the hardware concurrency when unset or invalid.
int env_threads();
/// KW_OUT, or "kw-runs".
std::filesystem::path default_output_root();
/// Where `run` writes when no directory is given: output.directory if set,
/// else <default root>/run-<hash>.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Problems with a run directory's inventory: listed files that are
/// missing and present files that are not listed.
std::vector<std::string> manifest_problems(const std::filesystem::path& dir);

}  // namespace kw
