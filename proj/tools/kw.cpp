// kw: command-line front end for the torus mean-field toolkit.
//
//   kw testfn --eps-grid 1e-2,1e-3,1e-4 --alpha 19.7 --weight cosine:0.5
//   kw run --config experiment.kw --out runs/a
//
// Every subcommand builds an ExperimentConfig (from --config, then flags) and
// runs it through the same pipeline as `kw run`. The exit code is 0 when all
// checks pass, 1 when a check fails, 2 when a stage fails and 3 on bad input.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kw/config.hpp"
#include "kw/runner.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

const std::map<std::string, std::vector<Flag>> kFlags{
    {"green",
     {{"--alpha", "run.alpha", "alpha"},
      {"--p", "run.p", "source point x,y"},
      {"--ell", "run.ell", "projection index"},
      {"--method", "run.method", "split or extrapolate"}}},
    {"minimize",
     {{"--alpha", "run.alpha", "alpha"},
      {"--eps", "run.eps", "beta = 8pi(1-eps)"},
      {"--ell", "run.ell", "projection index"},
      {"--tol", "solver.tol", "stopping tolerance"},
      {"--max-iter", "solver.max_iter", "iteration cap"}}},
    {"sweep",
     {{"--alpha", "run.alpha", "alpha"},
      {"--eps-schedule", "run.eps_schedule", "strictly decreasing eps list"},
      {"--ell", "run.ell", "projection index"},
      {"--tol", "solver.tol", "stopping tolerance"},
      {"--max-iter", "solver.max_iter", "iteration cap"}}},
    {"testfn",
     {{"--eps-grid", "run.eps_grid", "strictly decreasing eps list"},
      {"--alpha", "run.alpha", "alpha"},
      {"--ell", "run.ell", "projection index"}}},
    {"probe-beta",
     {{"--alpha", "run.alpha", "alpha"},
      {"--beta", "run.beta", "beta > 8pi"},
      {"--ks", "run.ks", "k values"},
      {"--r", "run.r", "profile radius"},
      {"--ell", "run.ell", "projection index"}}},
    {"probe-ray",
     {{"--alpha", "run.alpha", "alpha >= lambda_1"},
      {"--ts", "run.ts", "ray parameters"}}},
    {"diagnose",
     {{"--input", "run.input", "field dump"},
      {"--green", "run.green", "Green function dump"},
      {"--radius", "run.radius", "concentration radius"},
      {"--delta", "run.delta", "far-field distance"}}},
    {"run", {}},
};

const std::map<std::string, std::string> kDescriptions{
    {"green", "Green function, Robin constant and dump"},
    {"minimize", "subcritical minimization at one eps"},
    {"sweep", "warm-started continuation over an eps schedule"},
    {"testfn", "concentrating test functions and their expansions"},
    {"probe-beta", "Moser-sequence divergence probe for beta > 8pi"},
    {"probe-ray", "J along the first eigenfunction ray"},
    {"diagnose", "peak, concentration and far-field gap of a field dump"},
    {"run", "the pipeline listed in run.pipeline"},
};

// "uniform", "cosine:a" or "bump:a,kappa,x0,y0".
std::vector<std::pair<std::string, std::string>> weight_settings(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<std::pair<std::string, std::string>> out{{"weight.kind", kind}};
  if (colon == std::string::npos) return out;
  std::vector<std::string> parts;
  std::string rest = spec.substr(colon + 1);
  std::size_t start = 0;
  while (true) {
    const auto comma = rest.find(',', start);
    parts.push_back(rest.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  const char* keys[] = {"weight.a", "weight.kappa", "weight.x0", "weight.y0"};
  if (parts.size() > 4) throw kw::ConfigError({"--weight: too many parameters in '" + spec + "'"});
  for (std::size_t k = 0; k < parts.size(); ++k) out.emplace_back(keys[k], parts[k]);
  return out;
}

void print_manifest(const kw::RunManifest& m, const std::string& dir) {
  for (const auto& op : m.operations) {
    std::cout << op.stage << ": " << op.status;
    if (!op.message.empty()) std::cout << " (" << op.message << ")";
    std::cout << "\n";
    for (const auto& c : op.checks) {
      std::cout << "  " << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    }
  }
  std::cout << "output: " << dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field functional toolkit on the flat torus"};
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out;
    std::optional<int> n;
    std::optional<std::string> weight;
    std::optional<int> threads;
    std::map<std::string, std::string> values;
  };
  std::map<std::string, Common> common;
  for (const auto& [name, flags] : kFlags) common[name];

  for (const auto& [name, flags] : kFlags) {
    CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
    Common& c = common[name];
    sub->add_option("--config", c.config, "config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "run directory");
    sub->add_option("--N", c.n, "grid size per axis");
    sub->add_option("--threads", c.threads, "parallel workers (overrides KW_THREADS)");
    if (name != "run") sub->add_option("--weight", c.weight, "uniform | cosine:a | bump:a,kappa,x0,y0");
    for (const auto& f : flags) sub->add_option(f.name, c.values[f.key], f.help);
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  Common& c = common[name];

  try {
    kw::ExperimentConfig cfg;
    if (!c.config.empty()) cfg = kw::load_config(c.config, name == "run");
    if (name != "run") {
      cfg.run.pipeline = {*kw::parse_stage(name)};
      if (c.n) cfg.torus.n = *c.n;
      if (c.weight)
        for (const auto& [k, v] : weight_settings(*c.weight)) kw::apply_setting(cfg, k, v);
      for (const auto& f : kFlags.at(name)) {
        if (chosen->count(f.name) > 0) kw::apply_setting(cfg, f.key, c.values[f.key]);
      }
    } else if (c.n) {
      cfg.torus.n = *c.n;
    }
    if (const auto problems = kw::validate(cfg); !problems.empty()) throw kw::ConfigError(problems);

    const std::filesystem::path dir = c.out.empty() ? kw::resolve_output_dir(cfg) : std::filesystem::path(c.out);
    const kw::RunManifest m = kw::run(cfg, dir, c.threads.value_or(0));
    print_manifest(m, dir.string());
    return m.exit_code();
  } catch (const kw::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
