#include "kw/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

#include "json.hpp"
#include "kw/asymptotics.hpp"
#include "kw/field_io.hpp"
#include "kw/greenfn.hpp"
#include "kw/minimize.hpp"

namespace kw {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using std::numbers::pi;

constexpr const char* kCsvVersion = "kw-csv v1";

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

template <class F>
void parallel_for(int n, int threads, F&& f) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) {
        try {
          f(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct Context {
  const ExperimentConfig& cfg;
  fs::path dir;
  TorusGeometry geom;
  WeightFunction h;
  int threads;
  std::vector<std::string>& files;
  fs::path field_dump;
  fs::path green_dump;
};

void add_file(Context& ctx, const fs::path& p) {
  ctx.files.push_back(fs::relative(p, ctx.dir).generic_string());
}

void write_csv(Context& ctx, const std::string& name, const Table& t) {
  const fs::path path = ctx.dir / (name + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# " << kCsvVersion << " stage=" << name << "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << row[k];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
  add_file(ctx, path);
}

void write_json(Context& ctx, const std::string& name, const Json& j) {
  const fs::path path = ctx.dir / (name + ".json");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  add_file(ctx, path);
}

void emit(Context& ctx, const std::string& name, const Table& t, const Json& summary) {
  if (ctx.cfg.has_format("csv")) write_csv(ctx, name, t);
  if (ctx.cfg.has_format("json")) write_json(ctx, name, summary);
}

fs::path dump(Context& ctx, const std::string& name, const TorusGeometry& geom,
              std::span<const double> values, const std::string& kind,
              const std::map<std::string, std::string>& meta = {}) {
  const fs::path stem = ctx.dir / name;
  for (const auto& p : write_field(stem, geom, values, kind, meta)) add_file(ctx, p);
  return stem;
}

Check check(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string le(double value, double bound) {
  return format_double(value) + " <= " + short_double(bound);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] < v[k - 1])) return false;
  return true;
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] > v[k - 1])) return false;
  return true;
}

FunctionalParams minimize_params(const Context& ctx, double eps) {
  return FunctionalParams::subcritical(ctx.cfg.run.alpha, eps, ctx.h, ctx.cfg.run.ell);
}

MinimizeOptions solver_options(const Context& ctx) {
  MinimizeOptions o;
  o.tol = ctx.cfg.solver.tol;
  o.max_iter = ctx.cfg.solver.max_iter;
  return o;
}

bool wants_field_dump(const Context& ctx) {
  return ctx.cfg.has_format("fields") ||
         (ctx.cfg.has_stage(Stage::kDiagnose) && ctx.cfg.run.input.empty());
}

// Invariants every converged minimizer must satisfy.
void minimizer_checks(OperationRecord& rec, const std::string& tag, const SpectralField& u,
                      double J, bool converged, const FunctionalParams& p) {
  rec.checks.push_back(check(tag + " converged", converged, converged ? "yes" : "no"));
  if (!converged) return;
  rec.checks.push_back(check(tag + " J bound", weak_bound_check(J, p),
                             le(J, weak_bound(p) + 1e-9)));
  const double gap = energy_identity_gap(u, p);
  const double bound = 1e-6 * std::max(1.0, u.l2_norm_squared());
  rec.checks.push_back(check(tag + " energy identity", gap <= bound, le(gap, bound)));
}

void stage_green(Context& ctx, OperationRecord& rec) {
  const auto& r = ctx.cfg.run;
  const Point p{r.p[0], r.p[1]};
  const GreenFunction g = green_solve(ctx.geom, r.alpha, p, r.ell);
  const RobinMethod method = r.method == "extrapolate" ? RobinMethod::kExtrapolate : RobinMethod::kSplit;
  const double robin = robin_constant(g, method);
  const RobinReport report = robin_report(g);

  const double lambda_ell = r.ell == 0 ? 0.0 : distinct_eigenvalue(ctx.geom, r.ell);
  double identity = 0.0;
  for (const auto& m : eigenbasis(ctx.geom, 200).modes) {
    if (m.eigenvalue <= lambda_ell * (1.0 + 1e-12)) continue;
    identity = std::max(identity, std::abs((m.eigenvalue - r.alpha) * g.field().coefficient(m) -
                                           8.0 * pi * m.value(ctx.geom, p)));
  }
  rec.checks.push_back(check("coefficient identity", identity <= 1e-10, le(identity, 1e-10)));
  rec.checks.push_back(check("robin methods resolved", !report.under_resolved, le(report.gap, 1e-3)));
  if (ctx.geom.n() >= 256) {
    rec.checks.push_back(check("robin method gap", report.gap <= 1e-4, le(report.gap, 1e-4)));
  }
  rec.scalars = {{"robin", robin}, {"method_gap", report.gap}, {"identity_residual", identity}};

  Table t{{"alpha", "px", "py", "ell", "method", "robin", "robin_split", "robin_extrapolate",
           "method_gap", "identity_residual"},
          {}};
  t.add({cell(r.alpha), cell(p.x), cell(p.y), cell(r.ell), r.method, cell(robin), cell(report.split),
         cell(report.extrapolate), cell(report.gap), cell(identity)});
  Json j;
  j["alpha"] = r.alpha;
  j["p"] = {p.x, p.y};
  j["ell"] = r.ell;
  j["robin"] = number(robin);
  j["method_gap"] = number(report.gap);
  emit(ctx, "green", t, j);

  ctx.green_dump = dump(ctx, "green", ctx.geom, g.grid_values(), "green",
                        {{"alpha", format_double(r.alpha)},
                         {"ell", std::to_string(r.ell)},
                         {"px", format_double(p.x)},
                         {"py", format_double(p.y)},
                         {"robin", format_double(robin)}});
}

const std::vector<std::string> kRecordColumns{"eps", "J", "mass", "log_mass", "c", "x", "y", "r_eps",
                                              "residual", "iterations", "converged", "status"};

std::vector<std::string> record_row(const SweepRecord& s) {
  return {cell(s.eps), cell(s.J), cell(s.mass), cell(s.log_mass), cell(s.c), cell(s.x.x), cell(s.x.y),
          cell(s.r_eps), cell(s.residual), cell(s.iterations), cell(s.converged), s.status};
}

Json record_json(const SweepRecord& s) {
  Json j;
  j["eps"] = s.eps;
  j["J"] = number(s.J);
  j["mass"] = number(s.mass);
  j["c"] = number(s.c);
  j["x"] = {s.x.x, s.x.y};
  j["r_eps"] = number(s.r_eps);
  j["residual"] = number(s.residual);
  j["iterations"] = s.iterations;
  return j;
}

void stage_minimize(Context& ctx, OperationRecord& rec) {
  const double eps = *ctx.cfg.run.eps;
  const FunctionalParams p = minimize_params(ctx, eps);
  const MinimizeResult m = minimize_subcritical(p, SpectralField(ctx.geom), solver_options(ctx));
  SweepRecord s;
  s.eps = eps;
  s.J = m.J;
  s.mass = m.mass;
  s.log_mass = m.log_mass;
  s.c = m.c;
  s.x = m.x;
  s.h_at_x = ctx.h(m.x);
  s.r_eps = blowup_scale(m.log_mass, eps, s.h_at_x, m.c);
  s.residual = m.el_residual;
  s.iterations = m.iterations;
  s.converged = m.converged;
  s.status = m.status;
  minimizer_checks(rec, "minimizer", m.u, m.J, m.converged, p);
  rec.scalars = {{"J", m.J}, {"residual", m.el_residual}, {"c", m.c}};

  Table t{kRecordColumns, {}};
  t.add(record_row(s));
  Json j = record_json(s);
  j["status"] = s.status;
  emit(ctx, "minimize", t, j);
  if (wants_field_dump(ctx)) {
    ctx.field_dump = dump(ctx, "minimize", ctx.geom, m.u.grid(), "minimizer",
                          {{"alpha", format_double(ctx.cfg.run.alpha)}, {"eps", format_double(eps)}});
  }
}

void stage_sweep(Context& ctx, OperationRecord& rec) {
  const auto& schedule = ctx.cfg.run.eps_schedule;
  const FunctionalParams p = minimize_params(ctx, schedule.front());
  const ContinuationReport rep = continuation_sweep(p, schedule, SpectralField(ctx.geom), solver_options(ctx));

  double recompute = 0.0;
  for (std::size_t k = 0; k < rep.records.size(); ++k) {
    const auto& s = rep.records[k];
    const auto& u = rep.fields[k];
    const FunctionalParams q = minimize_params(ctx, s.eps);
    minimizer_checks(rec, "eps=" + short_double(s.eps), u, s.J, s.converged, q);
    const PeakFit peak = argmax_refine(u);
    const double again = blowup_scale(exp_mass(u, ctx.h).log(), s.eps, ctx.h(peak.location), peak.value);
    recompute = std::max(recompute, std::abs(again - s.r_eps) / std::max(1.0, std::abs(s.r_eps)));
  }
  rec.checks.push_back(check("r_eps recomputation", recompute <= 1e-12, le(recompute, 1e-12)));
  rec.message = "verdict " + rep.verdict;
  rec.scalars = {{"records", static_cast<double>(rep.records.size())}, {"last_c", rep.records.back().c}};

  Table t{kRecordColumns, {}};
  Json rows = Json::array();
  for (const auto& s : rep.records) {
    t.add(record_row(s));
    rows.push_back(record_json(s));
  }
  Json j;
  j["verdict"] = rep.verdict;
  j["growth"] = rep.growth;
  j["findings"] = rep.findings;
  j["records"] = rows;
  emit(ctx, "sweep", t, j);
  if (wants_field_dump(ctx) && ctx.field_dump.empty()) {
    ctx.field_dump = dump(ctx, "sweep", ctx.geom, rep.fields.back().grid(), "minimizer",
                          {{"alpha", format_double(ctx.cfg.run.alpha)},
                           {"eps", format_double(rep.records.back().eps)}});
  }
}

struct TestfnRow {
  double eps = 0.0;
  double R = 0.0;
  double c = 0.0;
  Expansion dirichlet, log_mass, J;
  double inner_fraction = 0.0;
  double continuity = 0.0;
  double eta_bound = 0.0;
  double far_gap = 0.0;
};

void stage_testfn(Context& ctx, OperationRecord& rec) {
  const auto& r = ctx.cfg.run;
  const Point p = ctx.h.argmax();
  const auto& grid = r.eps_grid;
  std::vector<TestfnRow> rows(grid.size());
  double robin = 0.0;
  parallel_for(static_cast<int>(grid.size()), ctx.threads, [&](int k) {
    const TestFunctionBundle b = build_test_function(ctx.geom, grid[k], p, r.alpha, ctx.h, r.ell);
    TestfnRow& row = rows[k];
    row.eps = b.eps();
    row.R = b.R();
    row.c = b.c();
    row.dirichlet = b.dirichlet_expansion();
    row.log_mass = b.log_mass_expansion();
    row.J = b.J_expansion();
    row.inner_fraction = b.inner_fraction();
    row.continuity = b.continuity_gap();
    row.eta_bound = b.eta_gradient_bound();
    row.far_gap = far_field_gap([&](Point x) { return b.value(x); }, b.green(), 2.0 * b.R() * b.eps());
    if (k == 0) robin = b.robin();
  });
  const double hp = ctx.h(p);
  const double target = infimum_formula(robin + 2.0 * std::log(hp));

  std::vector<double> rd, rm, rj, frac;
  for (const auto& row : rows) {
    rd.push_back(row.dirichlet.residual);
    rm.push_back(row.log_mass.residual);
    rj.push_back(row.J.residual);
    frac.push_back(row.inner_fraction);
  }
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + format_double(v[k]);
    return s;
  };
  rec.checks.push_back(check("dirichlet residual decreasing", strictly_decreasing(rd), list(rd)));
  rec.checks.push_back(check("log-mass residual decreasing", strictly_decreasing(rm), list(rm)));
  rec.checks.push_back(check("J residual decreasing", strictly_decreasing(rj), list(rj)));
  for (const auto& row : rows) {
    const std::string tag = "eps=" + short_double(row.eps);
    const double floor = row.J.expected - row.J.residual;
    rec.checks.push_back(check(tag + " J above formula minus residual", row.J.value >= floor,
                               format_double(row.J.value) + " >= " + format_double(floor)));
    if (row.eps <= 1e-4 * (1.0 + 1e-12)) {
      rec.checks.push_back(check(tag + " J residual", row.J.residual <= 1.0, le(row.J.residual, 1.0)));
    }
    if (row.eps <= 1e-3 * (1.0 + 1e-12)) {
      rec.checks.push_back(check(tag + " inner mass fraction", row.inner_fraction >= 0.98,
                                 format_double(row.inner_fraction) + " >= 0.98"));
    }
    rec.checks.push_back(check(tag + " far-field identity", row.far_gap <= 1e-10, le(row.far_gap, 1e-10)));
    rec.checks.push_back(check(tag + " continuity", row.continuity <= 1e-12, le(row.continuity, 1e-12)));
    rec.checks.push_back(check(tag + " eta gradient", row.eta_bound <= 4.0, le(row.eta_bound, 4.0)));
  }
  rec.checks.push_back(check("inner mass fraction increasing", strictly_increasing(frac), list(frac)));
  rec.scalars = {{"target", target}, {"robin", robin}, {"last_J_residual", rj.back()}};

  Table t{{"eps", "R", "c", "dirichlet", "dirichlet_expected", "dirichlet_residual", "log_mass",
           "log_mass_expected", "log_mass_residual", "J", "J_expected", "J_residual", "inner_fraction",
           "continuity_gap", "eta_gradient_bound", "far_field_gap"},
          {}};
  Json jrows = Json::array();
  for (const auto& row : rows) {
    t.add({cell(row.eps), cell(row.R), cell(row.c), cell(row.dirichlet.value), cell(row.dirichlet.expected),
           cell(row.dirichlet.residual), cell(row.log_mass.value), cell(row.log_mass.expected),
           cell(row.log_mass.residual), cell(row.J.value), cell(row.J.expected), cell(row.J.residual),
           cell(row.inner_fraction), cell(row.continuity), cell(row.eta_bound), cell(row.far_gap)});
    Json jr;
    jr["eps"] = row.eps;
    jr["J"] = number(row.J.value);
    jr["dirichlet_residual"] = number(row.dirichlet.residual);
    jr["log_mass_residual"] = number(row.log_mass.residual);
    jr["J_residual"] = number(row.J.residual);
    jr["inner_fraction"] = number(row.inner_fraction);
    jrows.push_back(jr);
  }
  Json j;
  j["p"] = {p.x, p.y};
  j["h_p"] = hp;
  j["robin"] = number(robin);
  j["target_constant"] = number(target);
  j["rows"] = jrows;
  emit(ctx, "testfn", t, j);
}

void stage_probe_beta(Context& ctx, OperationRecord& rec) {
  const auto& r = ctx.cfg.run;
  const DivergenceProbe d = divergence_probe_beta(ctx.geom, r.alpha, r.beta, r.ks, r.r, ctx.h, r.ell);
  const double rel = std::abs(d.slope - d.predicted_slope) / std::abs(d.predicted_slope);
  rec.checks.push_back(check("slope", rel <= 0.1,
                             format_double(d.slope) + " vs " + format_double(d.predicted_slope) +
                                 ", relative " + le(rel, 0.1)));
  rec.checks.push_back(check("J strictly decreasing", d.strictly_decreasing, d.strictly_decreasing ? "yes" : "no"));
  if (r.ell >= 1) {
    rec.checks.push_back(check("orthogonal to E_ell", d.max_projection <= 1e-12, le(d.max_projection, 1e-12)));
  }
  rec.scalars = {{"slope", d.slope}, {"predicted_slope", d.predicted_slope}};

  Table t{{"k", "J", "log_mass"}, {}};
  for (std::size_t k = 0; k < d.ks.size(); ++k) t.add({cell(d.ks[k]), cell(d.J[k]), cell(d.log_mass[k])});
  Json j;
  j["beta"] = r.beta;
  j["r"] = r.r;
  j["ell"] = r.ell;
  j["ks"] = d.ks;
  j["J"] = d.J;
  j["slope"] = number(d.slope);
  j["predicted_slope"] = number(d.predicted_slope);
  j["strictly_decreasing"] = d.strictly_decreasing;
  j["max_projection"] = number(d.max_projection);
  emit(ctx, "probe-beta", t, j);
}

void stage_probe_ray(Context& ctx, OperationRecord& rec) {
  const auto& r = ctx.cfg.run;
  const auto& ts = r.ts;
  const std::vector<double> J = eigen_ray(ctx.geom, r.alpha, ts, ctx.h);
  const double V = ctx.geom.volume();
  const double lambda = ctx.geom.eigenvalue(1, 0);
  const bool uniform = ctx.h.kind() == WeightKind::kUniform;

  // Closed form for h ≡ 1: ∫ e^{t√(2/V) cos} = V·I₀(t√(2/V)).
  std::vector<double> ref(ts.size(), std::numeric_limits<double>::quiet_NaN());
  double worst = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double z = ts[k] * std::sqrt(2.0 / V);
    if (!uniform || z > 700.0) continue;
    ref[k] = 0.5 * ts[k] * ts[k] * (lambda - r.alpha) - 8.0 * pi * std::log(V * std::cyl_bessel_i(0.0, z));
    worst = std::max(worst, std::abs(J[k] - ref[k]));
  }
  if (uniform) rec.checks.push_back(check("Bessel closed form", worst <= 1e-6, le(worst, 1e-6)));

  std::vector<double> tail;
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (ts[k] >= 1.0) tail.push_back(J[k]);
  rec.checks.push_back(check("J strictly decreasing for t >= 1", strictly_decreasing(tail), "t >= 1"));

  double slope = std::numeric_limits<double>::quiet_NaN();
  const double target = -8.0 * pi * std::sqrt(2.0 / V);
  if (ts.size() >= 2) {
    const std::size_t n = ts.size();
    slope = (J[n - 1] - J[n - 2]) / (ts[n - 1] - ts[n - 2]);
    if (std::abs(r.alpha - lambda) <= 1e-9 * lambda && ts[n - 1] >= 40.0) {
      const double rel = std::abs(slope - target) / std::abs(target);
      rec.checks.push_back(check("asymptotic slope", rel <= 0.02,
                                 format_double(slope) + " vs " + format_double(target) + ", relative " +
                                     le(rel, 0.02)));
    }
  }
  rec.scalars = {{"slope", slope}, {"target_slope", target}};

  Table t{{"t", "J", "bessel_reference"}, {}};
  for (std::size_t k = 0; k < ts.size(); ++k) t.add({cell(ts[k]), cell(J[k]), cell(ref[k])});
  Json j;
  j["alpha"] = r.alpha;
  j["ts"] = ts;
  Json jj = Json::array();
  for (double v : J) jj.push_back(number(v));
  j["J"] = jj;
  j["secant_slope"] = number(slope);
  j["target_slope"] = target;
  emit(ctx, "probe-ray", t, j);
}

void stage_diagnose(Context& ctx, OperationRecord& rec) {
  const auto& r = ctx.cfg.run;
  const fs::path field_path = r.input.empty() ? ctx.field_dump : fs::path(r.input);
  const fs::path green_path = r.green.empty() ? ctx.green_dump : fs::path(r.green);
  if (field_path.empty()) throw std::runtime_error("diagnose: no field dump available");
  if (green_path.empty()) throw std::runtime_error("diagnose: no Green dump available");
  const FieldDump f = read_field(field_path);
  const FieldDump g = read_field(green_path);
  if (!(f.geom == g.geom)) throw std::runtime_error("diagnose: field and Green dumps use different grids");
  const TorusGeometry& geom = f.geom;
  const WeightFunction h = ctx.cfg.weight.build(geom);
  const SpectralField u = SpectralField::from_grid(geom, f.values);
  const PeakFit peak = argmax_refine(u);
  const double fraction = concentration_fraction(u, h, peak.location, r.radius);

  Point source{0.0, 0.0};
  if (g.meta.count("px") && g.meta.count("py")) source = {std::stod(g.meta.at("px")), std::stod(g.meta.at("py"))};
  double gap = 0.0;
  double gap_centered = 0.0;
  double mean_u = 0.0, mean_g = 0.0;
  int count = 0;
  for (int i = 0; i < geom.n(); ++i)
    for (int j = 0; j < geom.n(); ++j) {
      if (geodesic_distance(geom, source, geom.grid_point(i, j)) < r.delta) continue;
      mean_u += f.values[geom.index(i, j)];
      mean_g += g.values[geom.index(i, j)];
      ++count;
    }
  if (count > 0) {
    mean_u /= count;
    mean_g /= count;
  }
  for (int i = 0; i < geom.n(); ++i)
    for (int j = 0; j < geom.n(); ++j) {
      if (geodesic_distance(geom, source, geom.grid_point(i, j)) < r.delta) continue;
      const double d = f.values[geom.index(i, j)] - g.values[geom.index(i, j)];
      gap = std::max(gap, std::abs(d));
      gap_centered = std::max(gap_centered, std::abs(d - (mean_u - mean_g)));
    }
  rec.scalars = {{"c", peak.value}, {"concentration", fraction}, {"far_field_gap", gap}};

  Table t{{"c", "x", "y", "degenerate", "radius", "concentration", "delta", "far_field_gap",
           "far_field_gap_centered"},
          {}};
  t.add({cell(peak.value), cell(peak.location.x), cell(peak.location.y), cell(peak.degenerate), cell(r.radius),
         cell(fraction), cell(r.delta), cell(gap), cell(gap_centered)});
  Json j;
  j["input"] = field_path.generic_string();
  j["green"] = green_path.generic_string();
  j["c"] = number(peak.value);
  j["x"] = {peak.location.x, peak.location.y};
  j["concentration"] = number(fraction);
  j["far_field_gap"] = number(gap);
  j["far_field_gap_centered"] = number(gap_centered);
  emit(ctx, "diagnose", t, j);
}

void run_stage(Stage s, Context& ctx, OperationRecord& rec) {
  switch (s) {
    case Stage::kGreen: return stage_green(ctx, rec);
    case Stage::kMinimize: return stage_minimize(ctx, rec);
    case Stage::kSweep: return stage_sweep(ctx, rec);
    case Stage::kTestfn: return stage_testfn(ctx, rec);
    case Stage::kProbeBeta: return stage_probe_beta(ctx, rec);
    case Stage::kProbeRay: return stage_probe_ray(ctx, rec);
    case Stage::kDiagnose: return stage_diagnose(ctx, rec);
  }
}

}  // namespace

int RunManifest::exit_code() const {
  int code = 0;
  for (const auto& op : operations) {
    if (op.status != "ok") return 2;
    for (const auto& c : op.checks)
      if (!c.passed) code = 1;
  }
  return code;
}

std::string RunManifest::to_json() const {
  Json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["started"] = started;
  j["finished"] = finished;
  Json ops = Json::array();
  for (const auto& op : operations) {
    Json o;
    o["stage"] = op.stage;
    o["status"] = op.status;
    o["started"] = op.started;
    o["finished"] = op.finished;
    o["message"] = op.message;
    Json checks = Json::array();
    for (const auto& c : op.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    o["checks"] = checks;
    Json scalars = Json::object();
    for (const auto& [k, v] : op.scalars) scalars[k] = number(v);
    o["scalars"] = scalars;
    ops.push_back(o);
  }
  j["operations"] = ops;
  j["files"] = files;
  j["exit_code"] = exit_code();
  return j.dump(2);
}

RunManifest run(const ExperimentConfig& cfg, const fs::path& dir, int threads) {
  if (const auto problems = validate(cfg); !problems.empty()) throw ConfigError(problems);
  fs::create_directories(dir);
  RunManifest m;
  m.config_hash = hash_hex(config_hash(cfg));
  m.version = KW_VERSION;
  m.started = now_utc();

  {
    const fs::path path = dir / "config.kw";
    std::ofstream out(path);
    out << to_text(cfg);
    m.files.push_back("config.kw");
  }

  const TorusGeometry geom = cfg.geometry();
  Context ctx{cfg, dir, geom, cfg.weight.build(geom), threads > 0 ? threads : env_threads(), m.files, {}, {}};

  std::vector<Stage> stages = cfg.run.pipeline;
  std::sort(stages.begin(), stages.end());
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
  for (Stage s : stages) {
    OperationRecord rec;
    rec.stage = std::string(stage_name(s));
    rec.started = now_utc();
    try {
      run_stage(s, ctx, rec);
      rec.status = "ok";
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.message = e.what();
    }
    rec.finished = now_utc();
    m.operations.push_back(std::move(rec));
  }
  m.finished = now_utc();

  std::ofstream out(dir / "manifest.json");
  out << m.to_json() << "\n";
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  return m;
}

int env_threads() {
  if (const char* s = std::getenv("KW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

fs::path default_output_root() {
  if (const char* s = std::getenv("KW_OUT"); s && *s) return s;
  return "kw-runs";
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  return default_output_root() / ("run-" + hash_hex(config_hash(cfg)));
}

std::vector<std::string> manifest_problems(const fs::path& dir) {
  std::vector<std::string> out;
  std::ifstream in(dir / "manifest.json");
  if (!in) return {"manifest.json missing"};
  const Json j = Json::parse(in);
  std::set<std::string> listed;
  for (const auto& f : j.at("files")) {
    const std::string name = f.get<std::string>();
    listed.insert(name);
    if (!fs::exists(dir / name)) out.push_back("listed but missing: " + name);
  }
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = fs::relative(e.path(), dir).generic_string();
    if (name != "manifest.json" && !listed.count(name)) out.push_back("present but unlisted: " + name);
  }
  return out;
}

}  // namespace kw
