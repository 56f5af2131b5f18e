#include "kw/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kw/asymptotics.hpp"

namespace kw {

namespace {

constexpr double kEightPi = 8.0 * std::numbers::pi;

HalfSpectrum masked(const HalfSpectrum& s, const std::vector<bool>& mask) {
  HalfSpectrum out = s;
  for (std::size_t k = 0; k < out.data.size(); ++k)
    if (!mask[k]) out.data[k] = 0.0;
  return out;
}

// Bubble of width four grid cells at the maximum of h, projected onto the
// admissible subspace.
SpectralField bubble_seed(const FunctionalParams& p) {
  const TorusGeometry& geom = p.geometry();
  const Point center = p.weight.argmax();
  const double width = 4.0 * std::max(geom.hx(), geom.hy());
  const auto field = SpectralField::sample(geom, [&](Point x) {
    return bubble_profile(geodesic_distance(geom, center, x) / width);
  });
  return SpectralField::from_spectrum(geom, masked(field.spectrum(), admissible_mask(geom, p.ell)));
}

// Preconditioned inner product: coordinates z = sqrt(λ−α)·û on the
// admissible coefficients, L² pairing of the underlying fields.
struct Metric {
  std::vector<double> scale;
  std::vector<double> weight;
  double volume = 1.0;

  double dot(const std::vector<Complex>& a, const std::vector<Complex>& b) const {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (scale[k] != 0.0) s += weight[k] * (std::conj(a[k]) * b[k]).real();
    return volume * s;
  }
};

MinimizeResult descend(const Functional& f, const SpectralField& init,
                       const MinimizeOptions& opts) {
  const FunctionalParams& p = f.params();
  const TorusGeometry& geom = p.geometry();
  const std::vector<bool>& mask = f.mask();
  Metric metric;
  metric.scale.assign(mask.size(), 0.0);
  metric.weight.assign(mask.size(), 0.0);
  metric.volume = geom.volume();
  {
    HalfSpectrum shape(geom.n());
    for (int i = 0; i < shape.n; ++i)
      for (int j = 0; j < shape.columns(); ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * shape.columns() + j;
        metric.weight[idx] = shape.weight(j);
        if (mask[idx]) metric.scale[idx] = std::sqrt(geom.eigenvalue(shape.wave_m(i), j) - p.alpha);
      }
  }
  auto scaled_gradient = [&](const HalfSpectrum& g) {
    std::vector<Complex> out(g.data.size());
    for (std::size_t k = 0; k < out.size(); ++k)
      if (metric.scale[k] != 0.0) out[k] = g.data[k] / metric.scale[k];
    return out;
  };

  SpectralField u = SpectralField::from_spectrum(geom, masked(init.spectrum(), mask));
  Evaluation ev = f.evaluate(u);
  std::vector<Complex> gz = scaled_gradient(ev.gradient);
  MinimizeResult res(u);
  res.eps = p.eps;
  res.status = "max-iter";

  std::deque<std::vector<Complex>> hist_s, hist_y;
  std::deque<double> hist_rho;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double pnorm = std::sqrt(metric.dot(gz, gz));
    const double resid = el_residual(geom, ev.gradient);
    if (std::max(pnorm, resid) <= opts.tol) {
      res.status = "converged";
      break;
    }

    // Two-loop recursion.
    std::vector<Complex> d = gz;
    std::vector<double> coef(hist_s.size());
    for (int m = static_cast<int>(hist_s.size()) - 1; m >= 0; --m) {
      coef[m] = hist_rho[m] * metric.dot(hist_s[m], d);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] -= coef[m] * hist_y[m][k];
    }
    if (!hist_s.empty()) {
      const auto& ys = hist_y.back();
      const double gamma = 1.0 / (hist_rho.back() * metric.dot(ys, ys));
      for (auto& v : d) v *= gamma;
    }
    for (std::size_t m = 0; m < hist_s.size(); ++m) {
      const double beta = hist_rho[m] * metric.dot(hist_y[m], d);
      for (std::size_t k = 0; k < d.size(); ++k) d[k] += (coef[m] - beta) * hist_s[m][k];
    }
    for (auto& v : d) v = -v;
    double slope = metric.dot(gz, d);
    if (!(slope < 0.0)) {
      hist_s.clear();
      hist_y.clear();
      hist_rho.clear();
      d = gz;
      for (auto& v : d) v = -v;
      slope = -pnorm * pnorm;
    }
    // Rounding level of J: its two parts cancel, so scale by both.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (std::abs(ev.J) + std::abs(p.beta * ev.mass.log()) + p.beta);

    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving <= opts.max_halvings; ++halving, t *= 0.5) {
      HalfSpectrum trial = u.spectrum();
      for (std::size_t k = 0; k < trial.data.size(); ++k)
        if (metric.scale[k] != 0.0) trial.data[k] += t * d[k] / metric.scale[k];
      SpectralField v = SpectralField::from_spectrum(geom, std::move(trial));
      Evaluation tv = f.evaluate(v);
      const bool armijo = tv.J <= ev.J + opts.armijo * t * slope;
      std::vector<Complex> tg = scaled_gradient(tv.gradient);
      // Once the predicted decrease drops below the rounding noise of J,
      // accept steps that keep J flat and shrink the gradient instead.
      const bool flat = std::abs(opts.armijo * t * slope) < noise && tv.J <= ev.J + noise &&
                        metric.dot(tg, tg) < pnorm * pnorm;
      if (armijo || flat) {
        std::vector<Complex> sv(d.size()), yv(d.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
          sv[k] = t * d[k];
          yv[k] = tg[k] - gz[k];
        }
        const double sy = metric.dot(sv, yv);
        if (sy > 1e-12 * std::sqrt(metric.dot(sv, sv) * metric.dot(yv, yv))) {
          hist_s.push_back(std::move(sv));
          hist_y.push_back(std::move(yv));
          hist_rho.push_back(1.0 / sy);
          if (static_cast<int>(hist_s.size()) > opts.memory) {
            hist_s.pop_front();
            hist_y.pop_front();
            hist_rho.pop_front();
          }
        }
        res.max_ascent = std::max(res.max_ascent, tv.J - ev.J);
        u = std::move(v);
        ev = std::move(tv);
        gz = std::move(tg);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!hist_s.empty()) {
        hist_s.clear();
        hist_y.clear();
        hist_rho.clear();
        continue;
      }
      res.status = "stalled";
      break;
    }
  }
  res.u = u;
  res.iterations = it;
  res.J = ev.J;
  res.log_mass = ev.mass.log();
  res.mass = std::exp(res.log_mass);
  res.el_residual = el_residual(geom, ev.gradient);
  res.converged = res.status == "converged";
  const PeakFit peak = argmax_refine(u);
  res.c = peak.value;
  res.x = peak.location;
  return res;
}

}  // namespace

PeakFit argmax_refine(const SpectralField& u) {
  const TorusGeometry& geom = u.geometry();
  return fit_peak(u.grid(), geom.n(), geom.lx(), geom.ly());
}

MinimizeResult minimize_subcritical(const FunctionalParams& p,
                                    const SpectralField& init,
                                    const MinimizeOptions& opts) {
  if (!(p.eps > 0.0)) throw std::invalid_argument("minimize_subcritical needs ε > 0");
  if (!is_coercive(p)) {
    throw std::invalid_argument("α must lie below λ_{ℓ+1} for a coercive minimization");
  }
  if (!(init.geometry() == p.geometry())) {
    throw std::invalid_argument("initial field lives on a different grid");
  }
  const Functional f(p);
  MinimizeResult best = descend(f, init, opts);
  if (opts.bubble_seed && p.weight.kind() == WeightKind::kBump) {
    MinimizeResult alt = descend(f, bubble_seed(p), opts);
    if (alt.J < best.J) best = std::move(alt);
  }
  return best;
}

double blowup_scale(double log_mass, double eps, double h_at_peak, double c) {
  return std::exp(0.5 * (log_mass - std::log(kEightPi * (1.0 - eps) * h_at_peak)) - 0.5 * c);
}

std::string sweep_verdict(const std::vector<SweepRecord>& records,
                          const VerdictThresholds& th) {
  const int n = static_cast<int>(records.size());
  if (n < th.window) return "inconclusive";
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = n - th.window; k < n; ++k) {
    lo = std::min(lo, records[k].c);
    hi = std::max(hi, records[k].c);
  }
  if (hi - lo < th.bounded_variation) return "bounded";
  bool increasing = true;
  for (int k = n - th.window + 1; k < n; ++k) increasing &= records[k].c > records[k - 1].c;
  if (!increasing) return "inconclusive";
  auto rate = [&](int k) {
    return (records[k].c - records[k - 1].c) /
           (std::log(records[k - 1].eps) - std::log(records[k].eps));
  };
  const double a = rate(n - 2);
  const double b = rate(n - 1);
  if (std::abs(b - a) <= th.growth_stability * std::max(std::abs(a), std::abs(b))) {
    return "blowup-consistent";
  }
  return "inconclusive";
}

ContinuationReport continuation_sweep(const FunctionalParams& p,
                                      const std::vector<double>& schedule,
                                      const SpectralField& init,
                                      const MinimizeOptions& opts,
                                      const VerdictThresholds& thresholds) {
  if (schedule.empty()) throw std::invalid_argument("ε schedule is empty");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw std::invalid_argument("ε schedule must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1])) {
      throw std::invalid_argument("ε schedule must be strictly decreasing");
    }
  }
  ContinuationReport rep;
  SpectralField start = init;
  const double floor = 1e-6 * p.weight.total();
  for (double eps : schedule) {
    const FunctionalParams q = FunctionalParams::subcritical(p.alpha, eps, p.weight, p.ell);
    MinimizeResult r = minimize_subcritical(q, start, opts);
    SweepRecord rec;
    rec.eps = eps;
    rec.J = r.J;
    rec.mass = r.mass;
    rec.log_mass = r.log_mass;
    rec.c = r.c;
    rec.x = r.x;
    rec.h_at_x = p.weight(r.x);
    rec.r_eps = blowup_scale(r.log_mass, eps, rec.h_at_x, r.c);
    rec.residual = r.el_residual;
    rec.iterations = r.iterations;
    rec.converged = r.converged;
    rec.status = r.status;
    if (!(r.mass > floor)) {
      std::ostringstream msg;
      msg << "mass " << r.mass << " below the floor " << floor << " at eps " << eps;
      rep.findings.push_back(msg.str());
    }
    if (!rep.records.empty()) {
      const SweepRecord& prev = rep.records.back();
      rep.growth.push_back((rec.c - prev.c) / (std::log(prev.eps) - std::log(eps)));
    }
    rep.records.push_back(rec);
    rep.fields.push_back(r.u);
    start = r.u;
  }
  rep.verdict = sweep_verdict(rep.records, thresholds);
  return rep;
}

}  // namespace kw
