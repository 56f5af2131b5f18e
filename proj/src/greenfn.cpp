#include "kw/greenfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kw/quadrature.hpp"
#include "linalg.hpp"

namespace kw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kEightPi = 8.0 * kPi;
constexpr int kStencil = 8;
// The cutoff transition spans δ/2; these floors keep it resolved by at least
// 64 samples along the longer side on coarse grids.
constexpr int kMinFine = 512;
constexpr int kMinTable = 1024;

double r2logr(double r) { return r > 0.0 ? r * r * std::log(r) : 0.0; }

struct Singular {
  double alpha;
  double delta;

  double s(double r) const { return -4.0 * std::log(r) + alpha * r2logr(r); }
  double ds(double r) const {
    return -4.0 / r + alpha * (2.0 * r * std::log(r) + r);
  }
  Jet chi(double r) const { return radial_cutoff(r, 0.5 * delta, delta); }

  // (Δ−α)(χS) away from the source; its limit at r = 0 is −4α.
  double residual(double r) const {
    if (r >= delta) return 0.0;
    if (r <= 0.5 * delta) return -4.0 * alpha - alpha * alpha * r2logr(r);
    const Jet c = chi(r);
    const double sv = s(r);
    return -(c.d2 * sv + c.d1 * (2.0 * ds(r) + sv / r)) - 4.0 * alpha * c.v -
           alpha * alpha * c.v * r2logr(r);
  }

  // 2π ∫_0^δ χ(r) S(r) J₀(k r) r dr.
  double hankel(double k) const {
    std::vector<double> breaks{0.0};
    for (double b : geometric_breaks(delta * 1e-9, 0.5 * delta, 2.0)) breaks.push_back(b);
    for (int q = 1; q <= 4; ++q) breaks.push_back(0.5 * delta * (1.0 + q / 4.0));
    return kTwoPi * integrate_1d(
                        [&](double r) {
                          if (r <= 0.0) return 0.0;
                          const double j0 = k > 0.0 ? std::cyl_bessel_j(0.0, k * r) : 1.0;
                          return chi(r).v * s(r) * j0 * r;
                        },
                        breaks, 16);
  }
};

int fine_size(const TorusGeometry& g) {
  const double aspect = std::max(g.lx(), g.ly()) / g.min_side();
  int n = std::max(2 * g.n(), kMinFine);
  while (n < kMinFine * aspect) n *= 2;
  return n;
}

// Eight-point Lagrange weights at fractional index s; fills the first node.
int lagrange_weights(double s, std::array<double, kStencil>& w) {
  const int first = static_cast<int>(std::floor(s)) - kStencil / 2 + 1;
  for (int a = 0; a < kStencil; ++a) {
    double num = 1.0;
    double den = 1.0;
    for (int b = 0; b < kStencil; ++b) {
      if (b == a) continue;
      num *= s - (first + b);
      den *= a - b;
    }
    w[a] = num / den;
  }
  return first;
}

}  // namespace

struct GreenFunction::Impl {
  TorusGeometry geom;
  TorusGeometry fine;
  Point p;
  double alpha;
  int ell;
  Singular sing;
  SpectralField field;
  SpectralField w;
  double robin;

  mutable std::once_flag tables_once;
  mutable int table_n = 0;
  mutable std::vector<double> tw;
  mutable std::vector<double> twx;
  mutable std::vector<double> twy;

  Impl(const TorusGeometry& g, Point src, double a, int l, double delta)
      : geom(g),
        fine(g.lx(), g.ly(), fine_size(g)),
        p(src),
        alpha(a),
        ell(l),
        sing{a, delta},
        field(g),
        w(fine),
        robin(0.0) {}

  void build_tables() const {
    std::call_once(tables_once, [this] {
      table_n = std::max(kMinTable, fine.n());
      tw = inverse_fft(resize_spectrum(w.spectrum(), table_n));
      twx = inverse_fft(resize_spectrum(w.derivative_x().spectrum(), table_n));
      twy = inverse_fft(resize_spectrum(w.derivative_y().spectrum(), table_n));
    });
  }

  double interpolate(const std::vector<double>& table, Point x) const {
    build_tables();
    const Point q = geom.wrap(x);
    const int n = table_n;
    std::array<double, kStencil> wx{};
    std::array<double, kStencil> wy{};
    const int i0 = lagrange_weights(q.x / geom.lx() * n, wx);
    const int j0 = lagrange_weights(q.y / geom.ly() * n, wy);
    double sum = 0.0;
    for (int a = 0; a < kStencil; ++a) {
      const std::size_t row = static_cast<std::size_t>(((i0 + a) % n + n) % n) * n;
      double inner = 0.0;
      for (int b = 0; b < kStencil; ++b) inner += wy[b] * table[row + ((j0 + b) % n + n) % n];
      sum += wx[a] * inner;
    }
    return sum;
  }
};

GreenFunction::GreenFunction(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

Point GreenFunction::source() const { return impl_->p; }
double GreenFunction::alpha() const { return impl_->alpha; }
int GreenFunction::ell() const { return impl_->ell; }
const TorusGeometry& GreenFunction::geometry() const { return impl_->geom; }
const SpectralField& GreenFunction::field() const { return impl_->field; }
const SpectralField& GreenFunction::regular() const { return impl_->w; }
double GreenFunction::robin() const { return impl_->robin; }
double GreenFunction::cutoff_radius() const { return impl_->sing.delta; }

double GreenFunction::regular_value(Point x) const {
  return impl_->interpolate(impl_->tw, x);
}

Point GreenFunction::regular_gradient(Point x) const {
  return {impl_->interpolate(impl_->twx, x), impl_->interpolate(impl_->twy, x)};
}

double GreenFunction::value(Point x) const {
  const Point d = impl_->geom.displacement(impl_->p, x);
  const double r = std::hypot(d.x, d.y);
  if (r == 0.0) return -std::numeric_limits<double>::infinity();
  const auto& s = impl_->sing;
  const double singular = r >= s.delta ? 0.0 : s.chi(r).v * s.s(r);
  return singular + regular_value(x);
}

Point GreenFunction::gradient(Point x) const {
  const Point d = impl_->geom.displacement(impl_->p, x);
  const double r = std::hypot(d.x, d.y);
  Point g = regular_gradient(x);
  const auto& s = impl_->sing;
  if (r > 0.0 && r < s.delta) {
    const Jet c = s.chi(r);
    const double radial = c.d1 * s.s(r) + c.v * s.ds(r);
    g.x += radial * d.x / r;
    g.y += radial * d.y / r;
  }
  return g;
}

double GreenFunction::psi(Point x) const {
  const Point d = impl_->geom.displacement(impl_->p, x);
  const double r = std::hypot(d.x, d.y);
  if (r < 0.5 * impl_->sing.delta) {
    return regular_value(x) - impl_->robin + impl_->alpha * r2logr(r);
  }
  return value(x) + 4.0 * std::log(r) - impl_->robin;
}

Point GreenFunction::psi_gradient(Point x) const {
  const Point d = impl_->geom.displacement(impl_->p, x);
  const double r = std::hypot(d.x, d.y);
  if (r < 0.5 * impl_->sing.delta) {
    Point g = regular_gradient(x);
    if (r > 0.0) {
      const double f = impl_->alpha * (2.0 * std::log(r) + 1.0);
      g.x += f * d.x;
      g.y += f * d.y;
    }
    return g;
  }
  Point g = gradient(x);
  g.x += 4.0 * d.x / (r * r);
  g.y += 4.0 * d.y / (r * r);
  return g;
}

std::vector<double> GreenFunction::grid_values() const {
  const auto& geom = impl_->geom;
  std::vector<double> out(geom.size());
  const double h = std::max(geom.hx(), geom.hy());
  for (int i = 0; i < geom.n(); ++i)
    for (int j = 0; j < geom.n(); ++j) {
      const Point x = geom.grid_point(i, j);
      const double v = value(x);
      out[geom.index(i, j)] =
          std::isinf(v) ? impl_->robin - 4.0 * std::log(0.5 * h) : v;
    }
  return out;
}

GreenFunction green_solve(const TorusGeometry& geom, double alpha, Point p,
                          int ell) {
  if (ell < 0) throw std::invalid_argument("ℓ must be ≥ 0");
  if (ell > resolved_levels(geom)) {
    throw std::invalid_argument("ℓ = " + std::to_string(ell) +
                                " exceeds the resolved distinct eigenvalues");
  }
  const Point src = geom.wrap(p);
  auto impl = std::make_shared<GreenFunction::Impl>(geom, src, alpha, ell, 0.25 * geom.min_side());
  const double vol = geom.volume();
  const double cut = ell > 0 ? distinct_eigenvalue(geom, ell) * (1.0 + 1e-12) : 0.0;
  auto phase = [&](int m, int n) {
    return std::polar(1.0, -kTwoPi * (m * src.x / geom.lx() + n * src.y / geom.ly()));
  };

  // Truncated expansion on the N grid.
  HalfSpectrum gs(geom.n());
  for (int i = 0; i < gs.n; ++i)
    for (int j = 0; j < gs.columns(); ++j) {
      const int m = gs.wave_m(i);
      if ((m == 0 && j == 0) || gs.is_nyquist(i, j)) continue;
      const double lam = geom.eigenvalue(m, j);
      if (lam <= cut) continue;
      if (std::abs(lam - alpha) < 1e-8) {
        throw std::invalid_argument("resonant α: within 1e-8 of eigenvalue " +
                                    std::to_string(lam));
      }
      gs.at(i, j) = kEightPi / vol * phase(m, j) / (lam - alpha);
    }
  impl->field = SpectralField::from_spectrum(geom, std::move(gs));

  // Smooth remainder on the 2N grid: (Δ−α)w = −8π/V − (Δ−α)(χS) off E_ℓ.
  const TorusGeometry& fine = impl->fine;
  const Singular& sing = impl->sing;
  std::vector<double> residual(fine.size());
  for (int i = 0; i < fine.n(); ++i)
    for (int j = 0; j < fine.n(); ++j) {
      const Point d = fine.displacement(src, fine.grid_point(i, j));
      residual[fine.index(i, j)] = sing.residual(std::hypot(d.x, d.y));
    }
  const HalfSpectrum rhat = forward_fft(residual, fine.n());
  HalfSpectrum ws(fine.n());
  for (int i = 0; i < ws.n; ++i)
    for (int j = 0; j < ws.columns(); ++j) {
      if (ws.is_nyquist(i, j)) continue;
      const int m = ws.wave_m(i);
      const double lam = fine.eigenvalue(m, j);
      if (m == 0 && j == 0) {
        ws.at(i, j) = -sing.hankel(0.0) / vol;
      } else if (lam <= cut) {
        // G has no E_ℓ content, so w = −χS there.
        ws.at(i, j) = -phase(m, j) * sing.hankel(std::sqrt(lam)) / vol;
      } else {
        if (std::abs(lam - alpha) < 1e-8) {
          throw std::invalid_argument("resonant α: within 1e-8 of eigenvalue " +
                                      std::to_string(lam));
        }
        ws.at(i, j) = -rhat.at(i, j) / (lam - alpha);
      }
    }
  impl->w = SpectralField::from_spectrum(fine, std::move(ws));
  impl->robin = impl->w.value_at(src);
  return GreenFunction(std::move(impl));
}

double robin_constant(const GreenFunction& g, RobinMethod method) {
  if (method == RobinMethod::kSplit) return g.robin();
  const TorusGeometry& geom = g.geometry();
  const double h = std::max(geom.hx(), geom.hy());
  const Point p = g.source();
  const double alpha = g.alpha();
  constexpr int kTerms = 7;
  std::array<std::array<double, kTerms>, kTerms> ata{};
  std::array<double, kTerms> atb{};
  const int reach = static_cast<int>(std::ceil(16.0 * h / std::min(geom.hx(), geom.hy()))) + 1;
  const int ci = static_cast<int>(std::lround(p.x / geom.hx()));
  const int cj = static_cast<int>(std::lround(p.y / geom.hy()));
  for (int a = -reach; a <= reach; ++a)
    for (int b = -reach; b <= reach; ++b) {
      const int i = ((ci + a) % geom.n() + geom.n()) % geom.n();
      const int j = ((cj + b) % geom.n() + geom.n()) % geom.n();
      const Point x = geom.grid_point(i, j);
      const Point d = geom.displacement(p, x);
      const double r = std::hypot(d.x, d.y);
      if (r < 4.0 * h || r > 16.0 * h) continue;
      // Singular part of G through r⁴ log r: −4 log r · J₀(√α r).
      const double y = g.value(x) + 4.0 * std::log(r) - alpha * r2logr(r) +
                       alpha * alpha / 16.0 * r * r * r2logr(r);
      const double xx = d.x * d.x, yy = d.y * d.y;
      const std::array<double, kTerms> row{1.0, xx, yy, d.x * d.y, xx * xx, yy * yy, xx * yy};
      for (int s = 0; s < kTerms; ++s) {
        atb[s] += row[s] * y;
        for (int t = 0; t < kTerms; ++t) ata[s][t] += row[s] * row[t];
      }
    }
  return solve_small<kTerms>(ata, atb)[0];
}

RobinReport robin_report(const GreenFunction& g) {
  RobinReport rep;
  rep.split = robin_constant(g, RobinMethod::kSplit);
  rep.extrapolate = robin_constant(g, RobinMethod::kExtrapolate);
  rep.gap = std::abs(rep.split - rep.extrapolate);
  rep.under_resolved = rep.gap > 1e-3;
  return rep;
}

Landscape robin_landscape(const TorusGeometry& geom, double alpha,
                          const WeightFunction& h, int ell, int samples) {
  if (samples < 3) throw std::invalid_argument("landscape needs ≥ 3 samples per axis");
  Landscape out;
  out.samples = samples;
  out.robin = green_solve(geom, alpha, {0.0, 0.0}, ell).robin();
  out.values.resize(static_cast<std::size_t>(samples) * samples);
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < samples; ++j) {
      const Point p{i * geom.lx() / samples, j * geom.ly() / samples};
      out.values[static_cast<std::size_t>(i) * samples + j] = out.robin + 2.0 * std::log(h(p));
    }
  const PeakFit fit = fit_peak(out.values, samples, geom.lx(), geom.ly());
  out.argmax = fit.location;
  out.max_value = fit.value;
  out.degenerate = fit.degenerate;
  return out;
}

}  // namespace kw
