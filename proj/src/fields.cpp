#include "kw/fields.hpp"

#include "linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void drop_nyquist(HalfSpectrum& s) {
  const int half = s.n / 2;
  for (int j = 0; j < s.columns(); ++j) s.at(half, j) = 0.0;
  for (int i = 0; i < s.n; ++i) s.at(i, half) = 0.0;
}

int row_of(int m, int n) { return m >= 0 ? m : m + n; }

// Complex coefficient of exp(i k·x) for k = (m, n), any sign of n.
Complex wave_coefficient(const HalfSpectrum& s, int m, int n) {
  if (n >= 0) return s.at(row_of(m, s.n), n);
  return std::conj(s.at(row_of(-m, s.n), -n));
}

double eigenvalue_at(const TorusGeometry& geom, const HalfSpectrum& s, int i,
                     int j) {
  return geom.eigenvalue(s.wave_m(i), j);
}

}  // namespace

SpectralField::SpectralField(const TorusGeometry& geom)
    : geom_(geom), spectrum_(geom.n()), grid_(geom.size(), 0.0) {}

SpectralField::SpectralField(const TorusGeometry& geom, HalfSpectrum spectrum)
    : geom_(geom), spectrum_(std::move(spectrum)) {
  if (spectrum_.n != geom.n()) {
    throw std::invalid_argument("spectrum size does not match the grid");
  }
  drop_nyquist(spectrum_);
  grid_ = inverse_fft(spectrum_);
}

SpectralField SpectralField::from_grid(const TorusGeometry& geom,
                                       std::span<const double> values) {
  if (values.size() != geom.size()) {
    throw std::invalid_argument("from_grid: sample count does not match grid");
  }
  return SpectralField(geom, forward_fft(values, geom.n()));
}

SpectralField SpectralField::from_spectrum(const TorusGeometry& geom,
                                           HalfSpectrum spectrum) {
  return SpectralField(geom, std::move(spectrum));
}

SpectralField SpectralField::from_modes(const TorusGeometry& geom,
                                        std::span<const Mode> modes,
                                        std::span<const double> coeffs,
                                        double mean) {
  if (modes.size() != coeffs.size()) {
    throw std::invalid_argument("from_modes: one coefficient per mode");
  }
  HalfSpectrum s(geom.n());
  const int half = geom.n() / 2;
  const double scale = 1.0 / std::sqrt(2.0 * geom.volume());
  s.at(0, 0) = mean;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const Mode& md = modes[k];
    if (std::abs(md.m) >= half || std::abs(md.n) >= half) {
      throw std::invalid_argument("from_modes: mode not representable on grid");
    }
    // c cos θ ↔ ĉ = c/√(2V); c sin θ ↔ ĉ = −i c/√(2V).
    Complex c = md.parity == Parity::kCos ? Complex(coeffs[k] * scale, 0.0)
                                          : Complex(0.0, -coeffs[k] * scale);
    int m = md.m;
    int n = md.n;
    if (n < 0) {
      m = -m;
      n = -n;
      c = std::conj(c);
    }
    s.at(row_of(m, geom.n()), n) += c;
    if (n == 0) s.at(row_of(-m, geom.n()), 0) += std::conj(c);
  }
  return SpectralField(geom, std::move(s));
}

double SpectralField::coefficient(const Mode& mode) const {
  const Complex c = wave_coefficient(spectrum_, mode.m, mode.n);
  const double scale = std::sqrt(2.0 * geom_.volume());
  return mode.parity == Parity::kCos ? scale * c.real() : -scale * c.imag();
}

std::vector<double> SpectralField::coefficients(
    std::span<const Mode> modes) const {
  std::vector<double> out;
  out.reserve(modes.size());
  for (const auto& m : modes) out.push_back(coefficient(m));
  return out;
}

double SpectralField::value_at(Point p) const {
  const int n = geom_.n();
  const double ax = kTwoPi * p.x / geom_.lx();
  const double ay = kTwoPi * p.y / geom_.ly();
  std::vector<Complex> ey(spectrum_.columns());
  for (int j = 0; j < spectrum_.columns(); ++j) ey[j] = spectrum_.weight(j) * std::polar(1.0, j * ay);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Complex row = 0.0;
    for (int j = 0; j < spectrum_.columns(); ++j) row += spectrum_.at(i, j) * ey[j];
    sum += (row * std::polar(1.0, spectrum_.wave_m(i) * ax)).real();
  }
  return sum;
}

double SpectralField::bilinear(Point p) const {
  const Point q = geom_.wrap(p);
  const int n = geom_.n();
  const double fx = q.x / geom_.hx();
  const double fy = q.y / geom_.hy();
  const int i0 = static_cast<int>(std::floor(fx)) % n;
  const int j0 = static_cast<int>(std::floor(fy)) % n;
  const double tx = fx - std::floor(fx);
  const double ty = fy - std::floor(fy);
  const int i1 = (i0 + 1) % n;
  const int j1 = (j0 + 1) % n;
  return (1 - tx) * (1 - ty) * grid_[geom_.index(i0, j0)] +
         tx * (1 - ty) * grid_[geom_.index(i1, j0)] +
         (1 - tx) * ty * grid_[geom_.index(i0, j1)] +
         tx * ty * grid_[geom_.index(i1, j1)];
}

SpectralField SpectralField::derivative_x() const {
  HalfSpectrum s = spectrum_;
  for (int i = 0; i < s.n; ++i) {
    const Complex f(0.0, kTwoPi * s.wave_m(i) / geom_.lx());
    for (int j = 0; j < s.columns(); ++j) s.at(i, j) *= f;
  }
  return SpectralField(geom_, std::move(s));
}

SpectralField SpectralField::derivative_y() const {
  HalfSpectrum s = spectrum_;
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.columns(); ++j)
      s.at(i, j) *= Complex(0.0, kTwoPi * j / geom_.ly());
  return SpectralField(geom_, std::move(s));
}

std::vector<double> SpectralField::upsampled(int n) const {
  if (n < geom_.n() || n % 2 != 0) {
    throw std::invalid_argument("upsampled: target must be an even size ≥ N");
  }
  return inverse_fft(resize_spectrum(spectrum_, n));
}

void SpectralField::check_same_geometry(const SpectralField& other) const {
  if (!(geom_ == other.geom_)) {
    throw std::invalid_argument("fields live on different grids");
  }
}

SpectralField SpectralField::operator+(const SpectralField& other) const {
  check_same_geometry(other);
  HalfSpectrum s = spectrum_;
  for (std::size_t k = 0; k < s.data.size(); ++k) s.data[k] += other.spectrum_.data[k];
  return SpectralField(geom_, std::move(s));
}

SpectralField SpectralField::operator-(const SpectralField& other) const {
  return *this + other * -1.0;
}

SpectralField SpectralField::operator*(double factor) const {
  HalfSpectrum s = spectrum_;
  for (auto& c : s.data) c *= factor;
  return SpectralField(geom_, std::move(s));
}

SpectralField SpectralField::plus_constant(double c) const {
  HalfSpectrum s = spectrum_;
  s.at(0, 0) += c;
  return SpectralField(geom_, std::move(s));
}

double SpectralField::l2_norm_squared() const { return inner(*this); }

double SpectralField::inner(const SpectralField& other) const {
  check_same_geometry(other);
  double sum = 0.0;
  for (int i = 0; i < spectrum_.n; ++i)
    for (int j = 0; j < spectrum_.columns(); ++j)
      sum += spectrum_.weight(j) *
             (spectrum_.at(i, j) * std::conj(other.spectrum_.at(i, j))).real();
  return geom_.volume() * sum;
}

double SpectralField::dirichlet_energy() const {
  double sum = 0.0;
  for (int i = 0; i < spectrum_.n; ++i)
    for (int j = 0; j < spectrum_.columns(); ++j)
      sum += spectrum_.weight(j) * eigenvalue_at(geom_, spectrum_, i, j) *
             std::norm(spectrum_.at(i, j));
  return geom_.volume() * sum;
}

std::vector<double> synthesize(const TorusGeometry& geom,
                               std::span<const Mode> modes,
                               std::span<const double> coeffs, double mean) {
  const auto f = SpectralField::from_modes(geom, modes, coeffs, mean);
  return {f.grid().begin(), f.grid().end()};
}

std::vector<double> analyze(const TorusGeometry& geom,
                            std::span<const Mode> modes,
                            std::span<const double> grid) {
  return SpectralField::from_grid(geom, grid).coefficients(modes);
}

double quadratic_form(const SpectralField& u, double alpha) {
  const auto& s = u.spectrum();
  double sum = 0.0;
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.columns(); ++j) {
      if (i == 0 && j == 0) continue;
      sum += s.weight(j) * (eigenvalue_at(u.geometry(), s, i, j) - alpha) *
             std::norm(s.at(i, j));
    }
  return u.geometry().volume() * sum;
}

double h1_alpha_norm(const SpectralField& u, double alpha) {
  const double q = quadratic_form(u, alpha);
  return std::copysign(std::sqrt(std::abs(q)), q);
}

SpectralField project_mean_zero(const SpectralField& u) {
  return u.plus_constant(-u.mean());
}

SpectralField project_perp(const SpectralField& u, int ell) {
  if (ell < 0) throw std::invalid_argument("project_perp: ℓ must be ≥ 0");
  HalfSpectrum s = u.spectrum();
  s.at(0, 0) = 0.0;
  if (ell > 0) {
    const double top = distinct_eigenvalue(u.geometry(), ell);
    const double cut = top * (1.0 + 1e-12);
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.columns(); ++j)
        if (eigenvalue_at(u.geometry(), s, i, j) <= cut) s.at(i, j) = 0.0;
  }
  return SpectralField::from_spectrum(u.geometry(), std::move(s));
}

WeightFunction::WeightFunction(const TorusGeometry& geom, WeightKind kind,
                               double a, double kappa, Point center)
    : geom_(geom), kind_(kind), a_(a), kappa_(kappa), center_(center) {
  samples_ = samples_on(geom.n());
  min_h_ = std::numeric_limits<double>::infinity();
  max_h_ = -min_h_;
  for (int i = 0; i < geom.n(); ++i)
    for (int j = 0; j < geom.n(); ++j) {
      const double v = samples_[geom.index(i, j)];
      min_h_ = std::min(min_h_, v);
      if (v > max_h_) {
        max_h_ = v;
        argmax_ = geom.grid_point(i, j);
      }
    }
  // Closed-form maxima are exact; the grid only supplies a fallback.
  if (kind_ == WeightKind::kCosine) {
    argmax_ = a_ >= 0.0 ? Point{0.0, 0.0} : Point{geom.lx() / 2, 0.0};
    max_h_ = 1.0 + std::abs(a_);
    min_h_ = 1.0 - std::abs(a_);
  } else if (kind_ == WeightKind::kBump && a_ > 0.0) {
    argmax_ = geom.wrap(center_);
    max_h_ = 1.0 + a_;
  }
}

WeightFunction WeightFunction::uniform(const TorusGeometry& geom) {
  return WeightFunction(geom, WeightKind::kUniform, 0.0, 0.0, {0.0, 0.0});
}

WeightFunction WeightFunction::cosine(const TorusGeometry& geom, double a) {
  if (!(std::abs(a) < 1.0)) {
    throw std::invalid_argument("cosine weight needs |a| < 1 to stay positive");
  }
  return WeightFunction(geom, WeightKind::kCosine, a, 0.0, {0.0, 0.0});
}

WeightFunction WeightFunction::bump(const TorusGeometry& geom, double a,
                                    double kappa, double x0, double y0) {
  if (!(a > -1.0)) {
    throw std::invalid_argument("bump weight needs a > -1 to stay positive");
  }
  if (!(kappa >= 0.0)) throw std::invalid_argument("bump weight needs κ ≥ 0");
  return WeightFunction(geom, WeightKind::kBump, a, kappa, {x0, y0});
}

double WeightFunction::operator()(Point p) const {
  switch (kind_) {
    case WeightKind::kUniform:
      return 1.0;
    case WeightKind::kCosine:
      return 1.0 + a_ * std::cos(kTwoPi * p.x / geom_.lx());
    case WeightKind::kBump: {
      const double sx = geom_.lx() / std::numbers::pi *
                        std::sin(std::numbers::pi * (p.x - center_.x) / geom_.lx());
      const double sy = geom_.ly() / std::numbers::pi *
                        std::sin(std::numbers::pi * (p.y - center_.y) / geom_.ly());
      return 1.0 + a_ * std::exp(-kappa_ * (sx * sx + sy * sy));
    }
  }
  return 1.0;
}

std::vector<double> WeightFunction::samples_on(int n) const {
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  const double hx = geom_.lx() / n;
  const double hy = geom_.ly() / n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out[static_cast<std::size_t>(i) * n + j] = (*this)({i * hx, j * hy});
  return out;
}

double WeightFunction::total() const { return integrate(geom_, samples_); }

double ExpMass::log() const { return shift + std::log(scaled); }

double ExpMass::value() const { return std::exp(shift) * scaled; }

int padded_size(int n) { return 3 * n / 2; }

ExpMass exp_mass(const SpectralField& u, const WeightFunction& h) {
  if (!(u.geometry() == h.geometry())) {
    throw std::invalid_argument("exp_mass: weight lives on a different grid");
  }
  const int m = padded_size(u.geometry().n());
  const auto fine = u.upsampled(m);
  const auto weight = h.samples_on(m);
  const double top = *std::max_element(fine.begin(), fine.end());
  ExpMass out;
  out.shift = top > 500.0 ? top : 0.0;
  CompensatedSum sum;
  for (std::size_t k = 0; k < fine.size(); ++k) sum.add(weight[k] * std::exp(fine[k] - out.shift));
  out.scaled = sum.value() * u.geometry().volume() / (static_cast<double>(m) * m);
  return out;
}

PeakFit fit_peak(std::span<const double> values, int n, double lx, double ly) {
  if (values.size() != static_cast<std::size_t>(n) * n || n < 3) {
    throw std::invalid_argument("fit_peak: need n x n samples with n ≥ 3");
  }
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  const int bi = static_cast<int>(best) / n;
  const int bj = static_cast<int>(best) % n;
  const double v0 = values[best];
  auto at = [&](int a, int b) {
    return values[static_cast<std::size_t>((bi + a + n) % n) * n + (bj + b + n) % n];
  };

  // Quadratic through the centre value, least squares over the other eight:
  // v - v0 = gx a + gy b + ½hxx a² + hxy a b + ½hyy b² (grid units).
  std::array<std::array<double, 5>, 5> ata{};
  std::array<double, 5> atb{};
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      if (a == 0 && b == 0) continue;
      const std::array<double, 5> row{double(a), double(b), 0.5 * a * a,
                                      double(a * b), 0.5 * b * b};
      const double rhs = at(a, b) - v0;
      for (int r = 0; r < 5; ++r) {
        atb[r] += row[r] * rhs;
        for (int c = 0; c < 5; ++c) ata[r][c] += row[r] * row[c];
      }
    }
  const auto x = solve_small<5>(ata, atb);
  const double gx = x[0], gy = x[1], hxx = x[2], hxy = x[3], hyy = x[4];

  // Pseudo-inverse of the Hessian through its eigen-decomposition.
  const double tr = 0.5 * (hxx + hyy);
  const double dif = 0.5 * (hxx - hyy);
  const double rad = std::hypot(dif, hxy);
  const std::array<double, 2> mu{tr + rad, tr - rad};
  const double theta = 0.5 * std::atan2(2.0 * hxy, hxx - hyy);
  const std::array<std::array<double, 2>, 2> vec{
      std::array<double, 2>{std::cos(theta), std::sin(theta)},
      std::array<double, 2>{-std::sin(theta), std::cos(theta)}};
  const double tol = 1e-9 * std::max({1.0, std::abs(v0), std::abs(hxx),
                                      std::abs(hyy), std::abs(hxy)});
  PeakFit fit;
  double sx = 0.0;
  double sy = 0.0;
  for (int e = 0; e < 2; ++e) {
    if (std::abs(mu[e]) <= tol) {
      fit.degenerate = true;
      continue;
    }
    const double proj = -(vec[e][0] * gx + vec[e][1] * gy) / mu[e];
    sx += proj * vec[e][0];
    sy += proj * vec[e][1];
  }
  sx = std::clamp(sx, -1.0, 1.0);
  sy = std::clamp(sy, -1.0, 1.0);
  fit.value = v0 + gx * sx + gy * sy +
              0.5 * (hxx * sx * sx + 2.0 * hxy * sx * sy + hyy * sy * sy);
  if (fit.value < v0) {
    fit.value = v0;
    sx = sy = 0.0;
  }
  const double hx = lx / n;
  const double hy = ly / n;
  double px = std::fmod((bi + sx) * hx + lx, lx);
  double py = std::fmod((bj + sy) * hy + ly, ly);
  fit.location = {px, py};
  return fit;
}

}  // namespace kw
