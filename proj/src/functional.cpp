#include "kw/functional.hpp"

#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kw {

namespace {

constexpr double kEightPi = 8.0 * std::numbers::pi;

}  // namespace

FunctionalParams FunctionalParams::subcritical(double alpha, double eps,
                                               const WeightFunction& h,
                                               int ell) {
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw std::invalid_argument("ε must lie in [0, 1)");
  }
  return FunctionalParams{alpha, kEightPi * (1.0 - eps), eps, h, ell};
}

FunctionalParams FunctionalParams::with_beta(double alpha, double beta,
                                             const WeightFunction& h,
                                             int ell) {
  return FunctionalParams{alpha, beta, 1.0 - beta / kEightPi, h, ell};
}

bool is_coercive(const FunctionalParams& p) {
  return p.alpha < distinct_eigenvalue(p.geometry(), p.ell + 1);
}

std::vector<bool> admissible_mask(const TorusGeometry& geom, int ell) {
  HalfSpectrum shape(geom.n());
  std::vector<bool> mask(shape.data.size(), false);
  const double cut =
      ell > 0 ? distinct_eigenvalue(geom, ell) * (1.0 + 1e-12) : 0.0;
  for (int i = 0; i < shape.n; ++i)
    for (int j = 0; j < shape.columns(); ++j) {
      if ((i == 0 && j == 0) || shape.is_nyquist(i, j)) continue;
      if (geom.eigenvalue(shape.wave_m(i), j) <= cut) continue;
      mask[static_cast<std::size_t>(i) * shape.columns() + j] = true;
    }
  return mask;
}

Functional::Functional(FunctionalParams params)
    : params_(std::move(params)),
      mask_(admissible_mask(params_.geometry(), params_.ell)),
      padded_n_(padded_size(params_.geometry().n())),
      padded_h_(params_.weight.samples_on(padded_n_)) {}

Functional::Padded Functional::padded(const SpectralField& u) const {
  if (!(u.geometry() == params_.geometry())) {
    throw std::invalid_argument("field and weight live on different grids");
  }
  Padded out;
  out.u = u.upsampled(padded_n_);
  const double top = *std::max_element(out.u.begin(), out.u.end());
  out.mass.shift = top > 500.0 ? top : 0.0;
  out.expu.resize(out.u.size());
  CompensatedSum sum;
  for (std::size_t k = 0; k < out.u.size(); ++k) {
    out.expu[k] = padded_h_[k] * std::exp(out.u[k] - out.mass.shift);
    sum.add(out.expu[k]);
  }
  out.mass.scaled = sum.value() * params_.geometry().volume() /
                    (static_cast<double>(padded_n_) * padded_n_);
  return out;
}

double Functional::value(const SpectralField& u) const {
  return evaluate(u, false).J;
}

Evaluation Functional::evaluate(const SpectralField& u,
                                bool with_gradient) const {
  const Padded pad = padded(u);
  Evaluation ev;
  ev.mass = pad.mass;
  ev.J = 0.5 * quadratic_form(u, params_.alpha) - params_.beta * pad.mass.log();
  if (!with_gradient) return ev;

  const TorusGeometry& geom = params_.geometry();
  const HalfSpectrum f = forward_fft(pad.expu, padded_n_);
  const HalfSpectrum& s = u.spectrum();
  ev.gradient = HalfSpectrum(geom.n());
  // f holds (h e^{u-shift})^ / V-normalized coefficients; dividing by the
  // scaled mass gives the coefficients of h e^u / mass.
  const double inv_mass = 1.0 / pad.mass.scaled;
  for (int i = 0; i < s.n; ++i) {
    const int m = s.wave_m(i);
    const int fi = m >= 0 ? m : m + padded_n_;
    for (int j = 0; j < s.columns(); ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * s.columns() + j;
      if (!mask_[idx]) continue;
      const double lam = geom.eigenvalue(m, j);
      ev.gradient.data[idx] = (lam - params_.alpha) * s.data[idx] -
                              params_.beta * f.at(fi, j) * inv_mass;
    }
  }
  return ev;
}

double Functional::weighted_mean_u(const SpectralField& u) const {
  const Padded pad = padded(u);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < pad.u.size(); ++k) {
    num += pad.u[k] * pad.expu[k];
    den += pad.expu[k];
  }
  return num / den;
}

double eval_J(const SpectralField& u, const FunctionalParams& p) {
  return Functional(p).value(u);
}

SpectralField grad_J(const SpectralField& u, const FunctionalParams& p) {
  return SpectralField::from_spectrum(u.geometry(),
                                      Functional(p).evaluate(u).gradient);
}

double el_residual(const TorusGeometry& geom, const HalfSpectrum& gradient) {
  double sum = 0.0;
  for (int i = 0; i < gradient.n; ++i)
    for (int j = 0; j < gradient.columns(); ++j)
      sum += gradient.weight(j) * std::norm(gradient.at(i, j));
  return std::sqrt(geom.volume() * sum);
}

double el_residual(const SpectralField& u, const FunctionalParams& p) {
  return el_residual(u.geometry(), Functional(p).evaluate(u).gradient);
}

double preconditioned_norm(const TorusGeometry& geom,
                           const HalfSpectrum& gradient, double alpha) {
  double sum = 0.0;
  for (int i = 0; i < gradient.n; ++i)
    for (int j = 0; j < gradient.columns(); ++j) {
      const double g2 = std::norm(gradient.at(i, j));
      if (g2 == 0.0) continue;
      const double shifted = geom.eigenvalue(gradient.wave_m(i), j) - alpha;
      sum += gradient.weight(j) * g2 / std::abs(shifted);
    }
  return std::sqrt(geom.volume() * sum);
}

double energy_identity_gap(const SpectralField& u, const FunctionalParams& p) {
  const double q = quadratic_form(u, p.alpha);
  return std::abs(q - p.beta * Functional(p).weighted_mean_u(u));
}

double weak_bound(const FunctionalParams& p) {
  return kEightPi * std::abs(std::log(p.weight.total()));
}

bool weak_bound_check(double j_value, const FunctionalParams& p) {
  return j_value <= weak_bound(p) + 1e-9;
}

}  // namespace kw
