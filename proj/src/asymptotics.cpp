#include "kw/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kw {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
constexpr double kEightPi = 8.0 * kPi;

struct PolarNode {
  Point x;
  double r = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double w = 0.0;
};

// Tensor Gauss–Legendre (radial) x equispaced (angular) nodes around center,
// weights include the Jacobian r.
std::vector<PolarNode> polar_nodes(const TorusGeometry& geom, Point center,
                                   const std::vector<double>& breaks,
                                   int angles, int points = 12) {
  const GaussRule& g = gauss_legendre(points);
  std::vector<double> cs(angles), sn(angles);
  for (int a = 0; a < angles; ++a) {
    const double th = (a + 0.5) * kTwoPi / angles;
    cs[a] = std::cos(th);
    sn[a] = std::sin(th);
  }
  std::vector<PolarNode> out;
  out.reserve((breaks.size() - 1) * points * angles);
  const double dth = kTwoPi / angles;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double mid = 0.5 * (breaks[b] + breaks[b + 1]);
    const double half = 0.5 * (breaks[b + 1] - breaks[b]);
    for (int q = 0; q < points; ++q) {
      const double r = mid + half * g.nodes[q];
      const double w = half * g.weights[q] * r * dth;
      for (int a = 0; a < angles; ++a) {
        const double dx = r * cs[a];
        const double dy = r * sn[a];
        out.push_back({geom.wrap({center.x + dx, center.y + dy}), r, dx, dy, w});
      }
    }
  }
  return out;
}

std::vector<double> linear_breaks(double a, double b, int pieces) {
  std::vector<double> out(pieces + 1);
  for (int i = 0; i <= pieces; ++i) out[i] = a + (b - a) * i / pieces;
  return out;
}

double mode_sum(const std::vector<Mode>& modes, const std::vector<double>& coeffs,
                const TorusGeometry& geom, Point x) {
  double s = 0.0;
  for (std::size_t k = 0; k < modes.size(); ++k) s += coeffs[k] * modes[k].value(geom, x);
  return s;
}

}  // namespace

double bubble_profile(double r) { return -2.0 * std::log1p(r * r / 8.0); }

double bubble_profile(Point y) { return bubble_profile(std::hypot(y.x, y.y)); }

double bubble_mass() {
  const double tail = 1e3;
  std::vector<double> breaks{0.0};
  for (double b : geometric_breaks(0.5, tail, 1.5)) breaks.push_back(b);
  const double body = integrate_1d(
      [](double r) { return std::exp(bubble_profile(r)) * kTwoPi * r; }, breaks, 16);
  return body + kEightPi / (1.0 + tail * tail / 8.0);
}

double inner_energy_check(double R) {
  if (!(R > 0.0)) throw std::invalid_argument("inner_energy_check needs R > 0");
  std::vector<double> breaks{0.0};
  if (R > 0.5) {
    for (double b : geometric_breaks(0.5, R, 1.5)) breaks.push_back(b);
  } else {
    breaks.push_back(R);
  }
  const double energy = integrate_1d(
      [](double r) {
        const double d = -0.5 * r / (1.0 + r * r / 8.0);
        return d * d * kTwoPi * r;
      },
      breaks, 16);
  return energy - (16.0 * kPi * std::log1p(R * R / 8.0) - 16.0 * kPi);
}

double infimum_formula(double a_max_combined) {
  return -kEightPi - kEightPi * std::log(kPi) - 4.0 * kPi * a_max_combined;
}

ProfileError rescaled_profile_error(const std::function<double(Point)>& u,
                                    const TorusGeometry& geom, Point x0,
                                    double r_scale, double R) {
  if (!(r_scale > 0.0) || !(R > 0.0)) throw std::invalid_argument("scale and R must be positive");
  if (!(r_scale * R < 0.5 * geom.min_side())) {
    throw std::invalid_argument("rescaled ball does not fit in the torus");
  }
  const double u0 = u(x0);
  ProfileError out;
  const int radii = 32;
  const int angles = 32;
  for (int i = 0; i <= radii; ++i) {
    const double s = R * i / radii;
    for (int a = 0; a < (i == 0 ? 1 : angles); ++a) {
      const double th = kTwoPi * a / angles;
      const Point y{s * std::cos(th), s * std::sin(th)};
      const double v = u(geom.wrap({x0.x + r_scale * y.x, x0.y + r_scale * y.y}));
      out.phi_error = std::max(out.phi_error, std::abs(v - u0 - bubble_profile(y)));
      if (std::abs(u0) > 1.0) out.psi_ratio_error = std::max(out.psi_ratio_error, std::abs(v / u0 - 1.0));
    }
  }
  return out;
}

ProfileError rescaled_profile_error(const SpectralField& u, Point x0,
                                    double r_scale, double R) {
  return rescaled_profile_error([&](Point x) { return u.bilinear(x); }, u.geometry(), x0,
                                r_scale, R);
}

double concentration_fraction(const SpectralField& u, const WeightFunction& h,
                              Point center, double radius) {
  const TorusGeometry& geom = u.geometry();
  if (!(radius > 0.0) || !(radius < 0.5 * geom.min_side())) {
    throw std::invalid_argument("radius must lie in (0, min(Lx,Ly)/2)");
  }
  const ExpMass total = exp_mass(u, h);
  double ball = 0.0;
  for (const auto& nd : polar_nodes(geom, center, linear_breaks(0.0, radius, 4), 64)) {
    ball += nd.w * h(nd.x) * std::exp(u.value_at(nd.x) - total.shift);
  }
  return ball / total.scaled;
}

double far_field_gap(const std::function<double(Point)>& u,
                     const GreenFunction& g, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("far_field_gap needs δ > 0");
  const TorusGeometry& geom = g.geometry();
  double gap = 0.0;
  for (int i = 0; i < geom.n(); ++i)
    for (int j = 0; j < geom.n(); ++j) {
      const Point x = geom.grid_point(i, j);
      if (geodesic_distance(geom, g.source(), x) < delta) continue;
      gap = std::max(gap, std::abs(u(x) - g.value(x)));
    }
  return gap;
}

double far_field_gap(const SpectralField& u, const GreenFunction& g, double delta) {
  if (!(u.geometry() == g.geometry())) throw std::invalid_argument("grid mismatch");
  const TorusGeometry& geom = u.geometry();
  const auto vals = u.grid();
  return far_field_gap(
      [&](Point x) {
        const int i = static_cast<int>(std::lround(x.x / geom.hx())) % geom.n();
        const int j = static_cast<int>(std::lround(x.y / geom.hy())) % geom.n();
        return vals[geom.index(i, j)];
      },
      g, delta);
}

// ---------------------------------------------------------------------------

TestFunctionBundle::TestFunctionBundle(GreenFunction g, FunctionalParams params,
                                       double eps)
    : green_(std::move(g)), params_(std::move(params)), eps_(eps) {
  R_ = std::pow(eps, -1.0 / 3.0);
  c_ = 2.0 * std::log1p(R_ * R_ / 8.0) - 4.0 * std::log(R_) - 4.0 * std::log(eps) + green_.robin();
}

Jet TestFunctionBundle::eta(double r) const {
  const double a = R_ * eps_;
  const Jet q = quintic_step((r - a) / a);
  return {1.0 - q.v, -q.d1 / a, -q.d2 / (a * a)};
}

double TestFunctionBundle::value(Point x) const {
  const TorusGeometry& geom = green_.geometry();
  const double r = geodesic_distance(geom, center(), x);
  const double a = R_ * eps_;
  if (r <= a) return c_ - 2.0 * std::log1p(r * r / (8.0 * eps_ * eps_));
  if (r <= 2.0 * a) return green_.value(x) - eta(r).v * green_.psi(x);
  return green_.value(x);
}

double TestFunctionBundle::continuity_gap() const {
  const double a = R_ * eps_;
  return std::abs((c_ - 2.0 * std::log1p(R_ * R_ / 8.0)) - (green_.robin() - 4.0 * std::log(a)));
}

double TestFunctionBundle::eta_gradient_bound() const {
  const double a = R_ * eps_;
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) worst = std::max(worst, std::abs(eta(a + a * i / 1000.0).d1) * a);
  return worst;
}

Expansion TestFunctionBundle::dirichlet_expansion() const {
  const double A = green_.robin();
  const double expected = -32.0 * kPi * std::log(eps_) - 16.0 * kPi * std::log(8.0) - 16.0 * kPi +
                          kEightPi * A + params_.alpha * green_l2_;
  return {dirichlet_, expected, std::abs(dirichlet_ - expected)};
}

Expansion TestFunctionBundle::log_mass_expansion() const {
  const double hp = params_.weight(center());
  const double expected = -std::log(8.0) + std::log(kPi * hp) - 2.0 * std::log(eps_) + green_.robin();
  return {log_mass_, expected, std::abs(log_mass_ - expected)};
}

Expansion TestFunctionBundle::J_expansion() const {
  const double hp = params_.weight(center());
  const double expected = infimum_formula(2.0 * std::log(hp) + green_.robin());
  return {J_, expected, std::abs(J_ - expected)};
}

TestFunctionBundle build_test_function(const TorusGeometry& geom, double eps,
                                       Point p, double alpha,
                                       const WeightFunction& h, int ell) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("ε must lie in (0, 1)");
  const double R = std::pow(eps, -1.0 / 3.0);
  const double a = R * eps;
  const double rho = 2.0 * a;
  const double L = geom.min_side();
  if (!(rho < 0.25 * L)) {
    throw std::invalid_argument("ε too large: 2Rε must stay below min(Lx,Ly)/4");
  }
  if (!(h.geometry() == geom)) throw std::invalid_argument("weight lives on a different grid");
  TestFunctionBundle b(green_solve(geom, alpha, p, ell),
                       FunctionalParams::with_beta(alpha, kEightPi, h, ell), eps);
  const GreenFunction& G = b.green_;
  const double V = geom.volume();
  b.modes_ = eigenspace_modes(geom, ell);
  const auto& modes = b.modes_;
  const std::size_t nm = modes.size();

  // Disc B_ρ where φ differs from G.
  std::vector<double> disc_breaks{0.0};
  for (double x : geometric_breaks(1e-4 * eps, a, 2.0)) disc_breaks.push_back(x);
  for (double x : linear_breaks(a, rho, 4)) if (x > a) disc_breaks.push_back(x);
  struct DiscSample {
    double w, r, phi, g, grad2, h;
    std::vector<double> e;
  };
  std::vector<DiscSample> disc;
  for (const auto& nd : polar_nodes(geom, p, disc_breaks, 48)) {
    DiscSample s{nd.w, nd.r, 0.0, G.value(nd.x), 0.0, h(nd.x), {}};
    if (nd.r <= a) {
      const double q = nd.r * nd.r / (8.0 * eps * eps);
      s.phi = b.c_ - 2.0 * std::log1p(q);
      const double d = -0.5 * nd.r / (eps * eps * (1.0 + q));
      s.grad2 = d * d;
    } else {
      const Jet et = b.eta(nd.r);
      const double psi = G.psi(nd.x);
      const Point gg = G.gradient(nd.x);
      const Point gp = G.psi_gradient(nd.x);
      s.phi = s.g - et.v * psi;
      const double gx = gg.x - et.d1 * psi * nd.dx / nd.r - et.v * gp.x;
      const double gy = gg.y - et.d1 * psi * nd.dy / nd.r - et.v * gp.y;
      s.grad2 = gx * gx + gy * gy;
    }
    s.e.resize(nm);
    for (std::size_t k = 0; k < nm; ++k) s.e[k] = modes[k].value(geom, nd.x);
    disc.push_back(std::move(s));
  }

  // Outside B_ρ, φ = G: polar quadrature up to 0.375 L under a partition of
  // unity, grid quadrature beyond.
  const double q_in = 0.25 * L;
  const double q_out = 0.375 * L;
  struct OuterSample {
    double w, g, grad2, h;
    std::vector<double> e;
  };
  std::vector<OuterSample> outer;
  for (const auto& nd : polar_nodes(geom, p, geometric_breaks(rho, q_out, 1.5), 96)) {
    const double chi = radial_cutoff(nd.r, q_in, q_out).v;
    if (chi == 0.0) continue;
    const Point gg = G.gradient(nd.x);
    OuterSample s{nd.w * chi, G.value(nd.x), gg.x * gg.x + gg.y * gg.y, h(nd.x), {}};
    s.e.resize(nm);
    for (std::size_t k = 0; k < nm; ++k) s.e[k] = modes[k].value(geom, nd.x);
    outer.push_back(std::move(s));
  }
  for (int i = 0; i < geom.n(); ++i)
    for (int j = 0; j < geom.n(); ++j) {
      const Point x = geom.grid_point(i, j);
      const double r = geodesic_distance(geom, p, x);
      const double chi = 1.0 - radial_cutoff(r, q_in, q_out).v;
      if (chi == 0.0) continue;
      const Point gg = G.gradient(x);
      OuterSample s{geom.cell_area() * chi, G.value(x), gg.x * gg.x + gg.y * gg.y, h(x), {}};
      s.e.resize(nm);
      for (std::size_t k = 0; k < nm; ++k) s.e[k] = modes[k].value(geom, x);
      outer.push_back(std::move(s));
    }

  double diff = 0.0, phi2 = 0.0, g2 = 0.0, grad_disc = 0.0;
  std::vector<double> proj(nm, 0.0);
  for (const auto& s : disc) {
    diff += s.w * (s.phi - s.g);
    phi2 += s.w * s.phi * s.phi;
    g2 += s.w * s.g * s.g;
    grad_disc += s.w * s.grad2;
    for (std::size_t k = 0; k < nm; ++k) proj[k] += s.w * (s.phi - s.g) * s.e[k];
  }
  double g2_out = 0.0, grad_out = 0.0;
  for (const auto& s : outer) {
    g2_out += s.w * s.g * s.g;
    grad_out += s.w * s.grad2;
  }

  // ℓ ≥ 1: ⟨G, e_k⟩ = 0, so ⟨φ, e_k⟩ comes from the disc alone.
  auto correction = [&](const std::vector<double>& e) {
    double s = 0.0;
    for (std::size_t k = 0; k < nm; ++k) s += proj[k] * e[k];
    return s;
  };
  double inner_mass = 0.0, disc_mass = 0.0, outer_mass = 0.0;
  for (const auto& s : disc) {
    const double m = s.w * s.h * std::exp(s.phi - correction(s.e));
    disc_mass += m;
    if (s.r <= a) inner_mass += m;
  }
  for (const auto& s : outer) outer_mass += s.w * s.h * std::exp(s.g - correction(s.e));
  const double mass = disc_mass + outer_mass;

  b.projection_ = proj;
  b.mean_ = diff / V;
  b.green_l2_ = g2 + g2_out;
  double dir = grad_disc + grad_out;
  double l2 = phi2 + g2_out - V * b.mean_ * b.mean_;
  for (std::size_t k = 0; k < nm; ++k) {
    dir -= modes[k].eigenvalue * proj[k] * proj[k];
    l2 -= proj[k] * proj[k];
  }
  b.dirichlet_ = dir;
  b.l2_ = l2;
  b.log_mass_ = std::log(mass);
  b.inner_fraction_ = inner_mass / mass;
  b.J_ = 0.5 * (dir - alpha * l2) - kEightPi * (b.log_mass_ - b.mean_);
  return b;
}

// ---------------------------------------------------------------------------

double MoserSpec::inner_radius() const { return r * std::pow(k, -0.25); }

double MoserSpec::profile(double s) const {
  if (s <= inner_radius()) return std::log(k);
  if (s <= r) return 4.0 * std::log(r / s);
  return 0.0;
}

double MoserSpec::zeta(double s) const {
  if (s >= zeta_radius) return 0.0;
  const double t = 1.0 - (s / zeta_radius) * (s / zeta_radius);
  return t * t * t;
}

double MoserSpec::zeta_integral() const { return 0.25 * kPi * zeta_radius * zeta_radius; }

double MoserSpec::profile_integral() const {
  const double r0 = inner_radius();
  return kTwoPi * (r * r - r0 * r0);
}

double MoserSpec::balance() const { return -profile_integral() / zeta_integral(); }

void validate(const MoserSpec& spec, const TorusGeometry& geom) {
  if (!(spec.k >= 2.0)) throw std::invalid_argument("Moser sequence needs k ≥ 2");
  if (!(spec.r > 0.0) || !(spec.r < 0.25 * geom.min_side())) {
    throw std::invalid_argument("Moser radius must lie in (0, min(Lx,Ly)/4)");
  }
  if (!(spec.zeta_radius > 0.0) || !(spec.zeta_radius < 0.5 * geom.min_side())) {
    throw std::invalid_argument("ζ radius must lie in (0, min(Lx,Ly)/2)");
  }
  if (!(geodesic_distance(geom, spec.p, spec.zeta_center) > spec.r + spec.zeta_radius)) {
    throw std::invalid_argument("Moser profile and ζ supports overlap");
  }
}

SpectralField moser_sequence(const MoserSpec& spec, const TorusGeometry& geom) {
  validate(spec, geom);
  const double t = spec.balance();
  // The continuum profile has zero mean; the grid samples are re-centred so
  // the field stays in the mean-zero space.
  return project_mean_zero(SpectralField::sample(geom, [&](Point x) {
    return spec.profile(geodesic_distance(geom, spec.p, x)) +
           t * spec.zeta(geodesic_distance(geom, spec.zeta_center, x));
  }));
}

double moser_energy(const MoserSpec& spec, const TorusGeometry& geom) {
  return moser_sequence(spec, geom).dirichlet_energy();
}

double moser_annulus_energy(const MoserSpec& spec) { return kEightPi * std::log(spec.k); }

DivergenceProbe divergence_probe_beta(const TorusGeometry& geom, double alpha,
                                      double beta, const std::vector<double>& ks,
                                      double r, const WeightFunction& h, int ell,
                                      MoserSpec base) {
  if (!(beta > kEightPi)) throw std::invalid_argument("divergence probe needs β > 8π");
  if (ks.size() < 2) throw std::invalid_argument("divergence probe needs at least two k");
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (!(ks[i] > ks[i - 1])) throw std::invalid_argument("ks must increase");
  const auto modes = eigenspace_modes(geom, ell);
  const std::size_t nm = modes.size();

  // ζ pieces do not depend on k.
  const double za = base.zeta_radius;
  const std::vector<double> zbreaks = linear_breaks(0.0, za, 6);
  const double zeta_grad2 = integrate_1d(
      [&](double s) {
        const double u = s / za;
        const double d = -6.0 * u * (1.0 - u * u) * (1.0 - u * u) / za;
        return d * d * kTwoPi * s;
      },
      zbreaks);
  const double zeta_sq = integrate_1d(
      [&](double s) { return base.zeta(s) * base.zeta(s) * kTwoPi * s; }, zbreaks);
  const auto znodes = polar_nodes(geom, base.zeta_center, zbreaks, 64);

  // ∫ h e^{−Σ a e} over the torus on a grid fine enough for the smooth factor.
  const auto hgrid = h.samples();
  auto background = [&](const std::vector<double>& a) {
    if (nm == 0) return h.total();
    double s = 0.0;
    for (int i = 0; i < geom.n(); ++i)
      for (int j = 0; j < geom.n(); ++j) {
        const Point x = geom.grid_point(i, j);
        s += hgrid[geom.index(i, j)] * std::exp(-mode_sum(modes, a, geom, x));
      }
    return s * geom.cell_area();
  };

  DivergenceProbe out;
  out.ks = ks;
  out.predicted_slope = 4.0 * kPi - 0.5 * beta;
  for (double k : ks) {
    MoserSpec spec = base;
    spec.k = k;
    spec.r = r;
    validate(spec, geom);
    const double t = spec.balance();
    const double r0 = spec.inner_radius();
    std::vector<double> mbreaks{0.0};
    for (double x : geometric_breaks(r0, r, 1.5)) mbreaks.push_back(x);
    const auto mnodes = polar_nodes(geom, spec.p, mbreaks, 48);

    const double m_sq = integrate_1d(
        [&](double s) { return spec.profile(s) * spec.profile(s) * kTwoPi * s; }, mbreaks);
    double dir = moser_annulus_energy(spec) + t * t * zeta_grad2;
    double l2 = m_sq + t * t * zeta_sq;

    std::vector<double> a(nm, 0.0);
    std::vector<std::vector<double>> me(mnodes.size()), ze(znodes.size());
    for (std::size_t q = 0; q < mnodes.size(); ++q) {
      me[q].resize(nm);
      for (std::size_t j = 0; j < nm; ++j) {
        me[q][j] = modes[j].value(geom, mnodes[q].x);
        a[j] += mnodes[q].w * spec.profile(mnodes[q].r) * me[q][j];
      }
    }
    for (std::size_t q = 0; q < znodes.size(); ++q) {
      ze[q].resize(nm);
      for (std::size_t j = 0; j < nm; ++j) {
        ze[q][j] = modes[j].value(geom, znodes[q].x);
        a[j] += znodes[q].w * t * base.zeta(znodes[q].r) * ze[q][j];
      }
    }
    for (std::size_t j = 0; j < nm; ++j) {
      dir -= modes[j].eigenvalue * a[j] * a[j];
      l2 -= a[j] * a[j];
    }
    auto corr = [&](const std::vector<double>& e) {
      double s = 0.0;
      for (std::size_t j = 0; j < nm; ++j) s += a[j] * e[j];
      return s;
    };
    double mass = background(a);
    for (std::size_t q = 0; q < mnodes.size(); ++q) {
      const auto& nd = mnodes[q];
      mass += nd.w * h(nd.x) * std::exp(-corr(me[q])) * std::expm1(spec.profile(nd.r));
    }
    for (std::size_t q = 0; q < znodes.size(); ++q) {
      const auto& nd = znodes[q];
      mass += nd.w * h(nd.x) * std::exp(-corr(ze[q])) * std::expm1(t * base.zeta(nd.r));
    }
    out.log_mass.push_back(std::log(mass));
    out.J.push_back(0.5 * (dir - alpha * l2) - beta * std::log(mass));
    if (nm > 0) {
      const SpectralField proj = project_perp(moser_sequence(spec, geom), ell);
      for (const auto& m : modes) out.max_projection = std::max(out.max_projection, std::abs(proj.coefficient(m)));
    }
  }

  const std::size_t n = ks.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += std::log(ks[i]);
    sy += out.J[i];
  }
  sx /= n;
  sy /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(ks[i]) - sx;
    sxy += dx * (out.J[i] - sy);
    sxx += dx * dx;
  }
  out.slope = sxy / sxx;
  out.strictly_decreasing = true;
  for (std::size_t i = 1; i < n; ++i) out.strictly_decreasing &= out.J[i] < out.J[i - 1];
  return out;
}

std::vector<double> eigen_ray(const TorusGeometry& geom, double alpha,
                              const std::vector<double>& ts,
                              const WeightFunction& h) {
  const double lambda1 = distinct_eigenvalue(geom, 1);
  if (alpha < lambda1 * (1.0 - 1e-12)) throw std::invalid_argument("eigen ray needs α ≥ λ₁");
  const double V = geom.volume();
  const double amp = std::sqrt(2.0 / V);
  const double lam = geom.eigenvalue(1, 0);
  const int ny = std::max(geom.n(), 64);
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    const double z = std::abs(t) * amp;
    // Trapezoid in x is exact up to Bessel terms I_M(z), negligible once
    // M exceeds z by a margin.
    const int nx = std::max(geom.n(), 2 * static_cast<int>(std::ceil(z + 10.0 * std::sqrt(z))) + 64);
    const double hx = geom.lx() / nx;
    const double hy = geom.ly() / ny;
    double s = 0.0;
    for (int i = 0; i < nx; ++i) {
      const double e = std::exp(t * amp * std::cos(kTwoPi * i / nx) - z);
      double row = 0.0;
      for (int j = 0; j < ny; ++j) row += h({i * hx, j * hy});
      s += e * row;
    }
    const double log_mass = z + std::log(s * hx * hy);
    out.push_back(0.5 * t * t * (lam - alpha) - kEightPi * log_mass);
  }
  return out;
}

}  // namespace kw
