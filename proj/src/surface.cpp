#include "kw/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>

namespace kw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

bool same_level(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

struct Wave {
  int m;
  int n;
  double eigenvalue;
};

// Upper half plane: m > 0, or m == 0 and n > 0.
std::vector<Wave> half_plane_waves(const TorusGeometry& geom, int bound) {
  std::vector<Wave> waves;
  for (int m = 0; m <= bound; ++m) {
    for (int n = -bound; n <= bound; ++n) {
      if (m == 0 && n <= 0) continue;
      waves.push_back({m, n, geom.eigenvalue(m, n)});
    }
  }
  std::sort(waves.begin(), waves.end(), [](const Wave& a, const Wave& b) {
    return std::tie(a.eigenvalue, a.m, a.n) < std::tie(b.eigenvalue, b.m, b.n);
  });
  return waves;
}

std::vector<double> group_levels(const std::vector<Wave>& waves,
                                 double below) {
  std::vector<double> levels;
  for (const auto& w : waves) {
    if (w.eigenvalue >= below) break;
    if (levels.empty() || !same_level(levels.back(), w.eigenvalue)) {
      levels.push_back(w.eigenvalue);
    }
  }
  return levels;
}

// Every wave with eigenvalue strictly below this bound has |m|,|n| <= K.
double enumeration_bound(const TorusGeometry& geom, int k) {
  const double lmax = std::max(geom.lx(), geom.ly());
  return kTwoPi * kTwoPi * (k + 1) * (k + 1) / (lmax * lmax);
}

}  // namespace

TorusGeometry::TorusGeometry(double lx, double ly, int n)
    : lx_(lx), ly_(ly), n_(n) {
  if (!(lx > 0.0) || !(ly > 0.0)) {
    throw std::invalid_argument("torus side lengths must be positive");
  }
  if (n < 16 || !is_power_of_two(n)) {
    throw std::invalid_argument("N must be a power of two ≥ 16");
  }
}

Point TorusGeometry::wrap(Point p) const {
  double x = std::fmod(p.x, lx_);
  double y = std::fmod(p.y, ly_);
  if (x < 0.0) x += lx_;
  if (y < 0.0) y += ly_;
  if (x >= lx_) x -= lx_;
  if (y >= ly_) y -= ly_;
  return {x, y};
}

Point TorusGeometry::displacement(Point from, Point to) const {
  double dx = to.x - from.x;
  double dy = to.y - from.y;
  dx -= lx_ * std::round(dx / lx_);
  dy -= ly_ * std::round(dy / ly_);
  return {dx, dy};
}

double TorusGeometry::eigenvalue(int m, int n) const {
  const double kx = kTwoPi * m / lx_;
  const double ky = kTwoPi * n / ly_;
  return kx * kx + ky * ky;
}

TorusGeometry build_torus(double lx, double ly, int n) {
  return TorusGeometry(lx, ly, n);
}

double geodesic_distance(const TorusGeometry& geom, Point a, Point b) {
  const Point d = geom.displacement(a, b);
  return std::hypot(d.x, d.y);
}

double integrate(const TorusGeometry& geom, std::span<const double> values) {
  if (values.size() != geom.size()) {
    throw std::invalid_argument("integrate: sample count " +
                                std::to_string(values.size()) +
                                " does not match grid " +
                                std::to_string(geom.size()));
  }
  // Compensated sum: the quadrature of a constant stays exact to a few ulps.
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum * geom.cell_area();
}

double Mode::value(const TorusGeometry& geom, Point p) const {
  const double theta = kTwoPi * (m * p.x / geom.lx() + n * p.y / geom.ly());
  const double scale = std::sqrt(2.0 / geom.volume());
  return parity == Parity::kCos ? scale * std::cos(theta)
                                : scale * std::sin(theta);
}

Point Mode::gradient(const TorusGeometry& geom, Point p) const {
  const double kx = kTwoPi * m / geom.lx();
  const double ky = kTwoPi * n / geom.ly();
  const double theta = kx * p.x + ky * p.y;
  const double scale = std::sqrt(2.0 / geom.volume());
  const double d = parity == Parity::kCos ? -scale * std::sin(theta)
                                          : scale * std::cos(theta);
  return {kx * d, ky * d};
}

std::vector<Mode> EigenBasis::modes_up_to_level(int levels) const {
  std::vector<Mode> out;
  if (levels <= 0) return out;
  if (levels > static_cast<int>(distinct_eigenvalues.size())) {
    throw std::out_of_range("eigenbasis holds fewer distinct eigenvalues");
  }
  const double top = distinct_eigenvalues[levels - 1];
  for (const auto& mode : modes) {
    if (mode.eigenvalue < top || same_level(mode.eigenvalue, top)) {
      out.push_back(mode);
    }
  }
  return out;
}

EigenBasis eigenbasis(const TorusGeometry& geom, int max_modes) {
  if (max_modes < 4) {
    throw std::invalid_argument("eigenbasis: max_modes must be ≥ 4");
  }
  const int half = geom.n() / 2;
  const long representable = static_cast<long>(geom.n() - 1) * (geom.n() - 1) - 1;
  if (max_modes > representable) {
    throw std::invalid_argument("eigenbasis: max_modes " +
                                std::to_string(max_modes) +
                                " exceeds the " + std::to_string(representable) +
                                " modes representable on the grid");
  }
  auto waves = half_plane_waves(geom, half - 1);
  EigenBasis basis;
  basis.modes.reserve(max_modes);
  for (const auto& w : waves) {
    if (static_cast<int>(basis.modes.size()) == max_modes) break;
    basis.modes.push_back({w.m, w.n, Parity::kCos, w.eigenvalue});
    if (static_cast<int>(basis.modes.size()) == max_modes) break;
    basis.modes.push_back({w.m, w.n, Parity::kSin, w.eigenvalue});
  }
  for (const auto& mode : basis.modes) {
    if (basis.distinct_eigenvalues.empty() ||
        !same_level(basis.distinct_eigenvalues.back(), mode.eigenvalue)) {
      basis.distinct_eigenvalues.push_back(mode.eigenvalue);
      basis.multiplicities.push_back(0);
    }
    ++basis.multiplicities.back();
  }
  // The last level is complete iff the next wave (if any) starts a new level
  // and the last wave contributed both parities.
  const std::size_t used_waves = (basis.modes.size() + 1) / 2;
  basis.last_level_complete =
      basis.modes.size() % 2 == 0 &&
      (used_waves >= waves.size() ||
       !same_level(waves[used_waves].eigenvalue,
                   basis.distinct_eigenvalues.back()));
  return basis;
}

double distinct_eigenvalue(const TorusGeometry& geom, int level) {
  if (level < 1) throw std::invalid_argument("eigenvalue level must be ≥ 1");
  for (int k = 8;; k *= 2) {
    const auto levels =
        group_levels(half_plane_waves(geom, k), enumeration_bound(geom, k));
    if (static_cast<int>(levels.size()) >= level) return levels[level - 1];
    if (k > (1 << 14)) throw std::runtime_error("eigenvalue level too high");
  }
}

int resolved_levels(const TorusGeometry& geom) {
  const int half = geom.n() / 2;
  const double lmax = std::max(geom.lx(), geom.ly());
  // Waves with |m| or |n| ≥ N/2 have eigenvalue ≥ 4π²(N/2)²/max(L)².
  const double bound = kTwoPi * kTwoPi * half * half / (lmax * lmax);
  return static_cast<int>(
      group_levels(half_plane_waves(geom, half - 1), bound).size());
}

std::vector<Mode> eigenspace_modes(const TorusGeometry& geom, int levels) {
  std::vector<Mode> out;
  if (levels <= 0) return out;
  if (levels > resolved_levels(geom)) {
    throw std::invalid_argument("ℓ = " + std::to_string(levels) +
                                " exceeds the resolved distinct eigenvalues");
  }
  const double top = distinct_eigenvalue(geom, levels);
  const int half = geom.n() / 2;
  for (const auto& w : half_plane_waves(geom, half - 1)) {
    if (w.eigenvalue > top && !same_level(w.eigenvalue, top)) break;
    out.push_back({w.m, w.n, Parity::kCos, w.eigenvalue});
    out.push_back({w.m, w.n, Parity::kSin, w.eigenvalue});
  }
  return out;
}

}  // namespace kw
