#pragma once

#include <functional>
#include <vector>

#include "kw/surface.hpp"

namespace kw {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [-1, 1].
const GaussRule& gauss_legendre(int n);

/// ∫_a^b f with a composite rule: `points` Gauss nodes on every interval
/// between consecutive breakpoints.
double integrate_1d(const std::function<double(double)>& f,
                    const std::vector<double>& breaks, int points = 12);

/// Value and first two derivatives of a scalar profile.
struct Jet {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// C∞ step: 0 for t ≤ 0, 1 for t ≥ 1, built from exp(-1/t).
Jet smooth_step(double t);

/// C² quintic step 6t⁵ − 15t⁴ + 10t³ clamped to [0, 1].
Jet quintic_step(double t);

/// Radial cutoff equal to 1 for r ≤ inner and 0 for r ≥ outer, with
/// derivatives in r.
Jet radial_cutoff(double r, double inner, double outer);

/// Breakpoints a = b_0 < ... < b_n = b in geometric progression with
/// b_{i+1}/b_i ≤ ratio. Requires 0 < a < b.
std::vector<double> geometric_breaks(double a, double b, double ratio);

/// Polar quadrature over the annulus breaks.front() < r < breaks.back():
/// composite Gauss–Legendre in r and `angles` equispaced angles. f receives
/// the offset (dx, dy) from the center and r.
double polar_integral(const std::function<double(double, double, double)>& f,
                      const std::vector<double>& breaks, int angles,
                      int points = 12);

}  // namespace kw
