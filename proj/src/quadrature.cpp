#include "kw/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kw {

namespace {

GaussRule build_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double bump_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one node");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

double integrate_1d(const std::function<double(double)>& f,
                    const std::vector<double>& breaks, int points) {
  const GaussRule& rule = gauss_legendre(points);
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
    const double half = 0.5 * (breaks[s + 1] - breaks[s]);
    double part = 0.0;
    for (int q = 0; q < points; ++q) {
      part += rule.weights[q] * f(mid + half * rule.nodes[q]);
    }
    total += half * part;
  }
  return total;
}

Jet smooth_step(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double s = 1.0 - t;
  const double f = bump_exp(t);
  const double g = bump_exp(s);
  const double f1 = f / (t * t);
  const double g1 = -g / (s * s);
  const double f2 = f * (1.0 / (t * t * t * t) - 2.0 / (t * t * t));
  const double g2 = g * (1.0 / (s * s * s * s) - 2.0 / (s * s * s));
  const double d = f + g;
  const double d1 = f1 + g1;
  const double num = f1 * g - f * g1;
  const double num1 = f2 * g - f * g2;
  return {f / d, num / (d * d), (num1 * d - 2.0 * num * d1) / (d * d * d)};
}

Jet quintic_step(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double t2 = t * t;
  return {t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
          30.0 * t2 * (1.0 - t) * (1.0 - t),
          60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)};
}

Jet radial_cutoff(double r, double inner, double outer) {
  const double width = outer - inner;
  const Jet s = smooth_step((r - inner) / width);
  return {1.0 - s.v, -s.d1 / width, -s.d2 / (width * width)};
}

std::vector<double> geometric_breaks(double a, double b, double ratio) {
  if (!(a > 0.0) || !(b > a) || !(ratio > 1.0)) {
    throw std::invalid_argument("geometric_breaks: need 0 < a < b, ratio > 1");
  }
  const int n = std::max(1, static_cast<int>(std::ceil(std::log(b / a) / std::log(ratio) - 1e-12)));
  std::vector<double> out(n + 1);
  for (int i = 0; i <= n; ++i) out[i] = a * std::pow(b / a, static_cast<double>(i) / n);
  out.front() = a;
  out.back() = b;
  return out;
}

double polar_integral(const std::function<double(double, double, double)>& f,
                      const std::vector<double>& breaks, int angles,
                      int points) {
  std::vector<double> cs(angles);
  std::vector<double> sn(angles);
  for (int a = 0; a < angles; ++a) {
    const double th = 2.0 * std::numbers::pi * (a + 0.5) / angles;
    cs[a] = std::cos(th);
    sn[a] = std::sin(th);
  }
  const double dtheta = 2.0 * std::numbers::pi / angles;
  return integrate_1d(
      [&](double r) {
        double ring = 0.0;
        for (int a = 0; a < angles; ++a) ring += f(r * cs[a], r * sn[a], r);
        return ring * dtheta * r;
      },
      breaks, points);
}

}  // namespace kw
