#pragma once

#include <memory>
#include <vector>

#include "kw/fields.hpp"

namespace kw {

/// Green function of Δ−α on the torus with source p:
///   (Δ−α)G = 8πδ_p − 8π/V, ∫G = 0,
/// and, for ℓ ≥ 1, coefficients on E_ℓ set to zero.
///
/// Near p, G = χ·S + w with S(r) = −4 log r + α r² log r, χ a smooth radial
/// cutoff of radius δ = min(Lx, Ly)/4 and w a smooth periodic remainder held
/// spectrally on a refined grid (at least 2N and 512 points per axis). The
/// Robin constant is A = w(p).
class GreenFunction {
 public:
  Point source() const;
  double alpha() const;
  int ell() const;
  const TorusGeometry& geometry() const;

  /// Truncated eigen-expansion on the N grid (exact mode coefficients).
  const SpectralField& field() const;
  /// Smooth remainder w on the refined grid.
  const SpectralField& regular() const;
  /// Robin constant from the singularity split.
  double robin() const;
  double cutoff_radius() const;

  /// G(x); −∞ at the source.
  double value(Point x) const;
  Point gradient(Point x) const;
  /// ψ(x) = G(x) + 4 log r − A, continuous with ψ(p) = 0.
  double psi(Point x) const;
  Point psi_gradient(Point x) const;
  /// w(x) and ∇w(x) by interpolation of an upsampled table.
  double regular_value(Point x) const;
  Point regular_gradient(Point x) const;

  /// G at the N grid points; the source point (if on the grid) gets the
  /// finite value A − 4 log(h/2) so the array stays finite.
  std::vector<double> grid_values() const;

  struct Impl;

 private:
  friend GreenFunction green_solve(const TorusGeometry&, double, Point, int);
  explicit GreenFunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

GreenFunction green_solve(const TorusGeometry& geom, double alpha, Point p,
                          int ell = 0);

enum class RobinMethod { kSplit, kExtrapolate };

double robin_constant(const GreenFunction& g, RobinMethod method);

struct RobinReport {
  double split = 0.0;
  double extrapolate = 0.0;
  double gap = 0.0;
  /// The two extraction methods disagree by more than 1e-3.
  bool under_resolved = false;
};
RobinReport robin_report(const GreenFunction& g);

struct Landscape {
  int samples = 0;
  /// A + 2 log h(p) on a samples x samples grid of p, x-major.
  std::vector<double> values;
  double robin = 0.0;
  Point argmax;
  double max_value = 0.0;
  bool degenerate = false;
};

/// p ↦ A_{α,p} + 2 log h(p). A is translation invariant on the flat torus,
/// so a single Green solve supplies it.
Landscape robin_landscape(const TorusGeometry& geom, double alpha,
                          const WeightFunction& h, int ell, int samples);

}  // namespace kw
