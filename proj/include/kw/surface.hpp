#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kw {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Rectangular flat torus [0,Lx) x [0,Ly) sampled on a uniform N x N grid.
///
/// Grid samples are stored x-major: the sample at (x_i, y_j) lives at index
/// i * N + j. The Laplacian is the geometer's (positive) one, so the
/// eigenvalues of the nonconstant modes are 4π²(m²/Lx² + n²/Ly²) > 0.
class TorusGeometry {
 public:
  TorusGeometry(double lx, double ly, int n);

  double lx() const { return lx_; }
  double ly() const { return ly_; }
  int n() const { return n_; }
  double volume() const { return lx_ * ly_; }
  double hx() const { return lx_ / n_; }
  double hy() const { return ly_ / n_; }
  double cell_area() const { return hx() * hy(); }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  double min_side() const { return lx_ < ly_ ? lx_ : ly_; }

  Point grid_point(int i, int j) const { return {i * hx(), j * hy()}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  /// Maps a point into the fundamental domain.
  Point wrap(Point p) const;
  /// Shortest displacement vector from `from` to `to` (minimal image).
  Point displacement(Point from, Point to) const;

  /// Eigenvalue of the plane wave with integer wavevector (m, n).
  double eigenvalue(int m, int n) const;

  bool operator==(const TorusGeometry& other) const {
    return lx_ == other.lx_ && ly_ == other.ly_ && n_ == other.n_;
  }

 private:
  double lx_;
  double ly_;
  int n_;
};

TorusGeometry build_torus(double lx, double ly, int n);

double geodesic_distance(const TorusGeometry& geom, Point a, Point b);

/// Uniform-weight quadrature (Lx·Ly/N²)·Σ values.
double integrate(const TorusGeometry& geom, std::span<const double> values);

enum class Parity { kCos, kSin };

/// Real L²-orthonormal eigenmode sqrt(2/V)·cos(θ) or sqrt(2/V)·sin(θ) with
/// θ = 2π(m x/Lx + n y/Ly), (m, n) in the upper half plane.
struct Mode {
  int m = 0;
  int n = 0;
  Parity parity = Parity::kCos;
  double eigenvalue = 0.0;

  double value(const TorusGeometry& geom, Point p) const;
  /// Gradient of the mode at p.
  Point gradient(const TorusGeometry& geom, Point p) const;
};

struct EigenBasis {
  std::vector<Mode> modes;
  std::vector<double> distinct_eigenvalues;
  std::vector<int> multiplicities;
  /// False when max_modes cut the highest eigenspace short.
  bool last_level_complete = true;

  /// Modes belonging to the first `levels` distinct eigenvalues.
  std::vector<Mode> modes_up_to_level(int levels) const;
};

/// The `max_modes` lowest nonconstant modes representable on the grid
/// (|m|, |n| < N/2), sorted by eigenvalue.
EigenBasis eigenbasis(const TorusGeometry& geom, int max_modes);

/// All modes spanning E_ℓ = E_{λ_1} ⊕ ... ⊕ E_{λ_ℓ}; empty for ℓ = 0.
std::vector<Mode> eigenspace_modes(const TorusGeometry& geom, int levels);

/// ℓ-th distinct positive eigenvalue (ℓ ≥ 1) of the torus, from the closed
/// form; independent of the grid.
double distinct_eigenvalue(const TorusGeometry& geom, int level);

/// Number of distinct eigenvalues whose full eigenspace is representable on
/// the grid.
int resolved_levels(const TorusGeometry& geom);

}  // namespace kw
