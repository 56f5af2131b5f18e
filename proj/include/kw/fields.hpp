#pragma once

#include <memory>
#include <span>
#include <vector>

#include "kw/fft.hpp"
#include "kw/surface.hpp"

namespace kw {

/// Real function on the torus held as a band-limited Fourier spectrum (no
/// Nyquist content) together with its cached grid samples.
///
/// Values are immutable; every operation returns a new field.
class SpectralField {
 public:
  explicit SpectralField(const TorusGeometry& geom);

  /// Analyzes grid samples. Nyquist content is discarded, so the cached grid
  /// is the synthesis of the retained spectrum.
  static SpectralField from_grid(const TorusGeometry& geom,
                                 std::span<const double> values);
  static SpectralField from_spectrum(const TorusGeometry& geom,
                                     HalfSpectrum spectrum);
  static SpectralField from_modes(const TorusGeometry& geom,
                                  std::span<const Mode> modes,
                                  std::span<const double> coeffs,
                                  double mean = 0.0);
  template <class F>
  static SpectralField sample(const TorusGeometry& geom, F&& f) {
    std::vector<double> values(geom.size());
    for (int i = 0; i < geom.n(); ++i)
      for (int j = 0; j < geom.n(); ++j)
        values[geom.index(i, j)] = f(geom.grid_point(i, j));
    return from_grid(geom, values);
  }

  const TorusGeometry& geometry() const { return geom_; }
  const HalfSpectrum& spectrum() const { return spectrum_; }
  std::span<const double> grid() const { return grid_; }

  double mean() const { return spectrum_.at(0, 0).real(); }
  /// Coefficient against an L²-normalized mode.
  double coefficient(const Mode& mode) const;
  std::vector<double> coefficients(std::span<const Mode> modes) const;

  /// Exact evaluation of the trigonometric interpolant at an arbitrary point.
  double value_at(Point p) const;
  /// Bilinear interpolation of the cached grid.
  double bilinear(Point p) const;

  SpectralField derivative_x() const;
  SpectralField derivative_y() const;
  /// Samples of the trigonometric interpolant on a finer n x n grid.
  std::vector<double> upsampled(int n) const;

  SpectralField operator+(const SpectralField& other) const;
  SpectralField operator-(const SpectralField& other) const;
  SpectralField operator*(double s) const;
  SpectralField plus_constant(double c) const;

  /// ∫ u² via Parseval.
  double l2_norm_squared() const;
  /// ∫ u v via Parseval.
  double inner(const SpectralField& other) const;
  /// ∫ |∇u|².
  double dirichlet_energy() const;

 private:
  SpectralField(const TorusGeometry& geom, HalfSpectrum spectrum);
  void check_same_geometry(const SpectralField& other) const;

  TorusGeometry geom_;
  HalfSpectrum spectrum_;
  std::vector<double> grid_;
};

/// Grid samples of a field that is not band-limited (test functions, Moser
/// sequences, Green function values).
struct GridSamples {
  TorusGeometry geom;
  std::vector<double> values;
};

std::vector<double> synthesize(const TorusGeometry& geom,
                               std::span<const Mode> modes,
                               std::span<const double> coeffs,
                               double mean = 0.0);
std::vector<double> analyze(const TorusGeometry& geom,
                            std::span<const Mode> modes,
                            std::span<const double> grid);

/// Σ_k (λ_k − α) c_k², i.e. ∫(|∇u|² − α u²) for mean-zero u.
double quadratic_form(const SpectralField& u, double alpha);

/// ‖u‖_{1,α}. For α ≥ λ₁ the form is indefinite and the signed root
/// sign(Q)·sqrt|Q| is returned.
double h1_alpha_norm(const SpectralField& u, double alpha);

SpectralField project_mean_zero(const SpectralField& u);

/// Removes every mode with eigenvalue ≤ λ_ℓ together with the mean, so the
/// result lies in E_ℓ^⊥. ℓ = 0 only removes the mean.
SpectralField project_perp(const SpectralField& u, int ell);

enum class WeightKind { kUniform, kCosine, kBump };

/// Positive weight h from a fixed catalog of closed forms.
class WeightFunction {
 public:
  static WeightFunction uniform(const TorusGeometry& geom);
  /// h = 1 + a cos(2πx/Lx), |a| < 1.
  static WeightFunction cosine(const TorusGeometry& geom, double a);
  /// h = 1 + a exp(-κ s²) where s² = (Lx/π)² sin²(π(x−x0)/Lx) +
  /// (Ly/π)² sin²(π(y−y0)/Ly), a > −1, κ ≥ 0.
  static WeightFunction bump(const TorusGeometry& geom, double a,
                             double kappa, double x0, double y0);

  double operator()(Point p) const;
  WeightKind kind() const { return kind_; }
  double a() const { return a_; }
  double kappa() const { return kappa_; }
  Point center() const { return center_; }
  const TorusGeometry& geometry() const { return geom_; }

  std::span<const double> samples() const { return samples_; }
  /// Samples on an n x n grid over the same torus.
  std::vector<double> samples_on(int n) const;
  double min_h() const { return min_h_; }
  double max_h() const { return max_h_; }
  Point argmax() const { return argmax_; }
  /// ∫ h.
  double total() const;

 private:
  WeightFunction(const TorusGeometry& geom, WeightKind kind, double a,
                 double kappa, Point center);

  TorusGeometry geom_;
  WeightKind kind_;
  double a_;
  double kappa_;
  Point center_;
  std::vector<double> samples_;
  double min_h_ = 0.0;
  double max_h_ = 0.0;
  Point argmax_;
};

/// ∫ h e^u, carried as e^shift · scaled so that fields with max u > 700 do
/// not overflow.
struct ExpMass {
  double shift = 0.0;
  double scaled = 0.0;

  bool log_scaled() const { return shift != 0.0; }
  double log() const;
  double value() const;
};

/// Quadrature of h e^u on the 3/2-padded grid.
ExpMass exp_mass(const SpectralField& u, const WeightFunction& h);

/// Size of the dealiasing grid used for nonlinear terms.
int padded_size(int n);

/// Grid maximum of periodic samples on an n x n grid over [0,lx) x [0,ly),
/// refined by a least-squares quadratic fit over the 3 x 3 stencil around it.
struct PeakFit {
  Point location;
  double value = 0.0;
  /// The fitted Hessian is singular in at least one direction (flat or
  /// ridge-shaped peak); the grid location is kept along flat directions.
  bool degenerate = false;
};
PeakFit fit_peak(std::span<const double> values, int n, double lx, double ly);

}  // namespace kw
