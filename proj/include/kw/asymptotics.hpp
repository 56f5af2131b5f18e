#pragma once

#include <functional>
#include <span>
#include <vector>

#include "kw/functional.hpp"
#include "kw/greenfn.hpp"
#include "kw/quadrature.hpp"

namespace kw {

/// φ(y) = −2 log(1 + |y|²/8), the entire solution of Δφ = e^φ on R².
double bubble_profile(double r);
double bubble_profile(Point y);
/// ∫_{R²} e^φ dy by radial quadrature plus the analytic tail.
double bubble_mass();
/// ∫_{B_R}|∇φ|² − (16π log(1+R²/8) − 16π).
double inner_energy_check(double R);

/// −8π − 8π log π − 4π·a with a = max_p (A_p + 2 log h(p)).
double infimum_formula(double a_max_combined);

struct ProfileError {
  double phi_error = 0.0;
  /// sup |u(x)/u(x₀) − 1|; zero when |u(x₀)| ≤ 1.
  double psi_ratio_error = 0.0;
};

/// Compares u(x₀ + s·y) − u(x₀) with the bubble for |y| ≤ R on a polar
/// sample set.
ProfileError rescaled_profile_error(const std::function<double(Point)>& u,
                                    const TorusGeometry& geom, Point x0,
                                    double r_scale, double R);
/// Same, sampling a grid field bilinearly.
ProfileError rescaled_profile_error(const SpectralField& u, Point x0,
                                    double r_scale, double R);

/// ∫_{B_radius(center)} h e^u / ∫ h e^u. The ball integral uses polar
/// quadrature of the trigonometric interpolant.
double concentration_fraction(const SpectralField& u, const WeightFunction& h,
                              Point center, double radius);

/// sup over grid points at distance ≥ δ from the source of |u − G|.
double far_field_gap(const std::function<double(Point)>& u,
                     const GreenFunction& g, double delta);
double far_field_gap(const SpectralField& u, const GreenFunction& g,
                     double delta);

struct Expansion {
  double value = 0.0;
  double expected = 0.0;
  double residual = 0.0;
};

/// The concentrating sequence φ_ε built on a Green function:
///   r ≤ Rε:        c − 2 log(1 + r²/(8ε²))
///   Rε < r ≤ 2Rε:  G − η ψ,  ψ = G + 4 log r − A
///   r > 2Rε:       G
/// with R = ε^{−1/3} and η a quintic radial step.
class TestFunctionBundle {
 public:
  double eps() const { return eps_; }
  double R() const { return R_; }
  Point center() const { return green_.source(); }
  double c() const { return c_; }
  double robin() const { return green_.robin(); }
  const GreenFunction& green() const { return green_; }
  const FunctionalParams& params() const { return params_; }

  /// φ_ε(x).
  double value(Point x) const;
  /// Cutoff η(r) with η = 1 on [0, Rε] and 0 beyond 2Rε.
  Jet eta(double r) const;

  /// |c − 2 log(1+R²/8) − (A − 4 log(Rε))|.
  double continuity_gap() const;
  /// max over the annulus of |η'| · Rε (bounded by 4).
  double eta_gradient_bound() const;

  /// φ̄ = (1/V)∫φ.
  double mean() const { return mean_; }
  /// Coefficients ⟨φ, e_k⟩ on E_ℓ (empty for ℓ = 0).
  const std::vector<double>& projection() const { return projection_; }
  const std::vector<Mode>& projected_modes() const { return modes_; }

  /// Quantities for u = φ − φ̄ (projected onto E_ℓ^⊥ when ℓ ≥ 1).
  double dirichlet() const { return dirichlet_; }
  double l2() const { return l2_; }
  /// log ∫ h e^φ, with h replaced by h e^{−Σ⟨φ,e_k⟩e_k} when ℓ ≥ 1.
  double log_mass() const { return log_mass_; }
  /// ∫ G².
  double green_l2() const { return green_l2_; }
  /// Fraction of ∫ h e^u inside B_{Rε}.
  double inner_fraction() const { return inner_fraction_; }
  double J() const { return J_; }

  Expansion dirichlet_expansion() const;
  Expansion log_mass_expansion() const;
  Expansion J_expansion() const;

 private:
  friend TestFunctionBundle build_test_function(const TorusGeometry&, double,
                                                Point, double,
                                                const WeightFunction&, int);
  TestFunctionBundle(GreenFunction g, FunctionalParams params, double eps);

  GreenFunction green_;
  FunctionalParams params_;
  double eps_;
  double R_;
  double c_;
  double mean_ = 0.0;
  std::vector<Mode> modes_;
  std::vector<double> projection_;
  double dirichlet_ = 0.0;
  double green_l2_ = 0.0;
  double l2_ = 0.0;
  double log_mass_ = 0.0;
  double inner_fraction_ = 0.0;
  double J_ = 0.0;
};

TestFunctionBundle build_test_function(const TorusGeometry& geom, double eps,
                                       Point p, double alpha,
                                       const WeightFunction& h, int ell = 0);

/// Truncated-logarithm concentration profile at p, balanced to mean zero by a
/// bump ζ centred at zeta_center.
struct MoserSpec {
  double k = 2.0;
  double r = 0.05;
  Point p{0.5, 0.5};
  Point zeta_center{0.0, 0.0};
  double zeta_radius = 0.15;

  double inner_radius() const;
  /// M_k(s) at distance s from p.
  double profile(double s) const;
  /// ζ at distance s from zeta_center, a C² bump (1 − (s/a)²)³.
  double zeta(double s) const;
  double zeta_integral() const;
  double profile_integral() const;
  /// t_k = −∫M_k / ∫ζ.
  double balance() const;
};

/// Throws when the profile and ζ supports overlap or r ≥ min(Lx,Ly)/4.
void validate(const MoserSpec& spec, const TorusGeometry& geom);

/// Grid samples of M̃_k = M_k + t_k ζ.
SpectralField moser_sequence(const MoserSpec& spec, const TorusGeometry& geom);
/// Spectral Dirichlet energy of the grid field.
double moser_energy(const MoserSpec& spec, const TorusGeometry& geom);
/// 8π log k, the annulus energy.
double moser_annulus_energy(const MoserSpec& spec);

struct DivergenceProbe {
  std::vector<double> ks;
  std::vector<double> J;
  std::vector<double> log_mass;
  /// Least-squares slope of J against log k.
  double slope = 0.0;
  double predicted_slope = 0.0;
  bool strictly_decreasing = false;
  /// For ℓ ≥ 1: largest |⟨M_{ℓ,k}, e⟩| over E_ℓ after projection.
  double max_projection = 0.0;
};

/// J_{α,β}(M̃_k) (or its E_ℓ^⊥ projection) along ks, from radial and polar
/// quadrature of the explicit profile.
DivergenceProbe divergence_probe_beta(const TorusGeometry& geom, double alpha,
                                      double beta, const std::vector<double>& ks,
                                      double r, const WeightFunction& h,
                                      int ell = 0, MoserSpec base = {});

/// J_{α,8π}(t·u₀) with u₀ = √(2/V) cos(2πx/Lx). Requires α ≥ λ₁.
std::vector<double> eigen_ray(const TorusGeometry& geom, double alpha,
                              const std::vector<double>& ts,
                              const WeightFunction& h);

}  // namespace kw
