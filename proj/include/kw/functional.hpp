#pragma once

#include <vector>

#include "kw/fields.hpp"

namespace kw {

struct FunctionalParams {
  double alpha = 0.0;
  double beta = 0.0;
  /// Subcritical defect; β = 8π(1−ε) when set through subcritical().
  double eps = 0.0;
  WeightFunction weight;
  int ell = 0;

  static FunctionalParams subcritical(double alpha, double eps,
                                      const WeightFunction& h, int ell = 0);
  static FunctionalParams with_beta(double alpha, double beta,
                                    const WeightFunction& h, int ell = 0);

  const TorusGeometry& geometry() const { return weight.geometry(); }
};

/// α < λ_{ℓ+1}: the quadratic part is coercive on the admissible subspace.
bool is_coercive(const FunctionalParams& p);

/// Mask over the half spectrum: true on coefficients that belong to the
/// admissible subspace (mean-zero, no Nyquist, outside E_ℓ).
std::vector<bool> admissible_mask(const TorusGeometry& geom, int ell);

/// J, mass and gradient of J_{α,β} at one field, sharing the padded-grid
/// nonlinear evaluation.
struct Evaluation {
  double J = 0.0;
  ExpMass mass;
  /// Half-spectrum coefficients of the projected gradient.
  HalfSpectrum gradient;
};

class Functional {
 public:
  explicit Functional(FunctionalParams params);

  const FunctionalParams& params() const { return params_; }
  const std::vector<bool>& mask() const { return mask_; }

  double value(const SpectralField& u) const;
  Evaluation evaluate(const SpectralField& u, bool with_gradient = true) const;
  /// ∫ h u e^u / ∫ h e^u on the padded grid.
  double weighted_mean_u(const SpectralField& u) const;

 private:
  struct Padded {
    std::vector<double> u;
    std::vector<double> expu;
    ExpMass mass;
  };
  Padded padded(const SpectralField& u) const;

  FunctionalParams params_;
  std::vector<bool> mask_;
  int padded_n_;
  std::vector<double> padded_h_;
};

double eval_J(const SpectralField& u, const FunctionalParams& p);
SpectralField grad_J(const SpectralField& u, const FunctionalParams& p);

/// L² norm of the projected Euler–Lagrange residual.
double el_residual(const SpectralField& u, const FunctionalParams& p);
double el_residual(const TorusGeometry& geom, const HalfSpectrum& gradient);

/// Gradient norm in the (λ−α)^{-1} metric, the solver's stopping measure.
double preconditioned_norm(const TorusGeometry& geom,
                           const HalfSpectrum& gradient, double alpha);

/// |‖u‖²_{1,α} − (β/mass)∫ h u e^u|.
double energy_identity_gap(const SpectralField& u, const FunctionalParams& p);

/// J ≤ 8π|log ∫h| + 1e-9.
bool weak_bound_check(double j_value, const FunctionalParams& p);
double weak_bound(const FunctionalParams& p);

}  // namespace kw
