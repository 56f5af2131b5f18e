#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kw/functional.hpp"

namespace kw {

struct MinimizeOptions {
  double tol = 1e-9;
  int max_iter = 20000;
  double armijo = 1e-4;
  int max_halvings = 50;
  /// Correction pairs kept by the quasi-Newton update.
  int memory = 8;
  /// Also start from a bubble seed at the maximum of h when h is a bump,
  /// keeping the lower J.
  bool bubble_seed = true;
};

struct MinimizeResult {
  explicit MinimizeResult(SpectralField field) : u(std::move(field)) {}

  SpectralField u;
  double J = 0.0;
  /// λ_ε = ∫ h e^u (log carried separately for large fields).
  double mass = 0.0;
  double log_mass = 0.0;
  /// c_ε = max u from the refined argmax.
  double c = 0.0;
  Point x;
  double el_residual = 0.0;
  int iterations = 0;
  double eps = 0.0;
  bool converged = false;
  /// "converged", "max-iter" or "stalled".
  std::string status;
  /// Largest per-step increase of J among accepted steps (≤ roundoff).
  double max_ascent = 0.0;
};

MinimizeResult minimize_subcritical(const FunctionalParams& p,
                                    const SpectralField& init,
                                    const MinimizeOptions& opts = {});

/// Grid argmax refined by a quadratic fit over the 3 x 3 stencil.
PeakFit argmax_refine(const SpectralField& u);

/// r_ε = sqrt(λ_ε / (8π(1−ε) h(x_ε))) · e^{−c_ε/2}, from log λ_ε.
double blowup_scale(double log_mass, double eps, double h_at_peak, double c);

struct SweepRecord {
  double eps = 0.0;
  double J = 0.0;
  double mass = 0.0;
  double log_mass = 0.0;
  double c = 0.0;
  Point x;
  double h_at_x = 0.0;
  double r_eps = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
};

struct VerdictThresholds {
  double bounded_variation = 0.5;
  int window = 3;
  double growth_stability = 0.5;
};

struct ContinuationReport {
  std::vector<SweepRecord> records;
  /// Δc_ε / Δlog(1/ε) between consecutive records.
  std::vector<double> growth;
  /// "bounded", "blowup-consistent" or "inconclusive".
  std::string verdict;
  /// Diagnostics that are logged rather than raised (e.g. λ_ε floor).
  std::vector<std::string> findings;
  /// Minimizer at each ε, aligned with records.
  std::vector<SpectralField> fields;
};

ContinuationReport continuation_sweep(const FunctionalParams& p,
                                      const std::vector<double>& schedule,
                                      const SpectralField& init,
                                      const MinimizeOptions& opts = {},
                                      const VerdictThresholds& thresholds = {});

std::string sweep_verdict(const std::vector<SweepRecord>& records,
                          const VerdictThresholds& thresholds = {});

}  // namespace kw
