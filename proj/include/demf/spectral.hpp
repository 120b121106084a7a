#pragma once

#include "demf/params.hpp"

namespace demf {

/// Controls the radial (Hankel) quadrature used to invert the space-time spectrum.
///
/// The radial integral over [0, R] is split into 20-point Gauss-Legendre panels no wider than
/// 1/panels_per_scale spectral scales (and a quarter oscillation period of J0(r h_s));
/// R starts at radial_cutoff * gamma_s and is doubled until the total, including an
/// analytic tail estimate, changes by less than rel_tol.
struct QuadratureSpec {
  double radial_cutoff = 50.0;
  int panels_per_scale = 2;
  double rel_tol = 1e-7;
  int max_doublings = 16;
  /// Relative tolerance for the adaptive temporal quadratures.
  double temporal_tol = 1e-10;

  void validate() const;
};

/// Matern correlation x^nu K_nu(x) / (Gamma(nu) 2^{nu-1}), equal to 1 at x = 0.
double matern_correlation(double nu, double x);

/// Evaluates the DEMF space-time spectrum and its marginal / full covariance
/// transforms for a spatial domain R^2 and temporal domain R.
///
/// Requires alpha > 1 and alpha_t > 1/2. Immutable; all methods are const and
/// thread-safe.
class SpectrumEvaluator {
 public:
  SpectrumEvaluator(SmoothnessParams sp, ScaleParams sc);

  const SmoothnessParams& smoothness() const { return sp_; }
  const ScaleParams& scales() const { return sc_; }

  /// Closed-form marginal variance sigma^2.
  double variance() const { return variance_; }

  /// S_u(omega_s, omega_t) for |omega_s| = omega_s_norm.
  double spectrum(double omega_s_norm, double omega_t) const;

  /// Closed-form Matern spatial marginal C(h_s, 0).
  double spatial_matern_cov(double h_s) const;

  /// Marginal temporal spectrum: S_u integrated over omega_s in R^2. Uses the
  /// one-dimensional radial representation for alpha_s > 0 and the closed-form
  /// Matern spectrum when alpha_s = 0. The normalising constant is exact, so
  /// the integral over omega_t equals sigma^2.
  double temporal_spectrum(double omega_t) const;

  /// C(h_s, h_t) by inverting the spectrum. The omega_t integral is done in closed
  /// form (cosine transform of (1 + x^2)^{-alpha_t}); the radial Hankel transform is
  /// numerical, see QuadratureSpec.
  double spacetime_cov(double h_s, double h_t, const QuadratureSpec& q = {}) const;

  /// Marginal temporal covariance C(0, h_t). Closed-form Matern when separable,
  /// otherwise a numerical cosine transform of temporal_spectrum().
  double temporal_cov(double h_t, const QuadratureSpec& q = {}) const;

  /// Numerical integral of temporal_spectrum() over the real line.
  double spectral_variance(const QuadratureSpec& q = {}) const;

  /// Integral of S_u over omega_t at spatial frequency r, weighted by cos(omega_t h_t).
  double temporal_transform(double r, double h_t) const;

 private:
  SmoothnessParams sp_;
  ScaleParams sc_;
  double variance_;
  double log_prefactor_;  // log of (2 pi)^{-3} gamma_e^{-2}
};

}  // namespace demf
