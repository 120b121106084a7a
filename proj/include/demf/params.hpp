#pragma once

#include <string>

namespace demf {

/// Smoothness exponents (alpha_t, alpha_s, alpha_e) of DEMF(alpha_t, alpha_s, alpha_e).
///
/// The combined exponent alpha = alpha_e + alpha_s * (alpha_t - 1/2) must exceed 1
/// for the field to exist pointwise; that is checked by derived_smoothness(), not
/// here, so that invalid combinations can still be described in error messages.
class SmoothnessParams {
 public:
  SmoothnessParams(double alpha_t, double alpha_s, double alpha_e);

  double alpha_t() const { return alpha_t_; }
  double alpha_s() const { return alpha_s_; }
  double alpha_e() const { return alpha_e_; }

  /// alpha_e + alpha_s * (alpha_t - 1/2)
  double alpha() const { return alpha_e_ + alpha_s_ * (alpha_t_ - 0.5); }

  bool separable() const { return alpha_s_ == 0.0; }

  std::string to_string() const;

 private:
  double alpha_t_;
  double alpha_s_;
  double alpha_e_;
};

struct DerivedSmoothness {
  double alpha;
  double nu_s;
  double nu_t;
  double beta_s;
};

/// alpha, spatial smoothness nu_s = alpha - 1, temporal smoothness
/// nu_t = min(alpha_t - 1/2, nu_s / alpha_s) (alpha_t - 1/2 when alpha_s = 0)
/// and separability beta_s = alpha_s * nu_t / nu_s.
///
/// Throws InputError when alpha <= 1 or when beta_s falls outside [0, 1].
DerivedSmoothness derived_smoothness(const SmoothnessParams& sp);

/// Raw operator scales: gamma_t (time), gamma_s (inverse spatial length) and
/// gamma_e (noise precision scale). All strictly positive and finite.
class ScaleParams {
 public:
  ScaleParams(double gamma_t, double gamma_s, double gamma_e);

  double gamma_t() const { return gamma_t_; }
  double gamma_s() const { return gamma_s_; }
  double gamma_e() const { return gamma_e_; }

 private:
  double gamma_t_;
  double gamma_s_;
  double gamma_e_;
};

/// Marginal standard deviation and the spatial / temporal correlation ranges.
class InterpretableParams {
 public:
  InterpretableParams(double sigma, double r_s, double r_t);

  double sigma() const { return sigma_; }
  double r_s() const { return r_s_; }
  double r_t() const { return r_t_; }

 private:
  double sigma_;
  double r_s_;
  double r_t_;
};

/// c1 = Gamma(alpha_t - 1/2) Gamma(alpha - 1) / (Gamma(alpha_t) Gamma(alpha) (4 pi)^{3/2}),
/// evaluated through log-gamma. Requires alpha > 1 and alpha_t > 1/2.
double variance_constant(const SmoothnessParams& sp);

/// Natural log of variance_constant().
double log_variance_constant(const SmoothnessParams& sp);

/// Marginal variance sigma^2 = c1 / (gamma_e^2 gamma_t gamma_s^{2(alpha-1)}).
double marginal_variance(const SmoothnessParams& sp, const ScaleParams& sc);

InterpretableParams scales_to_interpretable(const SmoothnessParams& sp, const ScaleParams& sc);
ScaleParams interpretable_to_scales(const SmoothnessParams& sp, const InterpretableParams& ip);

}  // namespace demf
