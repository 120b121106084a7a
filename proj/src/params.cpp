#include "demf/params.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "demf/errors.hpp"

namespace demf {

namespace {

void require_nonnegative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream os;
    os << name << " must be finite and non-negative, got " << value;
    throw InputError(os.str());
  }
}

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream os;
    os << name << " must be finite and strictly positive, got " << value;
    throw InputError(os.str());
  }
}

// Shared precondition of every map between raw and interpretable scales.
void require_interpretable_domain(const SmoothnessParams& sp) {
  derived_smoothness(sp);
  if (!(sp.alpha_t() > 0.5)) {
    throw InputError("interpretable parameters need alpha_t > 1/2 (r_t degenerates), got " +
                     sp.to_string());
  }
}

double checked_exp(double log_value, const char* what, const SmoothnessParams& sp) {
  const double value = std::exp(log_value);
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream os;
    os << what << " over/underflows for " << sp.to_string() << " (log value " << log_value << ")";
    throw InputError(os.str());
  }
  return value;
}

}  // namespace

SmoothnessParams::SmoothnessParams(double alpha_t, double alpha_s, double alpha_e)
    : alpha_t_(alpha_t), alpha_s_(alpha_s), alpha_e_(alpha_e) {
  require_nonnegative(alpha_t, "alpha_t");
  require_nonnegative(alpha_s, "alpha_s");
  require_nonnegative(alpha_e, "alpha_e");
}

std::string SmoothnessParams::to_string() const {
  std::ostringstream os;
  os << "DEMF(" << alpha_t_ << ", " << alpha_s_ << ", " << alpha_e_ << ")";
  return os.str();
}

DerivedSmoothness derived_smoothness(const SmoothnessParams& sp) {
  const double alpha = sp.alpha();
  if (!(alpha > 1.0)) {
    std::ostringstream os;
    os << sp.to_string() << " has alpha = " << alpha << " <= 1; the field is undefined";
    throw InputError(os.str());
  }
  const double nu_s = alpha - 1.0;
  const double nu_t = sp.separable() ? sp.alpha_t() - 0.5
                                     : std::min(sp.alpha_t() - 0.5, nu_s / sp.alpha_s());
  const double beta_s = sp.alpha_s() * nu_t / nu_s;
  constexpr double slack = 1e-12;
  if (!(beta_s >= -slack && beta_s <= 1.0 + slack)) {
    std::ostringstream os;
    os << sp.to_string() << " gives separability beta_s = " << beta_s << " outside [0, 1]";
    throw InputError(os.str());
  }
  return {alpha, nu_s, nu_t, std::clamp(beta_s, 0.0, 1.0)};
}

ScaleParams::ScaleParams(double gamma_t, double gamma_s, double gamma_e)
    : gamma_t_(gamma_t), gamma_s_(gamma_s), gamma_e_(gamma_e) {
  require_positive(gamma_t, "gamma_t");
  require_positive(gamma_s, "gamma_s");
  require_positive(gamma_e, "gamma_e");
}

InterpretableParams::InterpretableParams(double sigma, double r_s, double r_t)
    : sigma_(sigma), r_s_(r_s), r_t_(r_t) {
  require_positive(sigma, "sigma");
  require_positive(r_s, "r_s");
  require_positive(r_t, "r_t");
}

double log_variance_constant(const SmoothnessParams& sp) {
  require_interpretable_domain(sp);
  const double alpha = sp.alpha();
  const double log_c1 = std::lgamma(sp.alpha_t() - 0.5) + std::lgamma(alpha - 1.0) -
                        std::lgamma(sp.alpha_t()) - std::lgamma(alpha) -
                        1.5 * std::log(4.0 * std::numbers::pi);
  if (!std::isfinite(log_c1)) {
    throw InputError("log-gamma overflow evaluating c1 for " + sp.to_string());
  }
  return log_c1;
}

double variance_constant(const SmoothnessParams& sp) {
  return checked_exp(log_variance_constant(sp), "c1", sp);
}

double marginal_variance(const SmoothnessParams& sp, const ScaleParams& sc) {
  const double log_var = log_variance_constant(sp) - 2.0 * std::log(sc.gamma_e()) -
                         std::log(sc.gamma_t()) -
                         2.0 * (sp.alpha() - 1.0) * std::log(sc.gamma_s());
  return checked_exp(log_var, "sigma^2", sp);
}

InterpretableParams scales_to_interpretable(const SmoothnessParams& sp, const ScaleParams& sc) {
  const double log_c1 = log_variance_constant(sp);
  const double nu_s = sp.alpha() - 1.0;
  const double log_gs = std::log(sc.gamma_s());
  const double log_sigma =
      -std::log(sc.gamma_e()) + 0.5 * log_c1 - 0.5 * std::log(sc.gamma_t()) - nu_s * log_gs;
  const double log_rs = 0.5 * std::log(8.0 * nu_s) - log_gs;
  const double log_rt = std::log(sc.gamma_t()) + 0.5 * std::log(8.0 * (sp.alpha_t() - 0.5)) -
                        sp.alpha_s() * log_gs;
  return {checked_exp(log_sigma, "sigma", sp), checked_exp(log_rs, "r_s", sp),
          checked_exp(log_rt, "r_t", sp)};
}

ScaleParams interpretable_to_scales(const SmoothnessParams& sp, const InterpretableParams& ip) {
  const double log_c1 = log_variance_constant(sp);
  const double nu_s = sp.alpha() - 1.0;
  const double log_gs = 0.5 * std::log(8.0 * nu_s) - std::log(ip.r_s());
  const double log_gt = std::log(ip.r_t()) + sp.alpha_s() * log_gs -
                        0.5 * std::log(8.0 * (sp.alpha_t() - 0.5));
  const double log_ge = 0.5 * log_c1 - 0.5 * log_gt - nu_s * log_gs - std::log(ip.sigma());
  return {checked_exp(log_gt, "gamma_t", sp), checked_exp(log_gs, "gamma_s", sp),
          checked_exp(log_ge, "gamma_e", sp)};
}

}  // namespace demf
