#include "demf/spectral.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "demf/errors.hpp"

namespace demf {

namespace {

constexpr double kPi = std::numbers::pi;

// Above this argument K_nu underflows for every order used here.
constexpr double kBesselKCutoff = 700.0;

// log of int_{-inf}^{inf} (1 + x^2)^{-a} cos(x y) dx, a > 1/2.
double log_cosine_transform(double a, double y) {
  if (y == 0.0) {
    return 0.5 * std::log(kPi) + std::lgamma(a - 0.5) - std::lgamma(a);
  }
  if (y > kBesselKCutoff) {
    return -std::numeric_limits<double>::infinity();
  }
  const double nu = a - 0.5;
  return std::log(2.0) + 0.5 * std::log(kPi) - std::lgamma(a) + nu * std::log(0.5 * y) +
         std::log(std::cyl_bessel_k(nu, y));
}

[[noreturn]] void quadrature_failure(const char* what, double achieved, double wanted) {
  std::ostringstream os;
  os << what << " did not converge: achieved relative error " << achieved << ", wanted "
     << wanted;
  throw NumericalError(os.str());
}

// Integral over [0, 1] of a positive integrand with at most an integrable power
// singularity at 0.
template <class F>
double unit_interval_integral(F f) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, 0.0, 1.0, 1e-13, &error, &l1);
  if (!(error <= 1e-9 * l1) || !std::isfinite(value)) {
    quadrature_failure("temporal spectrum quadrature", error / l1, 1e-9);
  }
  return value;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(radial_cutoff > 0.0) || panels_per_scale < 1 || !(rel_tol > 0.0) || max_doublings < 1 ||
      !(temporal_tol > 0.0)) {
    throw InputError("invalid quadrature specification");
  }
}

double matern_correlation(double nu, double x) {
  if (x < 0.0) {
    x = -x;
  }
  if (x == 0.0) {
    return 1.0;
  }
  if (x > kBesselKCutoff) {
    return 0.0;
  }
  const double log_value = nu * std::log(x) + std::log(std::cyl_bessel_k(nu, x)) -
                           std::lgamma(nu) - (nu - 1.0) * std::log(2.0);
  return std::exp(log_value);
}

SpectrumEvaluator::SpectrumEvaluator(SmoothnessParams sp, ScaleParams sc)
    : sp_(sp),
      sc_(sc),
      variance_(marginal_variance(sp, sc)),
      log_prefactor_(-3.0 * std::log(2.0 * kPi) - 2.0 * std::log(sc.gamma_e())) {}

double SpectrumEvaluator::spectrum(double omega_s_norm, double omega_t) const {
  const double a = sc_.gamma_s() * sc_.gamma_s() + omega_s_norm * omega_s_norm;
  const double gt_w = sc_.gamma_t() * omega_t;
  const double temporal = gt_w * gt_w + std::pow(a, sp_.alpha_s());
  return std::exp(log_prefactor_ - sp_.alpha_t() * std::log(temporal) -
                  sp_.alpha_e() * std::log(a));
}

double SpectrumEvaluator::spatial_matern_cov(double h_s) const {
  const double nu_s = sp_.alpha() - 1.0;
  return variance_ * matern_correlation(nu_s, sc_.gamma_s() * h_s);
}

double SpectrumEvaluator::temporal_transform(double r, double h_t) const {
  // Substituting omega_t = sqrt(A) x / gamma_t with A = a^{alpha_s} reduces the
  // omega_t integral to the cosine transform of (1 + x^2)^{-alpha_t}.
  const double log_a = std::log(sc_.gamma_s() * sc_.gamma_s() + r * r);
  const double log_big_a = sp_.alpha_s() * log_a;
  const double y = std::abs(h_t) * std::exp(0.5 * log_big_a) / sc_.gamma_t();
  const double log_value = log_prefactor_ - sp_.alpha_e() * log_a +
                           (0.5 - sp_.alpha_t()) * log_big_a - std::log(sc_.gamma_t()) +
                           log_cosine_transform(sp_.alpha_t(), y);
  return std::exp(log_value);
}

double SpectrumEvaluator::temporal_spectrum(double omega_t) const {
  const double gs = sc_.gamma_s();
  const double ge = sc_.gamma_e();
  const double at = sp_.alpha_t();
  const double as = sp_.alpha_s();
  const double ae = sp_.alpha_e();
  // (2 pi)^{-2} gamma_e^{-2} gamma_s^{2 - 2 alpha_s alpha_t - 2 alpha_e} / 2
  const double log_p = -2.0 * std::log(2.0 * kPi) - 2.0 * std::log(ge) +
                       (2.0 - 2.0 * as * at - 2.0 * ae) * std::log(gs) - std::log(2.0);
  if (sp_.separable()) {
    const double gt_w = sc_.gamma_t() * omega_t;
    return std::exp(log_p - std::log(ae - 1.0) - at * std::log1p(gt_w * gt_w));
  }
  // int_0^inf (1+x)^{-(alpha_e-1)/alpha_s - 1} (w^2 + 1 + x)^{-alpha_t} dx with
  // t = 1/(1+x): int_0^1 t^e (1 + w^2 t)^{-alpha_t} dt, e = nu_s/alpha_s - 1/2 > -1/2.
  const double w = omega_t * sc_.gamma_t() / std::pow(gs, as);
  const double w2 = w * w;
  const double exponent = (ae - 1.0) / as + at - 1.0;
  double value = 0.0;
  if (w2 <= 1.0) {
    value = unit_interval_integral([=](double t) { return std::pow(t, exponent) * std::pow(1.0 + w2 * t, -at); });
  } else {
    // s = w^2 t moves the boundary layer at t ~ 1/w^2 to s ~ 1; the range
    // s in [1, w^2] is integrated in v = ln s, where the integrand is smooth.
    const double head = unit_interval_integral([=](double s) { return std::pow(s, exponent) * std::pow(1.0 + s, -at); });
    const double growth = exponent + 1.0 - at;
    auto log_integrand = [=](double v) { return std::exp(growth * v - at * std::log1p(std::exp(-v))); };
    double error = 0.0;
    const double tail = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        log_integrand, 0.0, std::log(w2), 15, 1e-13, &error);
    if (!(error <= 1e-9 * (head + tail)) || !std::isfinite(tail)) {
      quadrature_failure("temporal spectrum quadrature", error / (head + tail), 1e-9);
    }
    value = std::exp(-(exponent + 1.0) * std::log(w2)) * (head + tail);
  }
  return std::exp(log_p - std::log(as)) * value;
}

double SpectrumEvaluator::spacetime_cov(double h_s, double h_t, const QuadratureSpec& q) const {
  q.validate();
  if (!(h_s >= 0.0)) {
    throw InputError("spatial lag must be non-negative");
  }
  h_t = std::abs(h_t);
  const double scale = sc_.gamma_s();
  double panel = scale / q.panels_per_scale;
  if (h_s > 0.0) {
    panel = std::min(panel, 0.5 * kPi / h_s);
  }
  auto integrand = [&](double r) {
    const double bessel = h_s > 0.0 ? std::cyl_bessel_j(0.0, r * h_s) : 1.0;
    return 2.0 * kPi * r * bessel * temporal_transform(r, h_t);
  };
  auto integrate_range = [&](double lo, double hi) {
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
    const double width = (hi - lo) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
      const double a = lo + k * width;
      sum += boost::math::quadrature::gauss<double, 20>::integrate(integrand, a, a + width);
    }
    return sum;
  };
  auto tail = [&](double radius) {
    if (h_s > 0.0) {
      // First two integration-by-parts terms of int_R^inf r J0(r h_s) T(r) dr,
      // using (r J1(r h))' = h r J0(r h) and J0' = -J1.
      const double step = 1e-4 * radius;
      const double slope = (temporal_transform(radius + step, h_t) - temporal_transform(radius - step, h_t)) /
                           (2.0 * step);
      const double x = radius * h_s;
      return -2.0 * kPi *
             (radius * std::cyl_bessel_j(1.0, x) * temporal_transform(radius, h_t) / h_s +
              std::cyl_bessel_j(0.0, x) * radius * slope / (h_s * h_s));
    }
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(integrand, radius, std::numeric_limits<double>::infinity(),
                                1e-12);
  };

  const double floor = 1e-6 * variance_;
  double radius = q.radial_cutoff * scale;
  double body = integrate_range(0.0, radius);
  double previous = body + tail(radius);
  double change = std::numeric_limits<double>::infinity();
  for (int k = 0; k < q.max_doublings; ++k) {
    body += integrate_range(radius, 2.0 * radius);
    radius *= 2.0;
    const double total = body + tail(radius);
    change = std::abs(total - previous) / std::max(std::abs(total), floor);
    if (change <= q.rel_tol) {
      return total;
    }
    previous = total;
  }
  quadrature_failure("radial Hankel quadrature", change, q.rel_tol);
}

double SpectrumEvaluator::temporal_cov(double h_t, const QuadratureSpec& q) const {
  q.validate();
  h_t = std::abs(h_t);
  if (sp_.separable()) {
    return variance_ * matern_correlation(sp_.alpha_t() - 0.5, h_t / sc_.gamma_t());
  }
  auto integrand = [this](double w) { return temporal_spectrum(w); };
  if (h_t == 0.0) {
    return spectral_variance(q);
  }
  boost::math::quadrature::ooura_fourier_cos<double> integrator(q.temporal_tol);
  const auto [value, relative_error] = integrator.integrate(integrand, h_t);
  if (!(relative_error <= 1e-6)) {
    quadrature_failure("temporal cosine transform", relative_error, 1e-6);
  }
  return 2.0 * value;
}

double SpectrumEvaluator::spectral_variance(const QuadratureSpec& q) const {
  q.validate();
  auto integrand = [this](double w) { return temporal_spectrum(w); };
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(),
                                            q.temporal_tol, &error, &l1);
  if (!(error <= 1e-7 * l1)) {
    quadrature_failure("temporal spectrum integral", error / l1, 1e-7);
  }
  return 2.0 * value;
}

}  // namespace demf
