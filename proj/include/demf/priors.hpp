#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "demf/fem.hpp"
#include "demf/params.hpp"
#include "demf/solver.hpp"

namespace demf {

/// Rates of the penalised-complexity priors
///   sigma ~ Exp(lambda_e),  1/r_s ~ Exp(lambda_s),  1/sqrt(r_t) ~ Exp(lambda_t),
/// taken as independent.
struct PcRates {
  double lambda_e;
  double lambda_s;
  double lambda_t;

  void validate() const;
};

enum class TailConvention {
  /// P(r_t < t0) = p_t
  lower,
  /// P(r_t > t0) = p_t
  upper,
};

/// Quantile statements used to pick the rates:
///   P(sigma > sigma0) = p_sigma,  P(r_s < r0) = p_r,  P(r_t < t0) = p_t (or > t0).
struct PcElicitation {
  double sigma0;
  double p_sigma;
  double r0;
  double p_r;
  double t0;
  double p_t;
  TailConvention r_t_tail = TailConvention::lower;
};

PcRates elicit_rates(const PcElicitation& e);

/// Marginal log-densities with respect to sigma, r_s and r_t themselves (the
/// change-of-variables Jacobians are included). Non-positive arguments give -inf.
double log_prior_sigma(double sigma, double lambda_e);
double log_prior_range_s(double r_s, double lambda_s);
double log_prior_range_t(double r_t, double lambda_t);

/// Sum of the three marginal log-densities.
double log_prior(const InterpretableParams& ip, const PcRates& rates);

/// Everything needed to evaluate the marginal likelihood of a space-time model at
/// varying (sigma, r_s, r_t): fixed smoothness, discretisation and data.
struct FitProblem {
  SmoothnessParams smoothness;
  SpatialFem spatial;
  TemporalFem temporal;
  SparseSymmetric::Matrix design;  // A, observations x coefficients
  Eigen::VectorXd values;          // y
  double noise_variance;
  PcRates rates;
  Ordering ordering = Ordering::amd;
};

/// Gaussian marginal log-likelihood plus log_prior. Returns -inf (and never
/// throws) when the parameters are outside the model domain or the precision
/// cannot be factorised.
double log_posterior(const InterpretableParams& ip, const FitProblem& problem);

struct NelderMeadOptions {
  /// Checked before each iteration; the iteration in progress may add up to n + 1 more.
  int max_evaluations = 200;
  double f_tolerance = 1e-8;
  double x_tolerance = 1e-8;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;
  int evaluations;
  bool converged;
  /// Best value after each iteration.
  std::vector<double> trace;
};

/// Minimises f from the simplex {x0, x0 + step_i e_i}. Deterministic.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& step, const NelderMeadOptions& options = {});

enum class SearchSpace {
  /// Simplex over (ln sigma, ln r_s, ln r_t).
  log,
  /// Simplex over (sigma, r_s, r_t) directly.
  natural,
};

struct FitResult {
  InterpretableParams params;
  /// log_posterior at params.
  double log_posterior;
  /// The maximised objective: log_posterior + ln sigma + ln r_s + ln r_t.
  double objective;
  int evaluations;
  bool converged;
  std::vector<double> trace;
};

/// MAP estimate of the posterior density of (ln sigma, ln r_s, ln r_t), i.e. the
/// maximiser of log_posterior + ln sigma + ln r_s + ln r_t. The same objective is
/// used whatever the search space, so both spaces target the same optimum.
FitResult fit_map(const FitProblem& problem, const InterpretableParams& init, const NelderMeadOptions& options = {},
                  SearchSpace space = SearchSpace::log);

}  // namespace demf
