#include "demf/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "demf/errors.hpp"
#include "demf/gmrf.hpp"

namespace demf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_probability(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InputError(std::string(name) + " must lie strictly between 0 and 1");
  }
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InputError(std::string(name) + " must be positive and finite");
  }
}

}  // namespace

void PcRates::validate() const {
  check_positive(lambda_e, "lambda_e");
  check_positive(lambda_s, "lambda_s");
  check_positive(lambda_t, "lambda_t");
}

PcRates elicit_rates(const PcElicitation& e) {
  check_positive(e.sigma0, "sigma0");
  check_positive(e.r0, "r0");
  check_positive(e.t0, "t0");
  check_probability(e.p_sigma, "p_sigma");
  check_probability(e.p_r, "p_r");
  check_probability(e.p_t, "p_t");
  // P(r_t < t0) = P(1/sqrt(r_t) > 1/sqrt(t0)) = exp(-lambda_t / sqrt(t0)).
  const double tail_t = e.r_t_tail == TailConvention::lower ? e.p_t : 1.0 - e.p_t;
  return {-std::log(e.p_sigma) / e.sigma0, -std::log(e.p_r) * e.r0, -std::log(tail_t) * std::sqrt(e.t0)};
}

double log_prior_sigma(double sigma, double lambda_e) {
  if (!(sigma > 0.0)) {
    return kNegInf;
  }
  return std::log(lambda_e) - lambda_e * sigma;
}

double log_prior_range_s(double r_s, double lambda_s) {
  if (!(r_s > 0.0)) {
    return kNegInf;
  }
  return std::log(lambda_s) - lambda_s / r_s - 2.0 * std::log(r_s);
}

double log_prior_range_t(double r_t, double lambda_t) {
  if (!(r_t > 0.0)) {
    return kNegInf;
  }
  return std::log(0.5 * lambda_t) - lambda_t / std::sqrt(r_t) - 1.5 * std::log(r_t);
}

double log_prior(const InterpretableParams& ip, const PcRates& rates) {
  return log_prior_sigma(ip.sigma(), rates.lambda_e) + log_prior_range_s(ip.r_s(), rates.lambda_s) +
         log_prior_range_t(ip.r_t(), rates.lambda_t);
}

double log_posterior(const InterpretableParams& ip, const FitProblem& problem) {
  const double prior = log_prior(ip, problem.rates);
  if (problem.values.size() == 0) {
    return prior;
  }
  try {
    const ScaleParams sc = interpretable_to_scales(problem.smoothness, ip);
    const SparseSymmetric q = spacetime_precision(problem.smoothness, sc, problem.spatial, problem.temporal);
    const double ll =
        gaussian_log_likelihood(q, problem.design, problem.values, problem.noise_variance, problem.ordering);
    return std::isfinite(ll) ? ll + prior : kNegInf;
  } catch (const NumericalError&) {
    return kNegInf;
  } catch (const InputError&) {
    return kNegInf;
  }
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& step, const NelderMeadOptions& o) {
  const Index n = x0.size();
  if (n == 0 || step.size() != n) {
    throw InputError("Nelder-Mead needs a non-empty start point and a matching step vector");
  }
  if (o.max_evaluations < n + 1) {
    throw InputError("Nelder-Mead budget is smaller than the initial simplex");
  }
  int evaluations = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (Index i = 0; i < n; ++i) {
    pts[i + 1][i] += step[i];
  }
  for (Index i = 0; i <= n; ++i) {
    vals[i] = eval(pts[i]);
  }

  std::vector<int> order(n + 1);
  std::vector<double> trace;
  bool converged = false;
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2;
    std::vector<double> v2;
    for (int i : order) {
      p2.push_back(pts[i]);
      v2.push_back(vals[i]);
    }
    pts = std::move(p2);
    vals = std::move(v2);
  };

  while (true) {
    sort_simplex();
    trace.push_back(vals[0]);
    double size = 0.0;
    for (Index i = 1; i <= n; ++i) {
      size = std::max(size, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
    }
    if (std::isfinite(vals[n]) && vals[n] - vals[0] <= o.f_tolerance * (1.0 + std::abs(vals[0])) &&
        size <= o.x_tolerance * (1.0 + pts[0].cwiseAbs().maxCoeff())) {
      converged = true;
      break;
    }
    if (evaluations >= o.max_evaluations) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Index i = 0; i < n; ++i) {
      centroid += pts[i];
    }
    centroid /= static_cast<double>(n);
    const Eigen::VectorXd& worst = pts[n];

    const Eigen::VectorXd xr = centroid + o.reflection * (centroid - worst);
    const double fr = eval(xr);
    if (fr < vals[0]) {
      const Eigen::VectorXd xe = centroid + o.expansion * (xr - centroid);
      const double fe = evaluations < o.max_evaluations ? eval(xe) : std::numeric_limits<double>::infinity();
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
      continue;
    }
    if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
      continue;
    }
    const bool outside = fr < vals[n];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + o.contraction * (xr - centroid))
                : Eigen::VectorXd(centroid + o.contraction * (worst - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[n])) {
      pts[n] = xc;
      vals[n] = fc;
      continue;
    }
    for (Index i = 1; i <= n; ++i) {
      pts[i] = pts[0] + o.shrink * (pts[i] - pts[0]);
      vals[i] = eval(pts[i]);
    }
  }
  return {pts[0], vals[0], evaluations, converged, std::move(trace)};
}

FitResult fit_map(const FitProblem& problem, const InterpretableParams& init, const NelderMeadOptions& options,
                  SearchSpace space) {
  problem.rates.validate();
  auto objective = [&](double sigma, double r_s, double r_t) {
    if (!(sigma > 0.0 && r_s > 0.0 && r_t > 0.0) || !std::isfinite(sigma * r_s * r_t)) {
      return kNegInf;
    }
    const double lp = log_posterior(InterpretableParams(sigma, r_s, r_t), problem);
    return lp + std::log(sigma) + std::log(r_s) + std::log(r_t);
  };

  const Eigen::Vector3d init_vec(init.sigma(), init.r_s(), init.r_t());
  NelderMeadResult nm;
  if (space == SearchSpace::log) {
    auto f = [&](const Eigen::VectorXd& x) { return -objective(std::exp(x[0]), std::exp(x[1]), std::exp(x[2])); };
    nm = nelder_mead(f, init_vec.array().log().matrix(), Eigen::Vector3d::Constant(0.3), options);
    nm.x = nm.x.array().exp().matrix();
  } else {
    auto f = [&](const Eigen::VectorXd& x) { return -objective(x[0], x[1], x[2]); };
    nm = nelder_mead(f, init_vec, 0.3 * init_vec, options);
  }
  FitResult out{InterpretableParams(nm.x[0], nm.x[1], nm.x[2]),
                0.0,
                -nm.value,
                nm.evaluations,
                nm.converged,
                {}};
  out.log_posterior = out.objective - std::log(nm.x[0]) - std::log(nm.x[1]) - std::log(nm.x[2]);
  out.trace.reserve(nm.trace.size());
  for (double v : nm.trace) {
    out.trace.push_back(-v);
  }
  return out;
}

}  // namespace demf
