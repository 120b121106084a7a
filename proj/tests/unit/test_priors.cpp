#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "demf/errors.hpp"
#include "demf/gmrf.hpp"
#include "demf/priors.hpp"
#include "demf/random.hpp"

using namespace demf;

namespace {

double integrate_density(const std::function<double(double)>& log_density) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double x) { return std::exp(log_density(x)); }, 0.0,
                              std::numeric_limits<double>::infinity(), 1e-12);
}

// Small simulated instance: DEMF(1,0,2) on a padded grid, observations at random points.
FitProblem simulated_problem(int n_obs, const InterpretableParams& truth, std::uint64_t seed, PcRates rates) {
  StructuredGridSpec spec;
  spec.cells = 6;
  spec.hi = 3.0;
  spec.margin = 1.0;
  const Mesh2D mesh = structured_grid(spec);
  const TimeGrid grid(4, 0.5);
  const SmoothnessParams sp(1, 0, 2);
  FitProblem p{sp,
               assemble_spatial(mesh),
               temporal_matrices(grid, TemporalMass::lumped),
               {},
               {},
               0.01,
               rates};
  const SparseSymmetric q = spacetime_precision(sp, interpretable_to_scales(sp, truth), p.spatial, p.temporal);
  const Eigen::VectorXd u = CholeskyFactor(q).sample(seed);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Observation> obs;
  for (int k = 0; k < n_obs; ++k) {
    obs.push_back({3.0 * unit(gen), 3.0 * unit(gen), 1.5 * unit(gen), 0.0});
  }
  p.design = project(mesh, grid, obs);
  CounterRng noise(seed + 1);
  p.values = p.design * u + std::sqrt(p.noise_variance) * noise.normal_vector(n_obs);
  return p;
}

}  // namespace

TEST_CASE("elicitation closed forms and round trips") {
  const PcRates r = elicit_rates({1.0, 0.05, 1.0, 0.05, 4.0, 0.05});
  CHECK(r.lambda_e == doctest::Approx(-std::log(0.05)));
  CHECK(r.lambda_e == doctest::Approx(2.996).epsilon(1e-3));
  CHECK(r.lambda_s == doctest::Approx(2.996).epsilon(1e-3));
  CHECK(r.lambda_t == doctest::Approx(-std::log(0.05) * 2.0));

  const PcElicitation e{2.0, 0.1, 3.0, 0.2, 5.0, 0.3};
  const PcRates k = elicit_rates(e);
  CHECK(std::exp(-k.lambda_e * e.sigma0) == doctest::Approx(e.p_sigma).epsilon(1e-12));
  CHECK(std::exp(-k.lambda_s / e.r0) == doctest::Approx(e.p_r).epsilon(1e-12));
  CHECK(std::exp(-k.lambda_t / std::sqrt(e.t0)) == doctest::Approx(e.p_t).epsilon(1e-12));

  PcElicitation upper = e;
  upper.r_t_tail = TailConvention::upper;
  const PcRates ku = elicit_rates(upper);
  CHECK(1.0 - std::exp(-ku.lambda_t / std::sqrt(e.t0)) == doctest::Approx(e.p_t).epsilon(1e-12));

  CHECK_THROWS_AS(elicit_rates({1.0, 0.0, 1.0, 0.05, 1.0, 0.05}), InputError);
  CHECK_THROWS_AS(elicit_rates({1.0, 0.05, 1.0, 1.0, 1.0, 0.05}), InputError);
  CHECK_THROWS_AS(elicit_rates({-1.0, 0.05, 1.0, 0.05, 1.0, 0.05}), InputError);
}

TEST_CASE("prior marginals are normalised densities") {
  for (double lambda : {0.3, 1.0, 4.0}) {
    CHECK(integrate_density([&](double x) { return log_prior_sigma(x, lambda); }) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(integrate_density([&](double x) { return log_prior_range_s(x, lambda); }) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(integrate_density([&](double x) { return log_prior_range_t(x, lambda); }) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("prior shape and domain") {
  const PcRates r{1.0, 2.0, 3.0};
  double previous = log_prior(InterpretableParams(0.1, 1.0, 1.0), r);
  for (double s = 0.2; s < 5.0; s += 0.1) {
    const double v = log_prior(InterpretableParams(s, 1.0, 1.0), r);
    CHECK(v < previous);
    CHECK(std::isfinite(v));
    previous = v;
  }
  CHECK(log_prior_sigma(0.0, 1.0) == -std::numeric_limits<double>::infinity());
  CHECK(log_prior_range_s(-1.0, 1.0) == -std::numeric_limits<double>::infinity());
  CHECK(log_prior_range_t(0.0, 1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("Nelder-Mead on a quadratic") {
  auto f = [](const Eigen::VectorXd& x) {
    return std::pow(x[0] - 1.0, 2) + 3.0 * std::pow(x[1] + 2.0, 2) + 0.5 * std::pow(x[2] - 0.5, 2) +
           0.2 * (x[0] - 1.0) * (x[1] + 2.0);
  };
  NelderMeadOptions opt;
  opt.max_evaluations = 2000;
  opt.f_tolerance = 1e-16;
  opt.x_tolerance = 1e-10;
  const auto res = nelder_mead(f, Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0.5, 0.5, 0.5), opt);
  CHECK(res.converged);
  CHECK(std::abs(res.x[0] - 1.0) <= 1e-6);
  CHECK(std::abs(res.x[1] + 2.0) <= 1e-6);
  CHECK(std::abs(res.x[2] - 0.5) <= 1e-6);
  CHECK(res.trace.back() == res.value);

  // Restarting from the optimum makes no further progress.
  const auto again = nelder_mead(f, res.x, Eigen::Vector3d(1e-3, 1e-3, 1e-3), opt);
  CHECK(again.value >= res.value - 1e-14);

  NelderMeadOptions tiny;
  tiny.max_evaluations = 10;
  const auto capped = nelder_mead(f, Eigen::Vector3d(5, 5, 5), Eigen::Vector3d(1, 1, 1), tiny);
  CHECK_FALSE(capped.converged);
  CHECK(capped.evaluations <= 12);
}

TEST_CASE("log posterior is the prior without data and the likelihood adds on") {
  const PcRates rates{1.0, 1.0, 1.0};
  const InterpretableParams truth(1.0, 1.5, 1.0);
  FitProblem p = simulated_problem(40, truth, 5, rates);
  const double lp = log_posterior(truth, p);
  const SparseSymmetric q = spacetime_precision(p.smoothness, interpretable_to_scales(p.smoothness, truth), p.spatial, p.temporal);
  CHECK(lp - log_prior(truth, rates) ==
        doctest::Approx(gaussian_log_likelihood(q, p.design, p.values, p.noise_variance)).epsilon(1e-12));

  // Observation order does not matter.
  FitProblem shuffled = p;
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm(p.values.size());
  perm.setIdentity();
  std::mt19937_64 gen(3);
  std::shuffle(perm.indices().data(), perm.indices().data() + perm.size(), gen);
  shuffled.design = perm * p.design;
  shuffled.values = perm * p.values;
  CHECK(log_posterior(truth, shuffled) == doctest::Approx(lp).epsilon(1e-12));

  FitProblem empty = p;
  empty.design = SparseSymmetric::Matrix(0, p.design.cols());
  empty.values = Eigen::VectorXd(0);
  CHECK(log_posterior(truth, empty) == log_prior(truth, rates));
}

TEST_CASE("log posterior prefers the truth to a doubled range") {
  const InterpretableParams truth(1.0, 1.5, 1.0);
  const FitProblem p = simulated_problem(200, truth, 17, {0.5, 0.5, 0.5});
  CHECK(log_posterior(truth, p) > log_posterior(InterpretableParams(1.0, 3.0, 1.0), p));
  CHECK(log_posterior(truth, p) > log_posterior(InterpretableParams(1.0, 1.5, 2.0), p));
}

TEST_CASE("MAP with no data is the prior mode in log coordinates") {
  const PcRates rates{2.0, 1.5, 1.2};
  FitProblem p = simulated_problem(10, InterpretableParams(1, 1, 1), 1, rates);
  p.design = SparseSymmetric::Matrix(0, p.design.cols());
  p.values = Eigen::VectorXd(0);
  NelderMeadOptions opt;
  opt.max_evaluations = 600;
  const FitResult fit = fit_map(p, InterpretableParams(1.0, 1.0, 1.0), opt);
  CHECK(fit.params.sigma() == doctest::Approx(1.0 / rates.lambda_e).epsilon(1e-3));
  CHECK(fit.params.r_s() == doctest::Approx(rates.lambda_s).epsilon(1e-3));
  CHECK(fit.params.r_t() == doctest::Approx(rates.lambda_t * rates.lambda_t).epsilon(1e-3));
  CHECK(fit.converged);
}

TEST_CASE("MAP optimum does not depend on the search coordinates") {
  const InterpretableParams truth(1.0, 1.5, 1.0);
  const FitProblem p = simulated_problem(150, truth, 23, {0.5, 0.5, 0.5});
  NelderMeadOptions opt;
  opt.max_evaluations = 400;
  opt.f_tolerance = 1e-10;
  opt.x_tolerance = 1e-6;
  const FitResult a = fit_map(p, InterpretableParams(0.8, 1.2, 1.3), opt, SearchSpace::log);
  const FitResult b = fit_map(p, InterpretableParams(0.8, 1.2, 1.3), opt, SearchSpace::natural);
  CHECK(a.params.sigma() == doctest::Approx(b.params.sigma()).epsilon(1e-3));
  CHECK(a.params.r_s() == doctest::Approx(b.params.r_s()).epsilon(1e-3));
  CHECK(a.params.r_t() == doctest::Approx(b.params.r_t()).epsilon(1e-3));
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-8));

  // Restarting from the optimum makes no further progress.
  const FitResult again = fit_map(p, a.params, opt, SearchSpace::log);
  CHECK(again.objective <= a.objective + 1e-8);
}
