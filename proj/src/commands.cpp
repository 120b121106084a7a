#include "demf/commands.hpp"

#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "demf/errors.hpp"
#include "demf/gmrf.hpp"
#include "demf/random.hpp"
#include "demf/spectral.hpp"

namespace demf {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

std::string describe(const SmoothnessParams& sp, const ScaleParams& sc) {
  const InterpretableParams ip = scales_to_interpretable(sp, sc);
  std::ostringstream os;
  os << sp.to_string() << " gamma_t=" << num(sc.gamma_t()) << " gamma_s=" << num(sc.gamma_s())
     << " gamma_e=" << num(sc.gamma_e()) << " sigma=" << num(ip.sigma()) << " r_s=" << num(ip.r_s())
     << " r_t=" << num(ip.r_t());
  return os.str();
}

std::string describe(const TimeGrid& g) {
  return "count=" + std::to_string(g.count()) + " step=" + num(g.step()) + " start=" + num(g.start());
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot write output file " + path.string());
  }
  return out;
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& fallback) {
  return cfg.has("output.file") ? cfg.get_path("output.file") : cfg.resolve(fallback);
}

void warn_if_coarse(const SmoothnessParams& sp, const ScaleParams& sc, const TimeGrid& grid, std::ostream& log) {
  const double kappa = slowest_temporal_rate(sp, sc);
  if (grid.coarse_for(kappa)) {
    log << "warning: time step * kappa = " << num(grid.step() * kappa)
        << " exceeds 0.5; the temporal discretisation is coarse\n";
  }
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<int> region_vertices(const StructuredGridSpec& spec) {
  const int pad = structured_padding_cells(spec);
  std::vector<int> out;
  for (int iy = pad; iy <= pad + spec.cells; ++iy) {
    for (int ix = pad; ix <= pad + spec.cells; ++ix) {
      out.push_back(structured_vertex(spec, ix, iy));
    }
  }
  return out;
}

std::vector<Observation> simulate_year_one(const ForecastSetup& setup, const Mesh2D& mesh, std::uint64_t seed) {
  const SpatialFem spatial = assemble_spatial(mesh);
  const double gamma_s = std::sqrt(8.0) / setup.r_s;
  // (gamma_s^2 - Laplacian) u = W / tau in 2-D has variance 1 / (4 pi gamma_s^2 tau^2).
  const double tau2 = 1.0 / (4.0 * std::numbers::pi * gamma_s * gamma_s * setup.sigma * setup.sigma);
  const SparseSymmetric q = spatial_precision(2, gamma_s, spatial).scaled(tau2);
  const Eigen::VectorXd field = CholeskyFactor(q).sample(seed);
  CounterRng noise(seed ^ 0x5DEECE66DULL);
  const double noise_sd = std::sqrt(setup.noise_variance);
  std::vector<Observation> out;
  for (int v : region_vertices(setup.grid)) {
    const Point2& p = mesh.vertices()[v];
    out.push_back({p[0], p[1], setup.time_start, field[v] + noise_sd * noise.normal()});
  }
  return out;
}

ForecastResult run_forecast(const ForecastSetup& setup, const std::optional<std::vector<Observation>>& data,
                            std::uint64_t seed) {
  if (!(setup.noise_variance > 0.0) || !(setup.nonseparable_factor > 0.0)) {
    throw InputError("forecast needs a positive noise variance and range factor");
  }
  Mesh2D mesh = structured_grid(setup.grid);
  TimeGrid grid(setup.time_count, setup.time_step, setup.time_start);
  SpatialFem spatial = assemble_spatial(mesh);
  const TemporalFem temporal = temporal_matrices(grid, setup.temporal_mass);
  std::vector<Observation> obs = data ? *data : simulate_year_one(setup, mesh, seed);
  const SparseSymmetric::Matrix a = project(mesh, grid, obs);
  const Eigen::VectorXd y = observation_values(obs);

  auto fit = [&](const SmoothnessParams& sp, const InterpretableParams& ip) {
    const ScaleParams sc = interpretable_to_scales(sp, ip);
    const SparseSymmetric q = spacetime_precision(sp, sc, spatial, temporal);
    const Posterior post = condition(q, a, y, setup.noise_variance);
    return ForecastModel{sp, ip, post.mean, post.factor.marginal_variances().cwiseSqrt()};
  };
  const SmoothnessParams sep(1.0, 0.0, 2.0);
  const SmoothnessParams diff(1.0, 2.0, 1.0);
  ForecastModel m_sep = fit(sep, InterpretableParams(setup.sigma, setup.r_s, setup.r_t));
  ForecastModel m_diff = fit(diff, InterpretableParams(setup.sigma, setup.r_s, setup.r_t * setup.nonseparable_factor));
  return ForecastResult{std::move(mesh), grid, std::move(spatial), std::move(obs), std::move(m_sep), std::move(m_diff)};
}

double high_pass_energy(const Eigen::VectorXd& slice, const SpatialFem& spatial) {
  const double low = slice.dot(spatial.lumped_mass.matrix() * slice);
  if (!(low > 0.0)) {
    return 0.0;
  }
  return slice.dot(spatial.stiffness.matrix() * slice) / low;
}

double rms_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<int>& vertices) {
  double sum = 0.0;
  for (int v : vertices) {
    sum += (a[v] - b[v]) * (a[v] - b[v]);
  }
  return vertices.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(vertices.size()));
}

std::vector<ValidationCheck> run_validation(bool perturb_gamma_e) {
  std::vector<ValidationCheck> checks;
  auto add = [&](std::string name, double measured, double tol) {
    checks.push_back({std::move(name), measured, tol, std::isfinite(measured) && measured <= tol});
  };
  const SmoothnessParams diffusion(1.0, 2.0, 1.0);

  {
    StructuredGridSpec spec;
    spec.cells = 4;
    spec.hi = 2.0;
    const SpatialFem fem = assemble_spatial(structured_grid(spec));
    const TemporalFem t = temporal_matrices(TimeGrid(5, 0.3), TemporalMass::lumped);
    const ScaleParams sc = interpretable_to_scales(diffusion, InterpretableParams(1.0, 1.0, 1.0));
    const Eigen::MatrixXd q = demf121_precision(sc, fem, t).to_dense();
    add("eigen_oracle_equality", max_abs(q - eigen_oracle(sc, fem, t).precision) / max_abs(q), 1e-10);
  }
  {
    const SpectrumEvaluator ev(diffusion, interpretable_to_scales(diffusion, InterpretableParams(1.0, 1.0, 1.9)));
    double worst = 0.0;
    for (double h : {0.0, 0.25, 0.5, 1.0, 2.0}) {
      worst = std::max(worst, std::abs(ev.spacetime_cov(h, 0.0) / ev.spatial_matern_cov(h) - 1.0));
    }
    add("spatial_marginal", worst, 1e-4);
    add("correlation_at_range", std::abs(ev.spatial_matern_cov(1.0) / ev.variance() - 0.13), 0.02);
  }
  {
    double worst = 0.0;
    for (const SmoothnessParams& sp : {SmoothnessParams(1, 2, 1), SmoothnessParams(1, 0, 2), SmoothnessParams(1.5, 2, 0),
                                       SmoothnessParams(2, 2, 0), SmoothnessParams(1, 1, 2)}) {
      const SpectrumEvaluator ev(sp, ScaleParams(0.9, 1.3, 0.7));
      worst = std::max(worst, std::abs(ev.spectral_variance() / ev.variance() - 1.0));
      worst = std::max(worst, std::abs(ev.spacetime_cov(0.0, 0.0) / ev.variance() - 1.0));
    }
    add("variance_formula", worst, 1e-4);
  }
  {
    const double a0 = 1.0, a1 = -0.5, a2 = 0.06;
    const int n = 40;
    const double phi1 = -a1 / a0, phi2 = -a2 / a0, s2 = 1.0 / (a0 * a0);
    std::vector<double> acov(n);
    acov[0] = s2 * (1.0 - phi2) / ((1.0 + phi2) * ((1.0 - phi2) * (1.0 - phi2) - phi1 * phi1));
    acov[1] = acov[0] * phi1 / (1.0 - phi2);
    for (int k = 2; k < n; ++k) {
      acov[k] = phi1 * acov[k - 1] + phi2 * acov[k - 2];
    }
    Eigen::MatrixXd cov(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cov(i, j) = acov[std::abs(i - j)];
      }
    }
    const Eigen::MatrixXd lemma =
        ar2_stationary_precision(a0 * a0 + a1 * a1 + a2 * a2, a1 * (a0 + a2), a0 * a2, n).to_dense();
    add("ar2_lemma", max_abs(lemma - cov.inverse()), 1e-10);
  }
  {
    const SmoothnessParams sp(2.0, 2.0, 0.0);
    const ScaleParams sc(0.8, 1.4, 1.1);
    const SpectrumEvaluator ev(sp, sc);
    const double unit = sc.gamma_s() * sc.gamma_s() / sc.gamma_t();
    auto closed = [](double w) { return std::atan(w) / (2 * w * w * w) - 1.0 / (2 * w * w * (w * w + 1)); };
    const double ref = ev.temporal_spectrum(unit) / closed(1.0);
    double worst = 0.0;
    for (double w = 0.1; w <= 100.0; w *= 1.25) {
      worst = std::max(worst, std::abs(ev.temporal_spectrum(w * unit) / closed(w) / ref - 1.0));
    }
    add("arctan_special_case", worst, 1e-8);
  }
  {
    StructuredGridSpec spec;
    spec.cells = 6;
    spec.hi = 1.5;
    spec.margin = 1.5;
    const SpatialFem fem = assemble_spatial(structured_grid(spec));
    const TemporalFem t = temporal_matrices(TimeGrid(12, 0.2), TemporalMass::lumped);
    const ScaleParams sc = interpretable_to_scales(diffusion, InterpretableParams(1.0, 1.0, 1.0));
    SparseSymmetric q = demf121_precision(sc, fem, t);
    if (perturb_gamma_e) {
      q = q.scaled(sc.gamma_e() * sc.gamma_e());
    }
    const Eigen::VectorXd var = CholeskyFactor(q).marginal_variances();
    const int side = structured_points_per_side(spec);
    const Index centre = 6 * fem.mass.dimension() + structured_vertex(spec, side / 2, side / 2);
    add("gmrf_variance", std::abs(var[centre] / marginal_variance(diffusion, sc) - 1.0), 0.10);
  }
  return checks;
}

void cmd_covariance(const RunConfig& cfg, std::ostream& log) {
  const ModelSpec m = model_from_config(cfg);
  const SpectrumEvaluator ev(m.smoothness, m.scales);
  QuadratureSpec q;
  q.rel_tol = cfg.get_double("grid.rel_tol", q.rel_tol);
  const double hs_max = cfg.get_double("grid.h_s_max", 2.0);
  const double ht_max = cfg.get_double("grid.h_t_max", 2.0);
  const int hs_count = cfg.get_int("grid.h_s_count", 21);
  const int ht_count = cfg.get_int("grid.h_t_count", 21);
  if (hs_count < 1 || ht_count < 1 || !(hs_max >= 0.0) || !(ht_max >= 0.0)) {
    throw InputError("[grid] needs non-negative maxima and counts >= 1");
  }
  const auto path = output_path(cfg, "covariance.csv");
  std::ofstream out = open_output(path);
  out << "# command=covariance\n# model=" << describe(m.smoothness, m.scales) << '\n';
  out << "h_s,h_t,cov\n";
  auto node = [](double max, int count, int k) { return count == 1 ? 0.0 : max * k / (count - 1); };
  for (int i = 0; i < hs_count; ++i) {
    for (int j = 0; j < ht_count; ++j) {
      const double hs = node(hs_max, hs_count, i);
      const double ht = node(ht_max, ht_count, j);
      out << num(hs) << ',' << num(ht) << ',' << num(ev.spacetime_cov(hs, ht, q)) << '\n';
    }
  }
  log << "wrote " << hs_count * ht_count << " covariance values to " << path.string() << '\n';
}

void cmd_simulate(const RunConfig& cfg, std::uint64_t seed, std::ostream& log) {
  const ModelSpec m = model_from_config(cfg);
  const Mesh2D mesh = mesh_from_config(cfg);
  const TimeGrid grid = time_grid_from_config(cfg);
  warn_if_coarse(m.smoothness, m.scales, grid, log);
  const SpatialFem spatial = assemble_spatial(mesh);
  const TemporalFem temporal = temporal_matrices(grid, temporal_mass_from_config(cfg));
  const SparseSymmetric q = spacetime_precision(m.smoothness, m.scales, spatial, temporal);
  const Eigen::VectorXd u = CholeskyFactor(q).sample(seed);

  const auto path = output_path(cfg, "simulation.csv");
  std::ofstream out = open_output(path);
  out << "# command=simulate seed=" << seed << "\n# model=" << describe(m.smoothness, m.scales) << '\n';
  out << "# mesh vertices=" << mesh.vertex_count() << " triangles=" << mesh.triangle_count() << "\n# time "
      << describe(grid) << '\n';
  out << "vertex,time,value\n";
  const int ns = mesh.vertex_count();
  for (int j = 0; j < grid.count(); ++j) {
    for (int i = 0; i < ns; ++i) {
      out << i << ',' << j << ',' << num(u[static_cast<Index>(j) * ns + i]) << '\n';
    }
  }
  log << "wrote " << u.size() << " values to " << path.string() << '\n';
}

void cmd_forecast(const RunConfig& cfg, std::uint64_t seed, std::ostream& log) {
  ForecastSetup setup;
  setup.sigma = cfg.get_double("forecast.sigma", setup.sigma);
  setup.r_s = cfg.get_double("forecast.r_s", setup.r_s);
  setup.r_t = cfg.get_double("forecast.r_t", setup.r_t);
  setup.nonseparable_factor = cfg.get_double("forecast.nonseparable_factor", setup.nonseparable_factor);
  setup.noise_variance = cfg.get_double("observations.noise_variance", setup.noise_variance);
  setup.grid.margin = setup.r_s;
  if (cfg.has_section("mesh")) {
    if (cfg.has("mesh.file")) {
      throw InputError("forecast needs the structured mesh generator, not a mesh file");
    }
    StructuredGridSpec spec = setup.grid;
    spec.cells = cfg.get_int("mesh.cells", spec.cells);
    spec.lo = cfg.get_double("mesh.lo", spec.lo);
    spec.hi = cfg.get_double("mesh.hi", spec.hi);
    spec.margin = cfg.get_double("mesh.margin", spec.margin);
    setup.grid = spec;
  }
  setup.time_count = cfg.get_int("time.count", setup.time_count);
  setup.time_step = cfg.get_double("time.step", setup.time_step);
  setup.time_start = cfg.get_double("time.start", setup.time_start);
  setup.temporal_mass = temporal_mass_from_config(cfg);

  std::optional<std::vector<Observation>> data;
  if (cfg.has("observations.file")) {
    data = read_observations(cfg.get_path("observations.file"));
  } else if (!cfg.get_bool("observations.simulate", true)) {
    data = std::vector<Observation>{};
  }
  const ForecastResult r = run_forecast(setup, data, seed);

  const std::string prefix = cfg.get_string("output.prefix", "forecast");
  const int ns = r.mesh.vertex_count();
  for (const ForecastModel* m : {&r.separable, &r.nonseparable}) {
    const std::string tag = m->smoothness.separable() ? "separable" : "nonseparable";
    const auto resolved = cfg.resolve(prefix + "_" + tag + ".csv");
    std::ofstream out = open_output(resolved);
    out << "# command=forecast seed=" << seed << " observations=" << r.data.size()
        << " noise_variance=" << num(setup.noise_variance) << '\n';
    out << "# model=" << describe(m->smoothness, interpretable_to_scales(m->smoothness, m->params)) << '\n';
    out << "# mesh vertices=" << ns << " triangles=" << r.mesh.triangle_count() << "\n# time " << describe(r.grid)
        << '\n';
    out << "vertex,x,y,time,mean,sd\n";
    for (int j = 0; j < r.grid.count(); ++j) {
      for (int i = 0; i < ns; ++i) {
        const Index k = static_cast<Index>(j) * ns + i;
        out << i << ',' << num(r.mesh.vertices()[i][0]) << ',' << num(r.mesh.vertices()[i][1]) << ','
            << num(r.grid.time(j)) << ',' << num(m->mean[k]) << ',' << num(m->sd[k]) << '\n';
      }
    }
    log << "wrote " << tag << " forecast to " << resolved.string() << '\n';
  }
  const std::vector<int> region = region_vertices(setup.grid);
  log << "year-1 RMS difference of posterior means: "
      << num(rms_difference(r.separable.mean.head(ns), r.nonseparable.mean.head(ns), region)) << '\n';
  if (r.grid.count() > 1) {
    log << "year-2 high-pass energy: separable "
        << num(high_pass_energy(r.separable.mean.segment(ns, ns), r.spatial)) << ", nonseparable "
        << num(high_pass_energy(r.nonseparable.mean.segment(ns, ns), r.spatial)) << '\n';
  }
}

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
  const ModelSpec m = model_from_config(cfg);
  const Mesh2D mesh = mesh_from_config(cfg);
  const TimeGrid grid = time_grid_from_config(cfg);
  const std::vector<Observation> obs = read_observations(cfg.get_path("observations.file"));
  FitProblem problem{m.smoothness,
                     assemble_spatial(mesh),
                     temporal_matrices(grid, temporal_mass_from_config(cfg)),
                     project(mesh, grid, obs),
                     observation_values(obs),
                     cfg.get_double("observations.noise_variance", 0.01),
                     priors_from_config(cfg)};
  if (!(problem.noise_variance > 0.0)) {
    throw InputError("observations.noise_variance must be positive");
  }
  // Fail early on smoothness triples without a sparse discretisation.
  spacetime_precision(m.smoothness, m.scales, problem.spatial, problem.temporal);

  const InterpretableParams start = scales_to_interpretable(m.smoothness, m.scales);
  const InterpretableParams init(cfg.get_double("fit.init_sigma", start.sigma()),
                                 cfg.get_double("fit.init_r_s", start.r_s()),
                                 cfg.get_double("fit.init_r_t", start.r_t()));
  NelderMeadOptions options;
  options.max_evaluations = cfg.get_int("fit.budget", options.max_evaluations);
  const std::string space = cfg.get_string("fit.search", "log");
  if (space != "log" && space != "natural") {
    throw InputError("fit.search must be log or natural");
  }
  const FitResult fit = fit_map(problem, init, options, space == "log" ? SearchSpace::log : SearchSpace::natural);
  if (!fit.converged) {
    log << "warning: evaluation budget exhausted before convergence; reporting the best point found\n";
  }

  const auto path = output_path(cfg, "fit.txt");
  std::ofstream out = open_output(path);
  out << "# command=fit model=" << m.smoothness.to_string() << " observations=" << obs.size() << '\n';
  out << "sigma = " << num(fit.params.sigma()) << '\n';
  out << "r_s = " << num(fit.params.r_s()) << '\n';
  out << "r_t = " << num(fit.params.r_t()) << '\n';
  out << "log_posterior = " << num(fit.log_posterior) << '\n';
  out << "objective = " << num(fit.objective) << '\n';
  out << "evaluations = " << fit.evaluations << '\n';
  out << "converged = " << (fit.converged ? "true" : "false") << '\n';
  for (std::size_t k = 0; k < fit.trace.size(); ++k) {
    out << "trace." << k << " = " << num(fit.trace[k]) << '\n';
  }
  log << "MAP sigma=" << num(fit.params.sigma()) << " r_s=" << num(fit.params.r_s()) << " r_t=" << num(fit.params.r_t())
      << " after " << fit.evaluations << " evaluations; report in " << path.string() << '\n';
}

bool cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  const std::vector<ValidationCheck> checks = run_validation(cfg.get_bool("validate.perturb_gamma_e", false));
  std::ostringstream report;
  int passed = 0;
  for (const auto& c : checks) {
    report << "name=" << c.name << " measured=" << std::setprecision(6) << c.measured << " tolerance=" << c.tolerance
           << " pass=" << (c.pass ? "true" : "false") << '\n';
    passed += c.pass ? 1 : 0;
  }
  report << "name=summary passed=" << passed << " failed=" << checks.size() - passed << '\n';
  if (cfg.has("output.file")) {
    std::ofstream file = open_output(cfg.get_path("output.file"));
    file << report.str();
    log << "validation report written to " << cfg.get_path("output.file").string() << '\n';
  } else {
    out << report.str();
  }
  return passed == static_cast<int>(checks.size());
}

int run_subcommand(const std::string& name, const std::string& config_path, std::optional<std::uint64_t> seed,
                   std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = RunConfig::from_file(config_path);
    const std::uint64_t run_seed = seed ? *seed : cfg.get_seed(1);
    if (name == "covariance") {
      cmd_covariance(cfg, err);
    } else if (name == "simulate") {
      cmd_simulate(cfg, run_seed, err);
    } else if (name == "forecast") {
      cmd_forecast(cfg, run_seed, err);
    } else if (name == "fit") {
      cmd_fit(cfg, err);
    } else if (name == "validate") {
      cmd_validate(cfg, out, err);
    } else {
      err << "error: unknown subcommand '" << name << "'\n";
      return 1;
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const boost::property_tree::ptree_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace demf
