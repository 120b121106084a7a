#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "demf/config.hpp"
#include "demf/fem.hpp"
#include "demf/mesh.hpp"
#include "demf/params.hpp"
#include "demf/solver.hpp"

namespace demf {

/// Desk-scale version of the forecasting experiment: year-1 data on a square
/// region, predictions for years 1..count from a separable DEMF(1,0,2) and a
/// diffusion DEMF(1,2,1) with identical spatial marginals and the latter's
/// temporal range stretched by `nonseparable_factor`.
struct ForecastSetup {
  double sigma = 1.0;
  double r_s = 2.5;
  double r_t = 4.0;
  double nonseparable_factor = 1.8;
  double noise_variance = 0.01;
  StructuredGridSpec grid{20, 0.0, 20.0, 2.5, DiagonalPattern::alternating};
  int time_count = 3;
  double time_step = 1.0;
  double time_start = 1.0;
  TemporalMass temporal_mass = TemporalMass::lumped;
};

struct ForecastModel {
  SmoothnessParams smoothness;
  InterpretableParams params;
  Eigen::VectorXd mean;  // index j * N_s + i
  Eigen::VectorXd sd;
};

struct ForecastResult {
  Mesh2D mesh;
  TimeGrid grid;
  SpatialFem spatial;
  std::vector<Observation> data;
  ForecastModel separable;
  ForecastModel nonseparable;
};

/// Year-1 data: a Matern(nu = 1) field with the setup's sigma and r_s sampled on
/// the mesh, observed at every vertex of the region [lo, hi]^2 at the first time
/// with Gaussian noise of variance noise_variance.
std::vector<Observation> simulate_year_one(const ForecastSetup& setup, const Mesh2D& mesh, std::uint64_t seed);

/// Conditions both models on `data` (simulated when absent).
ForecastResult run_forecast(const ForecastSetup& setup, const std::optional<std::vector<Observation>>& data,
                            std::uint64_t seed);

/// mu^T G mu / mu^T C~ mu for one spatial slice.
double high_pass_energy(const Eigen::VectorXd& slice, const SpatialFem& spatial);

/// Root mean square difference of two fields over the given vertices.
double rms_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<int>& vertices);

/// Vertices of a structured mesh lying in the region [lo, hi]^2.
std::vector<int> region_vertices(const StructuredGridSpec& spec);

struct ValidationCheck {
  std::string name;
  double measured;
  double tolerance;
  bool pass;
};

/// Cross-module oracle checks. `perturb_gamma_e` double-counts gamma_e^2 in the
/// GMRF precision (negative control for the variance check).
std::vector<ValidationCheck> run_validation(bool perturb_gamma_e);

/// Subcommands. Each reads its blocks from the config and writes the files named
/// in [output]; progress and warnings go to `log`.
void cmd_covariance(const RunConfig& cfg, std::ostream& log);
void cmd_simulate(const RunConfig& cfg, std::uint64_t seed, std::ostream& log);
void cmd_forecast(const RunConfig& cfg, std::uint64_t seed, std::ostream& log);
void cmd_fit(const RunConfig& cfg, std::ostream& log);
/// Writes the report to [output] file when given, otherwise to `out`. Returns
/// true when every check passes.
bool cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Dispatches a subcommand by name. Returns the process exit code: 0 on success,
/// 1 on usage or input errors, 2 on numerical failures.
int run_subcommand(const std::string& name, const std::string& config_path, std::optional<std::uint64_t> seed,
                   std::ostream& out, std::ostream& err);

}  // namespace demf
