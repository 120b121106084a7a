#pragma once

#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "demf/fem.hpp"
#include "demf/mesh.hpp"
#include "demf/params.hpp"
#include "demf/priors.hpp"
#include "demf/solver.hpp"

namespace demf {

/// INI-style run configuration ("key = value" lines under [section] headers).
/// Relative file paths are resolved against the directory of the config file.
class RunConfig {
 public:
  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text, std::filesystem::path base_dir = ".");

  bool has(const std::string& key) const;
  bool has_section(const std::string& section) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_seed(std::uint64_t fallback) const;
  /// get_string() resolved against the config directory.
  std::filesystem::path get_path(const std::string& key) const;
  /// A relative path resolved against the config directory.
  std::filesystem::path resolve(const std::filesystem::path& p) const;

 private:
  boost::property_tree::ptree tree_;
  std::filesystem::path base_dir_;
};

struct ModelSpec {
  SmoothnessParams smoothness;
  ScaleParams scales;
};

/// [model]: alpha_t, alpha_s, alpha_e and exactly one of {gamma_t, gamma_s, gamma_e}
/// or {sigma, r_s, r_t}. Alternatively `preset = separable | diffusion | nonseparable`
/// selects the standardised examples (sigma = 1, r_s = 1, r_t = 1, 1.9, 1.8).
ModelSpec model_from_config(const RunConfig& cfg);

/// [mesh]: `file = path` or the structured generator keys cells, lo, hi, margin,
/// pattern (alternating | uniform).
Mesh2D mesh_from_config(const RunConfig& cfg);
/// Structured generator settings, or nullopt when [mesh] names a file.
std::optional<StructuredGridSpec> grid_spec_from_config(const RunConfig& cfg);

/// [time]: count, step, start.
TimeGrid time_grid_from_config(const RunConfig& cfg);
/// [time] mass = lumped (default) | consistent.
TemporalMass temporal_mass_from_config(const RunConfig& cfg);

/// [priors]: lambda_e, lambda_s, lambda_t, or the elicitation keys sigma0, p_sigma,
/// r0, p_r, t0, p_t with optional r_t_tail = lower | upper.
PcRates priors_from_config(const RunConfig& cfg);

/// CSV with columns x, y, t, value. A header line and '#' comment lines are
/// allowed. Parse errors name the line number.
std::vector<Observation> read_observations(const std::filesystem::path& path);

}  // namespace demf
