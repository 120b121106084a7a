#include "demf/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <cmath>
#include <fstream>
#include <sstream>

#include "demf/errors.hpp"

namespace demf {

namespace pt = boost::property_tree;

namespace {

// Values may carry trailing comments after ';' or '#'.
std::string clean_value(std::string v) {
  const auto cut = v.find_first_of(";#");
  if (cut != std::string::npos) {
    v.erase(cut);
  }
  boost::algorithm::trim(v);
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::logic_error&) {
    throw InputError("config key '" + key + "' is not a number: '" + text + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open config file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), std::filesystem::path(path).parent_path());
}

RunConfig RunConfig::from_string(const std::string& text, std::filesystem::path base_dir) {
  RunConfig cfg;
  std::istringstream in(text);
  try {
    pt::read_ini(in, cfg.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  cfg.base_dir_ = base_dir.empty() ? std::filesystem::path(".") : std::move(base_dir);
  return cfg;
}

bool RunConfig::has(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  return v && !clean_value(*v).empty();
}

bool RunConfig::has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

std::string RunConfig::get_string(const std::string& key) const {
  if (!has(key)) {
    throw InputError("missing config key '" + key + "'");
  }
  return clean_value(tree_.get<std::string>(key));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double RunConfig::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double RunConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) {
    return fallback;
  }
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    throw InputError("config key '" + key + "' must be an integer");
  }
  return static_cast<int>(v);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) {
    return fallback;
  }
  const std::string v = boost::algorithm::to_lower_copy(get_string(key));
  if (v == "true" || v == "yes" || v == "1" || v == "on") {
    return true;
  }
  if (v == "false" || v == "no" || v == "0" || v == "off") {
    return false;
  }
  throw InputError("config key '" + key + "' must be true or false");
}

std::uint64_t RunConfig::get_seed(std::uint64_t fallback) const {
  if (!has("run.seed")) {
    return fallback;
  }
  const std::string text = get_string("run.seed");
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size() || text.front() == '-') {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::logic_error&) {
    throw InputError("run.seed must be an unsigned 64-bit integer, got '" + text + "'");
  }
}

std::filesystem::path RunConfig::get_path(const std::string& key) const { return resolve(get_string(key)); }

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  return p.is_absolute() ? p : base_dir_ / p;
}

ModelSpec model_from_config(const RunConfig& cfg) {
  if (cfg.has("model.preset")) {
    const std::string preset = cfg.get_string("model.preset");
    auto make = [](double at, double as, double ae, double r_t) {
      const SmoothnessParams sp(at, as, ae);
      return ModelSpec{sp, interpretable_to_scales(sp, InterpretableParams(1.0, 1.0, r_t))};
    };
    if (preset == "separable") {
      return make(1.0, 0.0, 2.0, 1.0);
    }
    if (preset == "diffusion") {
      return make(1.0, 2.0, 1.0, 1.9);
    }
    if (preset == "nonseparable") {
      return make(1.5, 2.0, 0.0, 1.8);
    }
    throw InputError("unknown model preset '" + preset + "' (separable, diffusion, nonseparable)");
  }
  const SmoothnessParams sp(cfg.get_double("model.alpha_t"), cfg.get_double("model.alpha_s"),
                            cfg.get_double("model.alpha_e"));
  const bool raw = cfg.has("model.gamma_t") || cfg.has("model.gamma_s") || cfg.has("model.gamma_e");
  const bool interp = cfg.has("model.sigma") || cfg.has("model.r_s") || cfg.has("model.r_t");
  if (raw == interp) {
    throw InputError("[model] needs exactly one of {gamma_t, gamma_s, gamma_e} or {sigma, r_s, r_t}");
  }
  if (raw) {
    return {sp, ScaleParams(cfg.get_double("model.gamma_t"), cfg.get_double("model.gamma_s"),
                            cfg.get_double("model.gamma_e"))};
  }
  const InterpretableParams ip(cfg.get_double("model.sigma"), cfg.get_double("model.r_s"), cfg.get_double("model.r_t"));
  return {sp, interpretable_to_scales(sp, ip)};
}

std::optional<StructuredGridSpec> grid_spec_from_config(const RunConfig& cfg) {
  if (cfg.has("mesh.file")) {
    return std::nullopt;
  }
  StructuredGridSpec spec;
  spec.cells = cfg.get_int("mesh.cells", spec.cells);
  spec.lo = cfg.get_double("mesh.lo", spec.lo);
  spec.hi = cfg.get_double("mesh.hi", spec.hi);
  spec.margin = cfg.get_double("mesh.margin", spec.margin);
  const std::string pattern = cfg.get_string("mesh.pattern", "alternating");
  if (pattern == "alternating") {
    spec.pattern = DiagonalPattern::alternating;
  } else if (pattern == "uniform") {
    spec.pattern = DiagonalPattern::uniform;
  } else {
    throw InputError("mesh.pattern must be alternating or uniform");
  }
  return spec;
}

Mesh2D mesh_from_config(const RunConfig& cfg) {
  if (cfg.has("mesh.file")) {
    return read_mesh_file(cfg.get_path("mesh.file").string());
  }
  return structured_grid(*grid_spec_from_config(cfg));
}

TimeGrid time_grid_from_config(const RunConfig& cfg) {
  return TimeGrid(cfg.get_int("time.count", 10), cfg.get_double("time.step", 1.0), cfg.get_double("time.start", 0.0));
}

TemporalMass temporal_mass_from_config(const RunConfig& cfg) {
  const std::string mass = cfg.get_string("time.mass", "lumped");
  if (mass == "lumped") {
    return TemporalMass::lumped;
  }
  if (mass == "consistent") {
    return TemporalMass::consistent;
  }
  throw InputError("time.mass must be lumped or consistent");
}

PcRates priors_from_config(const RunConfig& cfg) {
  if (cfg.has("priors.lambda_e") || cfg.has("priors.lambda_s") || cfg.has("priors.lambda_t")) {
    PcRates r{cfg.get_double("priors.lambda_e"), cfg.get_double("priors.lambda_s"), cfg.get_double("priors.lambda_t")};
    r.validate();
    return r;
  }
  PcElicitation e{cfg.get_double("priors.sigma0", 1.0), cfg.get_double("priors.p_sigma", 0.05),
                  cfg.get_double("priors.r0", 1.0),     cfg.get_double("priors.p_r", 0.05),
                  cfg.get_double("priors.t0", 1.0),     cfg.get_double("priors.p_t", 0.05)};
  const std::string tail = cfg.get_string("priors.r_t_tail", "lower");
  if (tail == "upper") {
    e.r_t_tail = TailConvention::upper;
  } else if (tail != "lower") {
    throw InputError("priors.r_t_tail must be lower or upper");
  }
  return elicit_rates(e);
}

std::vector<Observation> read_observations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open observation file " + path.string());
  }
  std::vector<Observation> out;
  std::string line;
  int line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    boost::algorithm::trim(line);
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::vector<std::string> fields;
    boost::algorithm::split(fields, line, boost::is_any_of(","));
    for (auto& f : fields) {
      boost::algorithm::trim(f);
    }
    if (header_allowed && !fields.empty() && fields[0] == "x") {
      if (fields.size() != 4 || fields[1] != "y" || fields[2] != "t" || fields[3] != "value") {
        throw InputError(path.string() + " line " + std::to_string(line_no) + ": header must be x,y,t,value");
      }
      header_allowed = false;
      continue;
    }
    header_allowed = false;
    if (fields.size() != 4) {
      throw InputError(path.string() + " line " + std::to_string(line_no) + ": expected 4 columns, got " +
                       std::to_string(fields.size()));
    }
    double v[4];
    for (int k = 0; k < 4; ++k) {
      try {
        std::size_t used = 0;
        v[k] = std::stod(fields[k], &used);
        if (used != fields[k].size() || !std::isfinite(v[k])) {
          throw std::invalid_argument(fields[k]);
        }
      } catch (const std::logic_error&) {
        throw InputError(path.string() + " line " + std::to_string(line_no) + ": cannot parse '" + fields[k] + "'");
      }
    }
    out.push_back({v[0], v[1], v[2], v[3]});
  }
  return out;
}

}  // namespace demf
