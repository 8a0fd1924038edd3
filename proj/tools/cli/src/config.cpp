#include <fstream>

#include "factorcov_cli/cli.hpp"
#include "json.hpp"

namespace factorcov::cli {
namespace {

using nlohmann::json;

SigmaStructure parse_sigma(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "banded") {
    Banded b;
    b.bandwidth = j.value("bandwidth", b.bandwidth);
    b.decay = j.value("decay", b.decay);
    return b;
  }
  if (type == "block") {
    BlockDiagonal b;
    b.block_size = j.value("block_size", b.block_size);
    b.within_corr = j.value("within_corr", b.within_corr);
    return b;
  }
  if (type == "random_sparse") {
    RandomSparse r;
    r.q = j.value("q", r.q);
    r.m_p_target = j.value("m_p_target", r.m_p_target);
    r.seed = j.value("seed", r.seed);
    return r;
  }
  throw InputError("sigma_u.type must be banded, block or random_sparse, got '" + type + "'");
}

NoiseDistribution parse_noise(const std::string& s) {
  if (s == "gaussian") return NoiseDistribution::kGaussian;
  if (s == "uniform") return NoiseDistribution::kScaledUniform;
  throw InputError("noise must be gaussian or uniform, got '" + s + "'");
}

}  // namespace

void apply_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  if (!j.is_object()) throw InputError(path + ": config must be a JSON object");

  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "input") c.input_path = v.get<std::string>();
      else if (key == "output") c.output_path = v.get<std::string>();
      else if (key == "k") c.k = v.get<std::size_t>();
      else if (key == "rule") c.rule = v.get<std::string>();
      else if (key == "c0") c.c0 = v.get<double>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "folds") c.folds = v.get<std::size_t>();
      else if (key == "cv_grid") c.cv_grid = v.get<std::vector<double>>();
      else if (key == "c") c.fixed_c = v.get<double>();
      else if (key == "demean") c.demean = v.get<bool>();
      else if (key == "transpose") c.transpose = v.get<bool>();
      else if (key == "eigen_floor") c.eigen_floor = v.get<bool>();
      else if (key == "p") c.dgp.p = v.get<std::size_t>();
      else if (key == "n") c.dgp.n = v.get<std::size_t>();
      else if (key == "loading_lo") c.dgp.loading_lo = v.get<double>();
      else if (key == "loading_hi") c.dgp.loading_hi = v.get<double>();
      else if (key == "factor_cov") c.dgp.factor_cov = v.get<std::vector<double>>();
      else if (key == "sigma_u") c.dgp.sigma_u = parse_sigma(v);
      else if (key == "noise") c.dgp.noise = parse_noise(v.get<std::string>());
      else if (key == "reps") c.reps = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "threads") c.threads = v.get<std::size_t>();
      else if (key == "axis") c.axis = v.get<std::string>();
      else if (key == "grid") c.grid = v.get<std::vector<std::size_t>>();
      else throw InputError(path + ": unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

ThresholdRule threshold_rule(const RunConfig& c) {
  ThresholdRule rule;
  if (c.rule == "plugin") {
    rule = PlugInRule{c.c0, c.alpha};
  } else if (c.rule == "cv") {
    rule = CrossValidationRule{c.folds, c.cv_grid};
  } else if (c.rule == "fixed") {
    rule = FixedConstantRule{c.fixed_c};
  } else {
    throw InputError("rule must be plugin, cv or fixed, got '" + c.rule + "'");
  }
  validate(rule);
  return rule;
}

}  // namespace factorcov::cli
