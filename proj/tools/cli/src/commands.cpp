#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "factorcov/factor_pc.hpp"
#include "factorcov/identification.hpp"
#include "report.hpp"

namespace factorcov::cli {
namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = std::make_shared<spdlog::logger>("factorcov",
                                              std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("factorcov: %l: %v");
    const char* env = std::getenv("FACTORCOV_LOG");
    const std::string level = env ? env : "info";
    if (level == "quiet") {
      l->set_level(spdlog::level::off);
    } else if (level == "debug") {
      l->set_level(spdlog::level::debug);
    } else {
      l->set_level(spdlog::level::info);
    }
    return l;
  }();
  return log;
}

std::string format_fit(const SlopeFit& f) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.4f (se %.4f)", f.slope, f.standard_error);
  return buf;
}

DGPSpec simulation_spec(const RunConfig& c) {
  DGPSpec spec = c.dgp;
  spec.k = c.k;
  spec.seed = c.seed;
  return spec;
}

ExperimentOptions experiment_options(const RunConfig& c) {
  ExperimentOptions o;
  o.c0 = c.c0;
  o.alpha = c.alpha;
  o.threads = c.threads;
  return o;
}

void require_output(const RunConfig& c) {
  if (c.output_path.empty()) throw InputError("--output is required");
}

}  // namespace

int run_estimate(const RunConfig& c, std::ostream& out) {
  if (!c.input_path) throw InputError("--input is required for estimate");
  require_output(c);
  const ThresholdRule rule = threshold_rule(c);

  CsvMatrix csv = read_matrix_csv(*c.input_path);
  Matrix values = c.transpose ? transpose(csv.values) : std::move(csv.values);
  if (values.rows() < 2 || values.cols() < 2) {
    throw InputError(*c.input_path + ": need at least 2 variables and 2 observations, got " +
                     std::to_string(values.rows()) + " x " + std::to_string(values.cols()));
  }
  DataMatrix y(std::move(values));
  if (c.demean) y = demean_rows(y);
  if (c.k >= std::min(y.p(), y.n())) {
    throw InputError("k = " + std::to_string(c.k) + " must be below min(p, n) = " +
                     std::to_string(std::min(y.p(), y.n())));
  }
  logger()->debug("estimate: p = {}, n = {}, k = {}, rule = {}", y.p(), y.n(), c.k, c.rule);

  EstimateOptions opts;
  opts.eigen_floor = c.eigen_floor;
  const CovarianceEstimate est = estimate_covariance(y, c.k, rule, opts);
  for (const auto& w : est.guard_flags) logger()->warn("{}", w);

  write_matrix_csv(c.output_path, est.sigma_u_hat.matrix());
  json side = {{"rule", rule_name(rule)},
               {"c0", c.c0},
               {"alpha", c.alpha},
               {"threshold_constant", est.threshold_constant},
               {"k", c.k},
               {"p", y.p()},
               {"n", y.n()},
               {"demean", c.demean},
               {"transpose", c.transpose},
               {"zero_fraction", est.zero_fraction},
               {"min_eigenvalue", est.min_eigenvalue},
               {"warnings", est.guard_flags}};
  if (c.rule == "cv") {
    side["folds"] = c.folds;
    side["cv_grid"] = c.cv_grid;
  }
  write_json(sidecar_path(c.output_path), side);
  out << "wrote " << y.p() << " x " << y.p() << " estimate to " << c.output_path
      << " (zero fraction " << est.zero_fraction << ")\n";
  return kExitOk;
}

int run_experiment(const RunConfig& c, std::ostream& out) {
  require_output(c);
  const std::string csv_path = points_csv_path(c.output_path);

  if (c.command == Command::kIdentify) {
    const std::vector<std::size_t> grid =
        c.grid.empty() ? std::vector<std::size_t>{50, 100, 200, 400} : c.grid;
    const auto sweep = identification_sweep(grid, c.k, c.seed);
    write_json(c.output_path, to_json(sweep));
    write_points_csv(csv_path, sweep);
    for (const auto& pt : sweep.points) out << "p = " << pt.p << ": " << pt.max_norm_error << '\n';
    out << "max_norm_error slope " << format_fit(sweep.slope) << '\n';
    return kExitOk;
  }

  const DGPSpec spec = simulation_spec(c);
  ExperimentReport report;
  if (c.command == Command::kCoverage) {
    report = coverage_experiment(spec, c.reps, experiment_options(c));
  } else {
    RateAxis axis;
    if (c.axis == "n") {
      axis = RateAxis::kVaryN;
    } else if (c.axis == "p") {
      axis = RateAxis::kVaryP;
    } else {
      throw InputError("axis must be n or p, got '" + c.axis + "'");
    }
    std::vector<std::size_t> grid = c.grid;
    if (grid.empty()) {
      grid = axis == RateAxis::kVaryN ? std::vector<std::size_t>{100, 200, 400, 800}
                                      : std::vector<std::size_t>{50, 100, 200, 400};
    }
    report = rate_experiment(spec, axis, grid, c.reps, experiment_options(c));
  }
  for (const auto& w : report.warnings) logger()->warn("{}", w);
  write_json(c.output_path, to_json(report));
  write_points_csv(csv_path, report);

  for (const auto& pt : report.points) {
    out << "p = " << pt.p << ", n = " << pt.n << ": coverage frequency " << pt.coverage_frequency
        << " (se " << pt.coverage_standard_error << "), mean max error " << pt.max_error.mean
        << '\n';
  }
  for (const auto& [name, fit] : report.fitted_slopes) {
    out << name << " slope " << format_fit(fit) << '\n';
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse idiosyncratic covariance estimation in factor models", "factorcov"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());

  std::optional<std::string> config_path, input, output, rule, axis, noise;
  std::optional<std::size_t> k, folds, p, n, reps, threads;
  std::optional<double> c0, alpha, fixed_c;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> cv_grid;
  std::optional<std::vector<std::size_t>> grid;
  bool demean = false, transpose = false, eigen_floor = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override its values");
    sub->add_option("--output", output, "Output path");
    sub->add_option("--k", k, "Number of factors");
    sub->add_option("--c0", c0, "Plug-in threshold constant");
    sub->add_option("--alpha", alpha, "Plug-in significance level");
  };
  auto* estimate = app.add_subcommand("estimate", "Estimate Sigma_u from a p x n CSV");
  common(estimate);
  estimate->add_option("--input", input, "Input CSV, one row per variable");
  estimate->add_option("--rule", rule, "plugin | cv | fixed");
  estimate->add_option("--folds", folds, "Cross-validation folds");
  estimate->add_option("--cv-grid", cv_grid, "Cross-validation constants")->delimiter(',');
  estimate->add_option("--c", fixed_c, "Constant of the fixed rule");
  estimate->add_flag("--demean", demean, "Subtract row means first");
  estimate->add_flag("--transpose", transpose, "Input has one row per observation");
  estimate->add_flag("--eigen-floor", eigen_floor, "Floor small eigenvalues of the estimate");

  std::vector<CLI::App*> experiments;
  for (const char* name : {"coverage", "rate", "identify"}) {
    auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    common(sub);
    sub->add_option("--threads", threads, "Worker threads");
    sub->add_option("--seed", seed, "Root seed");
    sub->add_option("--reps", reps, "Replications per grid point");
    sub->add_option("--p", p, "Number of variables");
    sub->add_option("--n", n, "Number of observations");
    sub->add_option("--noise", noise, "gaussian | uniform");
    sub->add_option("--grid", grid, "Grid of n or p values")->delimiter(',');
    experiments.push_back(sub);
  }
  experiments[1]->add_option("--axis", axis, "n | p");

  std::vector<const char*> argv{"factorcov"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (estimate->parsed()) {
      cfg.command = Command::kEstimate;
    } else if (experiments[0]->parsed()) {
      cfg.command = Command::kCoverage;
    } else if (experiments[1]->parsed()) {
      cfg.command = Command::kRate;
    } else {
      cfg.command = Command::kIdentify;
    }
    if (config_path) apply_config_file(*config_path, cfg);
    if (input) cfg.input_path = *input;
    if (output) cfg.output_path = *output;
    if (k) cfg.k = *k;
    if (c0) cfg.c0 = *c0;
    if (alpha) cfg.alpha = *alpha;
    if (rule) cfg.rule = *rule;
    if (folds) cfg.folds = *folds;
    if (cv_grid) cfg.cv_grid = *cv_grid;
    if (fixed_c) cfg.fixed_c = *fixed_c;
    if (demean) cfg.demean = true;
    if (transpose) cfg.transpose = true;
    if (eigen_floor) cfg.eigen_floor = true;
    if (threads) cfg.threads = *threads;
    if (seed) cfg.seed = *seed;
    if (reps) cfg.reps = *reps;
    if (p) cfg.dgp.p = *p;
    if (n) cfg.dgp.n = *n;
    if (noise) {
      if (*noise == "gaussian") {
        cfg.dgp.noise = NoiseDistribution::kGaussian;
      } else if (*noise == "uniform") {
        cfg.dgp.noise = NoiseDistribution::kScaledUniform;
      } else {
        throw InputError("noise must be gaussian or uniform, got '" + *noise + "'");
      }
    }
    if (axis) cfg.axis = *axis;
    if (grid) cfg.grid = *grid;
    if (cfg.threads == 0) throw InputError("--threads must be at least 1");

    return cfg.command == Command::kEstimate ? run_estimate(cfg, out) : run_experiment(cfg, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUserError;
  } catch (const std::invalid_argument& e) {  // ArgumentError, DimensionError
    err << "error: " << e.what() << '\n';
    return kExitUserError;
  } catch (const ReplicationError& e) {
    err << "error: " << e.what() << " (replication seed " << e.seed() << ")\n";
    return kExitNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumericError;
  }
}

}  // namespace factorcov::cli
