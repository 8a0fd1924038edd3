#include "factorcov/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <set>
#include <thread>

namespace factorcov {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SymmetricMatrix factor_covariance(const DGPSpec& spec) {
  if (spec.factor_cov.empty()) return SymmetricMatrix::identity(std::max<std::size_t>(spec.k, 1));
  Matrix m(spec.k, spec.k);
  std::copy(spec.factor_cov.begin(), spec.factor_cov.end(), m.data().begin());
  return SymmetricMatrix::from_upper(m);
}

SymmetricMatrix random_sparse(std::size_t p, const RandomSparse& s) {
  constexpr double kMaxOffDiagonalRowSum = 0.9;
  SymmetricMatrix sigma = SymmetricMatrix::identity(p);
  std::vector<double> budget(p, s.m_p_target - 1.0);
  std::vector<double> abs_sum(p, 0.0);
  std::mt19937_64 rng(s.seed);
  std::uniform_int_distribution<std::size_t> pick(0, p - 1);
  std::uniform_real_distribution<double> magnitude(0.1, 0.3);
  std::bernoulli_distribution negative(0.5);

  const std::size_t attempts = 20 * p;
  for (std::size_t t = 0; t < attempts; ++t) {
    const std::size_t j = pick(rng);
    const std::size_t l = pick(rng);
    const double v = magnitude(rng);
    const bool neg = negative(rng);
    if (j == l || sigma(j, l) != 0.0) continue;
    const double cost = s.q == 0.0 ? 1.0 : std::pow(v, s.q);
    const bool fits = budget[j] >= cost && budget[l] >= cost &&
                      abs_sum[j] + v < kMaxOffDiagonalRowSum &&
                      abs_sum[l] + v < kMaxOffDiagonalRowSum;
    if (!fits) continue;
    sigma.set(j, l, neg ? -v : v);
    budget[j] -= cost;
    budget[l] -= cost;
    abs_sum[j] += v;
    abs_sum[l] += v;
  }
  return sigma;
}

SummaryStat summarize(const std::vector<double>& xs) {
  SummaryStat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct ReplicationOutcome {
  double max_error = 0.0;
  double operator_error = 0.0;
  double frobenius_error = 0.0;
  double residual_term = 0.0;
  double zero_fraction = 0.0;
  bool exceeded = false;
};

ReplicationOutcome run_replication(const DGPSpec& spec, const SymmetricMatrix& sigma,
                                   const Matrix& sigma_factor, const ExperimentOptions& opt) {
  const auto panel = simulate(spec, sigma_factor);
  const auto fit = fit_pc(panel.y, spec.k);
  const auto s = residual_sample_covariance(fit);
  const Matrix mu = plugin_thresholds(fit.residuals, opt.c0, opt.alpha);
  const std::size_t p = spec.p;

  ReplicationOutcome out;
  for (std::size_t j = 0; j < p && !out.exceeded; ++j) {
    for (std::size_t l = 0; l < p; ++l) {
      const double bound =
          std::isinf(mu(j, l)) ? mu(j, l) : opt.threshold_scale * mu(j, l);
      if (std::abs(s(j, l) - sigma(j, l)) > bound) {
        out.exceeded = true;
        break;
      }
    }
  }

  const auto estimate = soft_threshold(s, mu);
  const auto diff = subtract(estimate, sigma);
  out.max_error = max_norm(diff);
  out.operator_error = operator_norm(diff);
  out.frobenius_error = frobenius_norm(diff);
  out.residual_term = residual_term_error(fit, panel.residuals);

  std::size_t zeros = 0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = j + 1; l < p; ++l) {
      if (estimate(j, l) == 0.0) ++zeros;
    }
  }
  out.zero_fraction =
      static_cast<double>(zeros) / (static_cast<double>(p) * static_cast<double>(p - 1) / 2.0);
  return out;
}

// Runs replications 0..reps-1 on a pool of workers. Outcomes are stored by
// index, so the caller's reduction is independent of the schedule.
std::vector<ReplicationOutcome> run_replications(const DGPSpec& spec, std::size_t reps,
                                                 const ExperimentOptions& opt) {
  const auto generated = generate_sigma_u(spec);
  const Matrix factor = cholesky(generated.sigma);
  std::vector<ReplicationOutcome> outcomes(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < reps; r = next++) {
      DGPSpec rep_spec = spec;
      rep_spec.seed = replication_seed(spec.seed, r);
      try {
        outcomes[r] = run_replication(rep_spec, generated.sigma, factor, opt);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(opt.threads, 1, std::max<std::size_t>(reps, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t r = 0; r < reps; ++r) {
    if (!errors[r]) continue;
    const auto seed = replication_seed(spec.seed, r);
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      throw ReplicationError(std::string("replication ") + std::to_string(r) + " (p=" +
                                 std::to_string(spec.p) + ", n=" + std::to_string(spec.n) +
                                 ") failed: " + e.what(),
                             seed);
    }
  }
  return outcomes;
}

GridPointReport aggregate(const DGPSpec& spec, const std::vector<ReplicationOutcome>& outcomes,
                          bool inflated) {
  GridPointReport point;
  point.p = spec.p;
  point.n = spec.n;
  point.seed = spec.seed;
  point.replications = outcomes.size();
  point.sigma_inflated = inflated;

  std::vector<double> max_e, op_e, fro_e, resid, zeros;
  std::size_t exceed = 0;
  for (const auto& o : outcomes) {
    max_e.push_back(o.max_error);
    op_e.push_back(o.operator_error);
    fro_e.push_back(o.frobenius_error);
    resid.push_back(o.residual_term);
    zeros.push_back(o.zero_fraction);
    if (o.exceeded) ++exceed;
  }
  point.max_error = summarize(max_e);
  point.operator_error = summarize(op_e);
  point.frobenius_error = summarize(fro_e);
  point.residual_term = summarize(resid);
  point.zero_fraction = summarize(zeros);
  const double reps = static_cast<double>(outcomes.size());
  point.coverage_frequency = static_cast<double>(exceed) / reps;
  point.coverage_standard_error =
      std::sqrt(point.coverage_frequency * (1.0 - point.coverage_frequency) / reps);
  return point;
}

void validate_options(const ExperimentOptions& opt) {
  validate(ThresholdRule{PlugInRule{opt.c0, opt.alpha}});
  if (!(opt.threshold_scale >= 0.0)) {
    throw ArgumentError("threshold_scale must be nonnegative");
  }
}

void append_regime_warnings(const DGPSpec& spec, std::vector<std::string>& warnings) {
  for (const auto& w : regime_guards(spec.p, spec.n)) {
    warnings.push_back("p=" + std::to_string(spec.p) + ", n=" + std::to_string(spec.n) + ": " + w);
  }
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t root, std::size_t replication) {
  return splitmix64(root + (static_cast<std::uint64_t>(replication) + 1) * 0x9E3779B97F4A7C15ULL);
}

void validate(const DGPSpec& spec) {
  if (spec.p < 2 || spec.n < 2) throw ArgumentError("DGPSpec: need p >= 2 and n >= 2");
  if (spec.k >= std::min(spec.p, spec.n)) {
    throw ArgumentError("DGPSpec: k must be below min(p, n)");
  }
  if (!std::isfinite(spec.loading_lo) || !std::isfinite(spec.loading_hi) ||
      spec.loading_lo > spec.loading_hi) {
    throw ArgumentError("DGPSpec: loading bounds must be finite with lo <= hi");
  }
  if (!spec.factor_cov.empty()) {
    if (spec.factor_cov.size() != spec.k * spec.k) {
      throw ArgumentError("DGPSpec: factor_cov must hold k*k entries");
    }
    const auto eig = sym_eigen(factor_covariance(spec));
    if (!(eig.values.back() > 0.0)) {
      throw ArgumentError("DGPSpec: factor_cov must be positive definite");
    }
  }
  std::visit(overloaded{
                 [](const Banded& b) {
                   if (!std::isfinite(b.decay)) throw ArgumentError("Banded: decay must be finite");
                 },
                 [](const BlockDiagonal& b) {
                   if (b.block_size < 1) throw ArgumentError("BlockDiagonal: block_size >= 1");
                   if (!(b.within_corr > -1.0 && b.within_corr < 1.0)) {
                     throw ArgumentError("BlockDiagonal: within_corr must lie in (-1, 1)");
                   }
                 },
                 [](const RandomSparse& r) {
                   if (!(r.q >= 0.0 && r.q < 1.0)) throw ArgumentError("RandomSparse: q in [0, 1)");
                   if (!(r.m_p_target >= 1.0)) {
                     throw ArgumentError("RandomSparse: m_p_target must be >= 1");
                   }
                 },
             },
             spec.sigma_u);
}

GeneratedSigma generate_sigma_u(const DGPSpec& spec) {
  validate(spec);
  const std::size_t p = spec.p;
  SymmetricMatrix sigma = std::visit(
      overloaded{
          [p](const Banded& b) {
            SymmetricMatrix s = SymmetricMatrix::identity(p);
            for (std::size_t j = 0; j < p; ++j) {
              for (std::size_t d = 1; d <= b.bandwidth && j + d < p; ++d) {
                s.set(j, j + d, std::pow(b.decay, static_cast<double>(d)));
              }
            }
            return s;
          },
          [p](const BlockDiagonal& b) {
            SymmetricMatrix s = SymmetricMatrix::identity(p);
            for (std::size_t start = 0; start < p; start += b.block_size) {
              const std::size_t end = std::min(p, start + b.block_size);
              for (std::size_t j = start; j < end; ++j) {
                for (std::size_t l = j + 1; l < end; ++l) s.set(j, l, b.within_corr);
              }
            }
            return s;
          },
          [p](const RandomSparse& r) { return random_sparse(p, r); },
      },
      spec.sigma_u);

  GeneratedSigma out{std::move(sigma), false};
  const double min_eig = sym_eigen(out.sigma).values.back();
  if (min_eig <= 1e-8) {
    const double bump = (1e-8 - min_eig) + 1e-6;
    for (std::size_t j = 0; j < p; ++j) out.sigma.set(j, j, out.sigma(j, j) + bump);
    out.inflated = true;
  }
  return out;
}

double sparsity_measure(const SymmetricMatrix& sigma, double q) {
  double worst = 0.0;
  for (std::size_t j = 0; j < sigma.dim(); ++j) {
    double row = 0.0;
    for (std::size_t l = 0; l < sigma.dim(); ++l) {
      const double a = std::abs(sigma(j, l));
      if (a == 0.0) continue;
      row += q == 0.0 ? 1.0 : std::pow(a, q);
    }
    worst = std::max(worst, row);
  }
  return worst;
}

SimulatedPanel simulate(const DGPSpec& spec) {
  validate(spec);
  return simulate(spec, cholesky(generate_sigma_u(spec).sigma));
}

SimulatedPanel simulate(const DGPSpec& spec, const Matrix& sigma_u_factor) {
  validate(spec);
  const std::size_t p = spec.p;
  const std::size_t n = spec.n;
  const std::size_t k = spec.k;
  if (sigma_u_factor.rows() != p || sigma_u_factor.cols() != p) {
    throw DimensionError("simulate: Sigma_u factor must be p x p");
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double half_width = std::sqrt(3.0);
  std::uniform_real_distribution<double> unif(-half_width, half_width);
  std::uniform_real_distribution<double> loading(spec.loading_lo, spec.loading_hi);

  Matrix loadings(p, k);
  for (double& x : loadings.data()) x = loading(rng);

  const Matrix f_factor = k > 0 ? cholesky(factor_covariance(spec)) : Matrix();
  Matrix factors(n, k);
  Matrix residuals(p, n);
  std::vector<double> zf(k);
  std::vector<double> zu(p);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& z : zf) z = gauss(rng);
    if (spec.noise == NoiseDistribution::kGaussian) {
      for (double& z : zu) z = gauss(rng);
    } else {
      for (double& z : zu) z = unif(rng);
    }
    for (std::size_t a = 0; a < k; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b <= a; ++b) s += f_factor(a, b) * zf[b];
      factors(i, a) = s;
    }
    for (std::size_t j = 0; j < p; ++j) {
      const auto lj = sigma_u_factor.row(j);
      double s = 0.0;
      for (std::size_t m = 0; m <= j; ++m) s += lj[m] * zu[m];
      residuals(j, i) = s;
    }
  }

  Matrix y = residuals;
  for (std::size_t j = 0; j < p; ++j) {
    const auto lj = loadings.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const auto fi = factors.row(i);
      double common = 0.0;
      for (std::size_t a = 0; a < k; ++a) common += lj[a] * fi[a];
      y(j, i) += common;
    }
  }
  return SimulatedPanel{DataMatrix(std::move(y)), std::move(factors), std::move(residuals),
                        std::move(loadings)};
}

MomentDiagnostics moment_diagnostics(const Matrix& u, const Matrix& u_hat) {
  if (u.rows() != u_hat.rows() || u.cols() != u_hat.cols()) {
    throw DimensionError("moment_diagnostics: U and U_hat differ in shape");
  }
  if (u.empty()) throw DimensionError("moment_diagnostics: empty input");

  const auto truth = cross_fourth_moments(u);
  const auto est = cross_fourth_moments(u_hat);
  const std::size_t p = u.rows();
  const double n = static_cast<double>(u.cols());

  MomentDiagnostics d;
  d.min_cross_fourth = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p; ++j) {
    double sixth = 0.0;
    for (double x : u.row(j)) sixth += x * x * x * x * x * x;
    d.max_sixth = std::max(d.max_sixth, sixth / n);
    for (std::size_t l = j; l < p; ++l) {
      d.min_cross_fourth = std::min(d.min_cross_fourth, truth(j, l));
      d.max_fourth_gap = std::max(d.max_fourth_gap, std::abs(truth(j, l) - est(j, l)));
    }
  }
  if (d.min_cross_fourth < 1e-4) d.flags.emplace_back(kWeakFourthMomentFlag);
  if (d.max_fourth_gap > 0.5 * d.min_cross_fourth) d.flags.emplace_back(kStudentizerDriftFlag);
  return d;
}

ExperimentReport coverage_experiment(const DGPSpec& spec, std::size_t reps,
                                     const ExperimentOptions& options) {
  validate(spec);
  validate_options(options);
  if (reps < 1) throw ArgumentError("coverage_experiment: need at least one replication");

  ExperimentReport report;
  report.kind = "coverage";
  report.axis = "none";
  report.c0 = options.c0;
  report.alpha = options.alpha;
  report.replications = reps;
  report.seed = spec.seed;
  if (reps < 100) {
    report.warnings.push_back("replications below 100: standard errors are not reportable");
  }
  append_regime_warnings(spec, report.warnings);

  const auto outcomes = run_replications(spec, reps, options);
  report.points.push_back(aggregate(spec, outcomes, generate_sigma_u(spec).inflated));
  return report;
}

ExperimentReport rate_experiment(const DGPSpec& base, RateAxis axis,
                                 const std::vector<std::size_t>& grid, std::size_t reps,
                                 const ExperimentOptions& options) {
  validate_options(options);
  const std::set<std::size_t> distinct(grid.begin(), grid.end());
  if (grid.size() < 3 || distinct.size() < 3) {
    throw ArgumentError("rate_experiment: grid needs at least three distinct values");
  }
  if (reps < 1) throw ArgumentError("rate_experiment: need at least one replication");

  ExperimentReport report;
  report.kind = "rate";
  report.axis = axis == RateAxis::kVaryN ? "n" : "p";
  report.c0 = options.c0;
  report.alpha = options.alpha;
  report.replications = reps;
  report.seed = base.seed;
  if (reps < 50) {
    report.warnings.push_back("replications below 50: slopes are not reportable");
  }

  std::vector<double> xs;
  for (std::size_t value : grid) {
    DGPSpec spec = base;
    (axis == RateAxis::kVaryN ? spec.n : spec.p) = value;
    validate(spec);
    append_regime_warnings(spec, report.warnings);
    const auto outcomes = run_replications(spec, reps, options);
    report.points.push_back(aggregate(spec, outcomes, generate_sigma_u(spec).inflated));
    xs.push_back(static_cast<double>(value));
  }

  const auto fit_slope = [&](const std::string& name, auto member) {
    std::vector<double> ys;
    for (const auto& pt : report.points) ys.push_back((pt.*member).mean);
    try {
      report.fitted_slopes[name] = loglog_slope(xs, ys);
    } catch (const ArgumentError&) {
      report.warnings.push_back(name + ": slope undefined (nonpositive mean)");
    }
  };
  fit_slope("max_error", &GridPointReport::max_error);
  fit_slope("operator_error", &GridPointReport::operator_error);
  fit_slope("frobenius_error", &GridPointReport::frobenius_error);
  fit_slope("residual_term", &GridPointReport::residual_term);
  return report;
}

}  // namespace factorcov
