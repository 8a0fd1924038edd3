#include "factorcov/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "factorcov/normal_quantile.hpp"

namespace factorcov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double soft(double s, double mu) {
  const double excess = std::abs(s) - mu;
  if (!(excess > 0.0)) return 0.0;
  return s > 0.0 ? excess : -excess;
}

// mu_jl = scale * sqrt(theta_jl), +inf where theta_jl == 0.
Matrix studentized_thresholds(const SymmetricMatrix& theta, double scale) {
  const std::size_t p = theta.dim();
  Matrix mu(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = 0; l < p; ++l) {
      const double t = theta(j, l);
      mu(j, l) = t > 0.0 ? scale * std::sqrt(t) : kInf;
    }
  }
  return mu;
}

Matrix columns(const Matrix& m, std::size_t first, std::size_t last, bool complement) {
  const std::size_t width = complement ? m.cols() - (last - first) : last - first;
  Matrix out(m.rows(), width);
  for (std::size_t j = 0; j < m.rows(); ++j) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < m.cols(); ++i) {
      const bool inside = i >= first && i < last;
      if (inside != complement) out(j, c++) = m(j, i);
    }
  }
  return out;
}

double zero_fraction_of(const SymmetricMatrix& s) {
  const std::size_t p = s.dim();
  std::size_t zeros = 0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = j + 1; l < p; ++l) {
      if (s(j, l) == 0.0) ++zeros;
    }
  }
  const double pairs = static_cast<double>(p) * static_cast<double>(p - 1) / 2.0;
  return static_cast<double>(zeros) / pairs;
}

}  // namespace

void validate(const ThresholdRule& rule) {
  std::visit(overloaded{
                 [](const PlugInRule& r) {
                   if (!(r.c0 > 1.0) || !std::isfinite(r.c0)) {
                     throw ArgumentError("plug-in rule: c0 must be a finite value above 1");
                   }
                   if (!(r.alpha > 0.0 && r.alpha < 1.0)) {
                     throw ArgumentError("plug-in rule: alpha must lie in (0, 1)");
                   }
                 },
                 [](const CrossValidationRule& r) {
                   if (r.folds < 2) throw ArgumentError("cross-validation: folds must be >= 2");
                   if (r.grid.empty()) throw ArgumentError("cross-validation: empty grid");
                   for (double c : r.grid) {
                     if (!(c >= 0.0) || !std::isfinite(c)) {
                       throw ArgumentError("cross-validation: grid constants must be >= 0");
                     }
                   }
                 },
                 [](const FixedConstantRule& r) {
                   if (!(r.c >= 0.0) || !std::isfinite(r.c)) {
                     throw ArgumentError("fixed rule: constant must be >= 0");
                   }
                 },
             },
             rule);
}

std::string rule_name(const ThresholdRule& rule) {
  return std::visit(overloaded{
                        [](const PlugInRule&) { return std::string("plugin"); },
                        [](const CrossValidationRule&) { return std::string("cv"); },
                        [](const FixedConstantRule&) { return std::string("fixed"); },
                    },
                    rule);
}

SymmetricMatrix cross_fourth_moments(const Matrix& residuals) {
  Matrix squares = residuals;
  for (double& x : squares.data()) x *= x;
  return scaled_gram(squares, static_cast<double>(residuals.cols()));
}

Matrix plugin_thresholds(const Matrix& residuals, double c0, double alpha) {
  validate(PlugInRule{c0, alpha});
  if (residuals.rows() < 1 || residuals.cols() < 2) {
    throw DimensionError("plugin_thresholds: need n >= 2 observations");
  }
  const double p = static_cast<double>(residuals.rows());
  const double n = static_cast<double>(residuals.cols());
  const double z = inv_norm_cdf(1.0 - alpha / (2.0 * p * p));
  return studentized_thresholds(cross_fourth_moments(residuals), c0 / std::sqrt(n) * z);
}

SymmetricMatrix soft_threshold(const SymmetricMatrix& s, const Matrix& mu) {
  const std::size_t p = s.dim();
  if (mu.rows() != p || mu.cols() != p) {
    throw DimensionError("soft_threshold: threshold matrix does not match covariance");
  }
  SymmetricMatrix out = s;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = j + 1; l < p; ++l) {
      if (mu(j, l) < 0.0 || std::isnan(mu(j, l))) {
        throw ArgumentError("soft_threshold: thresholds must be nonnegative");
      }
      out.set(j, l, soft(s(j, l), mu(j, l)));
    }
  }
  return out;
}

double cv_threshold_constant(const Matrix& residuals, std::size_t folds,
                             const std::vector<double>& grid) {
  validate(CrossValidationRule{folds, grid});
  const std::size_t p = residuals.rows();
  const std::size_t n = residuals.cols();
  if (folds > n || n / folds < 2) {
    throw ArgumentError("cross-validation: fold size below 2 observations");
  }

  const std::set<double> candidates(grid.begin(), grid.end());
  std::vector<double> scores(candidates.size(), 0.0);
  const double log_p = std::log(static_cast<double>(p));

  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t first = f * n / folds;
    const std::size_t last = (f + 1) * n / folds;
    const Matrix train = columns(residuals, first, last, true);
    const Matrix valid = columns(residuals, first, last, false);
    const auto s_train = residual_sample_covariance(train);
    const auto s_valid = residual_sample_covariance(valid);
    const auto theta = cross_fourth_moments(train);
    const double base = std::sqrt(log_p / static_cast<double>(train.cols()));

    std::size_t idx = 0;
    for (double c : candidates) {
      double sq = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t l = 0; l < p; ++l) {
          double est = s_train(j, l);
          if (j != l) {
            const double t = theta(j, l);
            est = t > 0.0 ? soft(est, c * base * std::sqrt(t)) : 0.0;
          }
          const double d = est - s_valid(j, l);
          sq += d * d;
        }
      }
      scores[idx++] += std::sqrt(sq) / static_cast<double>(folds);
    }
  }

  auto best = candidates.begin();
  double best_score = scores.front();
  std::size_t idx = 0;
  for (auto it = candidates.begin(); it != candidates.end(); ++it, ++idx) {
    if (scores[idx] < best_score) {
      best_score = scores[idx];
      best = it;
    }
  }
  return *best;
}

double cv_threshold_constant(const DataMatrix& y, std::size_t k, std::size_t folds,
                             const std::vector<double>& grid) {
  return cv_threshold_constant(fit_pc(y, k).residuals, folds, grid);
}

std::vector<std::string> regime_guards(std::size_t p, std::size_t n) {
  if (p < 2 || n < 2) throw ArgumentError("regime_guards: p and n must be >= 2");
  std::vector<std::string> warnings;
  const double pd = static_cast<double>(p);
  const double nd = static_cast<double>(n);
  if (std::log(pd) > std::cbrt(nd)) warnings.emplace_back(kModerateDeviationWarning);
  if (nd > pd * pd * std::log(pd)) warnings.emplace_back(kUnderThresholdingWarning);
  return warnings;
}

CovarianceEstimate estimate_from_residuals(const Matrix& residuals, const ThresholdRule& rule,
                                           const EstimateOptions& options) {
  validate(rule);
  const std::size_t p = residuals.rows();
  const std::size_t n = residuals.cols();
  if (p < 2 || n < 2) throw DimensionError("estimate_covariance: need p >= 2 and n >= 2");

  const auto s = residual_sample_covariance(residuals);
  const auto theta = cross_fourth_moments(residuals);
  const double pd = static_cast<double>(p);
  const double root_n = std::sqrt(static_cast<double>(n));

  double constant = 0.0;
  double scale_factor = 0.0;
  std::visit(overloaded{
                 [&](const PlugInRule& r) {
                   constant = r.c0;
                   scale_factor = r.c0 / root_n * inv_norm_cdf(1.0 - r.alpha / (2.0 * pd * pd));
                 },
                 [&](const CrossValidationRule& r) {
                   constant = cv_threshold_constant(residuals, r.folds, r.grid);
                   scale_factor = constant * std::sqrt(std::log(pd) / static_cast<double>(n));
                 },
                 [&](const FixedConstantRule& r) {
                   constant = r.c;
                   scale_factor = r.c / root_n;
                 },
             },
             rule);

  Matrix mu = studentized_thresholds(theta, scale_factor);
  auto thresholded = soft_threshold(s, mu);
  CovarianceEstimate est{std::move(thresholded),
                         std::move(mu),
                         0.0,
                         0.0,
                         rule,
                         constant,
                         regime_guards(p, n)};

  std::size_t degenerate = 0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t l = j + 1; l < p; ++l) {
      if (theta(j, l) == 0.0) ++degenerate;
    }
  }
  if (degenerate > 0) {
    est.guard_flags.push_back(std::string(kZeroStudentizerWarning) + ": " +
                              std::to_string(degenerate) + " pairs");
  }

  est.zero_fraction = zero_fraction_of(est.sigma_u_hat);

  auto eig = sym_eigen(est.sigma_u_hat);
  if (options.eigen_floor) {
    const double floor = 1e-8 * trace(est.sigma_u_hat) / pd;
    if (eig.values.back() < floor) {
      for (double& v : eig.values) v = std::max(v, floor);
      est.sigma_u_hat = reconstruct(eig);
      est.guard_flags.emplace_back(kEigenFloorWarning);
      eig = sym_eigen(est.sigma_u_hat);
    }
  }
  est.min_eigenvalue = eig.values.back();
  return est;
}

CovarianceEstimate estimate_covariance(const DataMatrix& y, std::size_t k,
                                       const ThresholdRule& rule,
                                       const EstimateOptions& options) {
  validate(rule);
  return estimate_from_residuals(fit_pc(y, k).residuals, rule, options);
}

}  // namespace factorcov
