#pragma once

// Entry-adaptive soft thresholding of the residual covariance.
//
// The plug-in rule thresholds the studentized residual covariance
//
//   mu_jl = c0 / sqrt(n) * z * sqrt((1/n) sum_i uhat_ji^2 uhat_li^2),
//   z     = Phi^{-1}(1 - alpha / (2 p^2)),
//
// so every off-diagonal entry is shrunk by a multiple of its own estimated
// standard error. Diagonal entries are never thresholded.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "factorcov/factor_pc.hpp"
#include "factorcov/matrix.hpp"

namespace factorcov {

/// mu = c0 / sqrt(n) * Phi^{-1}(1 - alpha / (2 p^2)) * studentizer.
struct PlugInRule {
  double c0 = 1.1;
  double alpha = 0.05;
};

/// mu = c * sqrt(log p / n) * studentizer, with c picked by cross-validation.
struct CrossValidationRule {
  std::size_t folds = 5;
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
};

/// mu = c / sqrt(n) * studentizer: a fixed threshold on the studentized entries.
struct FixedConstantRule {
  double c = 0.0;
};

using ThresholdRule = std::variant<PlugInRule, CrossValidationRule, FixedConstantRule>;

/// Throws ArgumentError if the rule's parameters are out of range.
void validate(const ThresholdRule& rule);
std::string rule_name(const ThresholdRule& rule);

inline constexpr const char* kModerateDeviationWarning = "moderate-deviation regime";
inline constexpr const char* kUnderThresholdingWarning = "under-thresholding regime";
inline constexpr const char* kZeroStudentizerWarning = "zero studentizer";
inline constexpr const char* kEigenFloorWarning = "eigenvalue floor applied";

struct CovarianceEstimate {
  SymmetricMatrix sigma_u_hat;
  /// Threshold actually applied; +inf marks entries with a zero studentizer.
  Matrix thresholds;
  /// Share of off-diagonal pairs (j < l) whose estimate is exactly zero.
  double zero_fraction = 0.0;
  double min_eigenvalue = 0.0;
  ThresholdRule rule;
  /// Constant chosen by cross-validation; equal to the rule's constant otherwise.
  double threshold_constant = 0.0;
  std::vector<std::string> guard_flags;
};

struct EstimateOptions {
  /// Raise eigenvalues below 1e-8 * trace / p up to that floor.
  bool eigen_floor = false;
};

/// (1/n) sum_i u_ji^2 u_li^2 for every pair.
SymmetricMatrix cross_fourth_moments(const Matrix& residuals);

/// Threshold matrix of the plug-in rule. Entries whose studentizer is zero
/// are set to +infinity so the pair is always zeroed.
Matrix plugin_thresholds(const Matrix& residuals, double c0, double alpha);

/// Soft thresholding of the off-diagonal entries; the diagonal is copied.
SymmetricMatrix soft_threshold(const SymmetricMatrix& s, const Matrix& mu);

/// Full pipeline: PC fit, residual covariance, thresholds per `rule`,
/// soft thresholding, diagnostics.
CovarianceEstimate estimate_covariance(const DataMatrix& y, std::size_t k,
                                       const ThresholdRule& rule,
                                       const EstimateOptions& options = {});

/// Threshold pipeline on residuals that are already available.
CovarianceEstimate estimate_from_residuals(const Matrix& residuals, const ThresholdRule& rule,
                                           const EstimateOptions& options = {});

/// Picks the grid constant c minimizing the fold-averaged Frobenius distance
/// between the training-fold estimate thresholded at
/// c * sqrt(log p / n_train) * studentizer and the validation-fold residual
/// covariance. Residuals come from one PC fit on all of Y; folds are
/// contiguous observation blocks. Ties go to the smallest constant.
double cv_threshold_constant(const DataMatrix& y, std::size_t k, std::size_t folds,
                             const std::vector<double>& grid);
double cv_threshold_constant(const Matrix& residuals, std::size_t folds,
                             const std::vector<double>& grid);

/// Finite-sample proxies for the regimes where the plug-in rule is not
/// expected to hold: log p > n^{1/3} and n > p^2 log p.
std::vector<std::string> regime_guards(std::size_t p, std::size_t n);

}  // namespace factorcov
