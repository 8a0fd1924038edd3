#pragma once

#include <cstddef>

#include "factorcov/matrix.hpp"

namespace factorcov {

/// p x n panel: row j holds variable j across the n observations.
class DataMatrix {
 public:
  /// Throws DimensionError unless p >= 2 and n >= 2, NumericError on
  /// non-finite entries.
  explicit DataMatrix(Matrix values);

  std::size_t p() const noexcept { return values_.rows(); }
  std::size_t n() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }

 private:
  Matrix values_;
};

/// Principal-components fit of Y = loadings * factors' + residuals.
///
/// Factors are normalized so that factors' * factors / n is the identity;
/// loadings and factors are identified only up to that normalization
/// (a K x K rotation of the underlying model).
struct FactorFit {
  std::size_t k = 0;
  Matrix loadings;   // p x k
  Matrix factors;    // n x k
  Matrix residuals;  // p x n
};

/// Principal-components estimator.
///
/// factors = sqrt(n) * (leading k eigenvectors of Y'Y), loadings = Y F / n,
/// residuals = Y - loadings * factors'. When p < n the p x p matrix YY' is
/// decomposed instead and its eigenvectors mapped through Y'; the n-side
/// vectors then get the same sign convention either way.
///
/// k = 0 is accepted and returns residuals == Y. Throws ArgumentError if
/// k >= min(p, n), NumericError if the data have rank below k on the p-side
/// route or the eigensolver fails.
FactorFit fit_pc(const DataMatrix& y, std::size_t k);

/// S_u with entries (1/n) sum_i u_ji u_li.
SymmetricMatrix residual_sample_covariance(const FactorFit& fit);
SymmetricMatrix residual_sample_covariance(const Matrix& residuals);

/// max_{j,l} | (1/n) sum_i (uhat_ji uhat_li - u_ji u_li) |: the error the
/// residual covariance inherits from estimating the factors.
double residual_term_error(const FactorFit& fit, const Matrix& true_residuals);
double residual_term_error(const Matrix& estimated_residuals, const Matrix& true_residuals);

/// Subtract each row's sample mean.
DataMatrix demean_rows(const DataMatrix& y);

}  // namespace factorcov
