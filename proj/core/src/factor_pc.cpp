#include "factorcov/factor_pc.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace factorcov {

namespace {

// Leading k eigenvectors of Y'Y (n-vectors), unit length, sign-normalized.
Matrix leading_observation_vectors(const Matrix& y, std::size_t k) {
  const std::size_t p = y.rows();
  const std::size_t n = y.cols();
  Matrix out(n, k);

  if (n <= p) {
    const auto gram = SymmetricMatrix::from_upper(transposed_multiply(y, y));
    const auto eig = sym_eigen(gram);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) out(i, c) = eig.vectors(i, c);
    }
    return out;
  }

  const auto eig = sym_eigen(scaled_gram(y, 1.0));
  const double top = std::max(eig.values.front(), 0.0);
  std::vector<double> v(n);
  for (std::size_t c = 0; c < k; ++c) {
    const double value = eig.values[c];
    if (!(value > 1e-13 * top) || value <= 0.0) {
      throw NumericError("fit_pc: data rank is below the requested factor count", value);
    }
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t j = 0; j < p; ++j) {
      const double w = eig.vectors(j, c);
      const auto yj = y.row(j);
      for (std::size_t i = 0; i < n; ++i) v[i] += w * yj[i];
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    for (double& x : v) x /= norm;
    apply_sign_convention(v);
    for (std::size_t i = 0; i < n; ++i) out(i, c) = v[i];
  }
  return out;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": residual matrices differ in shape");
  }
  if (a.empty()) throw DimensionError(std::string(what) + ": empty residual matrix");
}

}  // namespace

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 2) {
    throw DimensionError("DataMatrix: need at least 2 variables and 2 observations");
  }
  require_finite(values_, "DataMatrix");
}

FactorFit fit_pc(const DataMatrix& y, std::size_t k) {
  const std::size_t p = y.p();
  const std::size_t n = y.n();
  if (k >= std::min(p, n)) {
    throw ArgumentError("fit_pc: factor count " + std::to_string(k) +
                        " must be below min(p, n) = " + std::to_string(std::min(p, n)));
  }

  FactorFit fit;
  fit.k = k;
  fit.factors = Matrix(n, k);
  fit.loadings = Matrix(p, k);
  if (k > 0) {
    const double root_n = std::sqrt(static_cast<double>(n));
    fit.factors = scale(leading_observation_vectors(y.values(), k), root_n);
    fit.loadings = scale(multiply(y.values(), fit.factors), 1.0 / static_cast<double>(n));
  }

  fit.residuals = Matrix(p, n);
  for (std::size_t j = 0; j < p; ++j) {
    const auto lj = fit.loadings.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const auto fi = fit.factors.row(i);
      fit.residuals(j, i) =
          y.values()(j, i) - std::inner_product(lj.begin(), lj.end(), fi.begin(), 0.0);
    }
  }
  return fit;
}

SymmetricMatrix residual_sample_covariance(const Matrix& residuals) {
  if (residuals.empty()) throw DimensionError("residual_sample_covariance: empty residuals");
  return scaled_gram(residuals, static_cast<double>(residuals.cols()));
}

SymmetricMatrix residual_sample_covariance(const FactorFit& fit) {
  return residual_sample_covariance(fit.residuals);
}

double residual_term_error(const Matrix& estimated, const Matrix& truth) {
  require_same_shape(estimated, truth, "residual_term_error");
  const std::size_t p = estimated.rows();
  const double n = static_cast<double>(estimated.cols());
  double worst = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const auto ej = estimated.row(j);
    const auto tj = truth.row(j);
    for (std::size_t l = j; l < p; ++l) {
      const auto el = estimated.row(l);
      const auto tl = truth.row(l);
      double diff = 0.0;
      for (std::size_t i = 0; i < ej.size(); ++i) diff += ej[i] * el[i] - tj[i] * tl[i];
      worst = std::max(worst, std::abs(diff / n));
    }
  }
  return worst;
}

double residual_term_error(const FactorFit& fit, const Matrix& true_residuals) {
  return residual_term_error(fit.residuals, true_residuals);
}

DataMatrix demean_rows(const DataMatrix& y) {
  Matrix v = y.values();
  const double n = static_cast<double>(y.n());
  for (std::size_t j = 0; j < v.rows(); ++j) {
    auto r = v.row(j);
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / n;
    for (double& x : r) x -= mean;
  }
  return DataMatrix(std::move(v));
}

}  // namespace factorcov
