#include "factorcov/identification.hpp"

#include <random>
#include <string>

#include "factorcov/simulation.hpp"

namespace factorcov {

void validate(const PopulationModel& m) {
  const std::size_t p = m.sigma_u.dim();
  const std::size_t k = m.factor_cov.dim();
  if (m.loadings.rows() != p || m.loadings.cols() != k) {
    throw DimensionError("PopulationModel: loadings must be p x K with p = dim(sigma_u), K = dim(factor_cov)");
  }
  require_finite(m.loadings, "PopulationModel loadings");
  require_finite(m.sigma_u.matrix(), "PopulationModel sigma_u");
  const auto eig = sym_eigen(m.factor_cov);
  if (!(eig.values.back() > 0.0)) {
    throw ArgumentError("PopulationModel: factor covariance must be positive definite");
  }
}

void require_pervasive(const PopulationModel& m, const PervasivenessBounds& bounds) {
  if (!(bounds.lower > 0.0 && bounds.lower <= bounds.upper)) {
    throw ArgumentError("pervasiveness bounds must satisfy 0 < lower <= upper");
  }
  const double p = static_cast<double>(m.loadings.rows());
  const auto gram = SymmetricMatrix::from_upper(
      scale(transposed_multiply(m.loadings, m.loadings), 1.0 / p));
  const auto eig = sym_eigen(gram);
  if (eig.values.back() < bounds.lower || eig.values.front() > bounds.upper) {
    throw ArgumentError("loadings are not pervasive: eigenvalues of Lambda'Lambda/p span [" +
                        std::to_string(eig.values.back()) + ", " +
                        std::to_string(eig.values.front()) + "]");
  }
}

SymmetricMatrix population_y_covariance(const PopulationModel& m) {
  validate(m);
  const Matrix common = multiply_transposed(multiply(m.loadings, m.factor_cov.matrix()), m.loadings);
  return add(SymmetricMatrix::from_upper(common), m.sigma_u);
}

SymmetricMatrix tail_eigen_approximation(const SymmetricMatrix& sigma_y, std::size_t k) {
  if (k >= sigma_y.dim()) {
    throw ArgumentError("tail_eigen_approximation: k must be below the dimension");
  }
  const auto eig = sym_eigen(sigma_y);
  return reconstruct(eig, k, eig.values.size());
}

double identification_error(const PopulationModel& m) {
  const auto tail = tail_eigen_approximation(population_y_covariance(m), m.loadings.cols());
  return max_norm(subtract(m.sigma_u, tail));
}

PopulationModel standard_pervasive_model(std::size_t p, std::size_t k, std::uint64_t seed) {
  if (k == 0 || k >= p) throw ArgumentError("standard_pervasive_model: need 1 <= k < p");
  std::mt19937_64 rng(replication_seed(seed, p));
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Matrix loadings(p, k);
  for (double& x : loadings.data()) x = unif(rng);

  DGPSpec banded;
  banded.p = p;
  banded.k = k;
  banded.sigma_u = Banded{2, 0.4};
  return PopulationModel{std::move(loadings), SymmetricMatrix::identity(k),
                         generate_sigma_u(banded).sigma};
}

IdentificationSweep identification_sweep(std::span<const std::size_t> p_grid, std::size_t k,
                                         std::uint64_t seed) {
  IdentificationSweep sweep;
  sweep.k = k;
  sweep.seed = seed;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t p : p_grid) {
    const double err = identification_error(standard_pervasive_model(p, k, seed));
    sweep.points.push_back({p, err});
    xs.push_back(static_cast<double>(p));
    ys.push_back(err);
  }
  sweep.slope = loglog_slope(xs, ys);
  return sweep;
}

}  // namespace factorcov
