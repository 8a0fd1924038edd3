#include <cmath>
#include <random>

#include "doctest.h"
#include "factorcov/identification.hpp"
#include "oracles.hpp"

using namespace factorcov;

namespace {

PopulationModel random_model(std::size_t p, std::size_t k, std::mt19937_64& rng) {
  const Matrix b = oracle::random_matrix(k, k, rng);
  const auto factor_cov = add(scaled_gram(b, 1.0), SymmetricMatrix::identity(k));
  const Matrix c = oracle::random_matrix(p, p, rng, -0.2, 0.2);
  const auto sigma_u = add(scaled_gram(c, 1.0), SymmetricMatrix::identity(p));
  return {oracle::random_matrix(p, k, rng, 0.5, 1.5), factor_cov, sigma_u};
}

}  // namespace

TEST_CASE("population covariance without factors is Sigma_u") {
  std::mt19937_64 rng(41);
  auto m = random_model(12, 2, rng);
  m.loadings = Matrix(12, 2);
  CHECK(population_y_covariance(m) == m.sigma_u);
  // With K zero loading columns the tail still drops the top K eigenpairs of
  // Sigma_u, so the error is exactly the max norm of that head.
  const auto head = reconstruct(sym_eigen(m.sigma_u), 0, 2);
  CHECK(std::abs(identification_error(m) - max_norm(head)) < 1e-12);
}

TEST_CASE("population covariance: one unit factor on unit loadings") {
  PopulationModel m{Matrix(4, 1, 1.0), SymmetricMatrix::identity(1), SymmetricMatrix::identity(4)};
  const auto s = population_y_covariance(m);
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t l = 0; l < 4; ++l) CHECK(s(j, l) == (j == l ? 2.0 : 1.0));
  }
}

TEST_CASE("population covariance matches a triple-loop oracle") {
  std::mt19937_64 rng(42);
  const auto m = random_model(25, 3, rng);
  const Matrix expected = add(oracle::triple_product(m.loadings, m.factor_cov.matrix()),
                              m.sigma_u.matrix());
  CHECK(max_norm(subtract(population_y_covariance(m).matrix(), expected)) < 1e-10);
}

TEST_CASE("model validation") {
  std::mt19937_64 rng(43);
  auto m = random_model(10, 2, rng);
  m.loadings = Matrix(10, 3);
  CHECK_THROWS_AS(population_y_covariance(m), DimensionError);

  auto neg = random_model(10, 2, rng);
  neg.factor_cov.set(0, 0, -1.0);
  CHECK_THROWS_AS(population_y_covariance(neg), ArgumentError);

  auto flat = random_model(10, 2, rng);
  flat.loadings = Matrix(10, 2);
  CHECK_THROWS_AS(require_pervasive(flat, {}), ArgumentError);
  CHECK_NOTHROW(require_pervasive(standard_pervasive_model(50, 3, 1), {}));
}

TEST_CASE("tail approximation edge cases") {
  std::mt19937_64 rng(44);
  const auto sigma_y = population_y_covariance(random_model(15, 2, rng));
  CHECK(max_norm(subtract(tail_eigen_approximation(sigma_y, 0), sigma_y)) < 1e-8);

  const auto last = tail_eigen_approximation(sigma_y, 14);
  const auto eig = sym_eigen(last);
  CHECK(std::abs(eig.values[1]) < 1e-10);
  CHECK(std::abs(eig.values[14]) < 1e-10);

  CHECK_THROWS_AS(tail_eigen_approximation(sigma_y, 15), ArgumentError);
}

TEST_CASE("head plus tail reconstructs sigma_y for every split") {
  std::mt19937_64 rng(45);
  const auto sigma_y = population_y_covariance(random_model(10, 3, rng));
  const auto eig = sym_eigen(sigma_y);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto head = reconstruct(eig, 0, k);
    const auto tail = tail_eigen_approximation(sigma_y, k);
    CHECK(max_norm(subtract(add(head, tail), sigma_y)) < 1e-8);
  }
}

TEST_CASE("spiked model: tail equals sigma^2 (I - P_K)") {
  // Orthogonal loading columns make Lambda'Lambda diagonal.
  const std::size_t p = 12;
  Matrix lambda(p, 2);
  for (std::size_t j = 0; j < p; ++j) {
    lambda(j, 0) = 2.0;
    lambda(j, 1) = (j % 2 == 0) ? 1.5 : -1.5;
  }
  const double s2 = 0.7;
  PopulationModel m{lambda, SymmetricMatrix::identity(2),
                    SymmetricMatrix::from_upper(scale(Matrix::identity(p), s2))};
  const auto tail = tail_eigen_approximation(population_y_covariance(m), 2);
  const Matrix proj = oracle::column_projector(lambda);
  const Matrix expected = scale(subtract(Matrix::identity(p), proj), s2);
  CHECK(max_norm(subtract(tail.matrix(), expected)) < 1e-10);
}

TEST_CASE("Sigma_u = 0 has nothing in the tail") {
  std::mt19937_64 rng(46);
  auto m = random_model(20, 3, rng);
  m.sigma_u = SymmetricMatrix(20);
  CHECK(identification_error(m) < 1e-10);
}

TEST_CASE("identification error is invariant under rotation of the factor space") {
  std::mt19937_64 rng(47);
  const auto m = random_model(30, 2, rng);
  const double t = 0.7;
  Matrix q(2, 2);
  q(0, 0) = std::cos(t);
  q(0, 1) = -std::sin(t);
  q(1, 0) = std::sin(t);
  q(1, 1) = std::cos(t);
  const PopulationModel rotated{
      multiply(m.loadings, q),
      SymmetricMatrix::from_upper(transposed_multiply(q, multiply(m.factor_cov.matrix(), q))),
      m.sigma_u};
  CHECK(max_norm(subtract(population_y_covariance(m), population_y_covariance(rotated))) < 1e-10);
  CHECK(std::abs(identification_error(m) - identification_error(rotated)) < 1e-10);
}

TEST_CASE("standard pervasive family: error decays in p") {
  const std::vector<std::size_t> grid = {50, 100, 200, 400};
  const auto sweep = identification_sweep(grid, 3, 20240611);
  REQUIRE(sweep.points.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(sweep.points[i].max_norm_error < sweep.points[i - 1].max_norm_error);
  }
  MESSAGE("identification slope " << sweep.slope.slope << " +- " << sweep.slope.standard_error);
  CHECK(sweep.slope.slope <= -0.3);

  // Deterministic.
  const auto again = identification_sweep(grid, 3, 20240611);
  CHECK(again.points[2].max_norm_error == sweep.points[2].max_norm_error);
}
