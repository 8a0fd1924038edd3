#pragma once

// Population-level recovery of the idiosyncratic covariance from the tail
// eigencomponents of cov(y) = Lambda Sigma_f Lambda' + Sigma_u. Everything
// here is deterministic: no sampling is involved.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "factorcov/matrix.hpp"
#include "factorcov/regression.hpp"

namespace factorcov {

struct PopulationModel {
  Matrix loadings;              // p x K
  SymmetricMatrix factor_cov;   // K x K
  SymmetricMatrix sigma_u;      // p x p
};

/// Declared range for the eigenvalues of Lambda'Lambda / p.
struct PervasivenessBounds {
  double lower = 1e-3;
  double upper = 1e3;
};

/// Shapes agree, entries finite, factor_cov positive definite.
void validate(const PopulationModel& m);

/// Throws ArgumentError if an eigenvalue of Lambda'Lambda / p falls outside `bounds`.
void require_pervasive(const PopulationModel& m, const PervasivenessBounds& bounds);

/// Lambda * factor_cov * Lambda' + Sigma_u.
SymmetricMatrix population_y_covariance(const PopulationModel& m);

/// Sum of the eigencomponents of `sigma_y` with (descending) index k+1..p.
SymmetricMatrix tail_eigen_approximation(const SymmetricMatrix& sigma_y, std::size_t k);

/// max-norm distance between Sigma_u and the tail approximation using K = loadings.cols().
double identification_error(const PopulationModel& m);

/// Lambda rows i.i.d. uniform on [0.5, 1.5]^k from a stream keyed by (seed, p),
/// Sigma_f = I, Sigma_u banded with bandwidth 2, decay 0.4 and unit diagonal.
PopulationModel standard_pervasive_model(std::size_t p, std::size_t k, std::uint64_t seed);

struct IdentificationPoint {
  std::size_t p = 0;
  double max_norm_error = 0.0;
};

struct IdentificationSweep {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<IdentificationPoint> points;
  SlopeFit slope;
};

/// identification_error of the standard pervasive family at each p, plus the
/// log-log slope of error on p. Needs at least two distinct p values.
IdentificationSweep identification_sweep(std::span<const std::size_t> p_grid, std::size_t k,
                                         std::uint64_t seed);

}  // namespace factorcov
