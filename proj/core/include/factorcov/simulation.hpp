#pragma once

// Synthetic approximate factor models and the Monte Carlo experiments run
// on them.
//
// Random streams: every experiment has one root seed. Replication r draws
// from an mt19937_64 seeded with replication_seed(root, r), a splitmix64
// hash of root + (r + 1) * 0x9E3779B97F4A7C15. The same replication seeds
// are reused at every grid point of an experiment, and replication r can
// be rerun alone from (root, r).

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "factorcov/factor_pc.hpp"
#include "factorcov/matrix.hpp"
#include "factorcov/regression.hpp"
#include "factorcov/threshold.hpp"

namespace factorcov {

/// sigma_jl = decay^{|j-l|} for |j-l| <= bandwidth, unit diagonal.
struct Banded {
  std::size_t bandwidth = 2;
  double decay = 0.4;
};

/// Consecutive blocks of `block_size` variables with equicorrelation
/// `within_corr`; the last block may be shorter.
struct BlockDiagonal {
  std::size_t block_size = 5;
  double within_corr = 0.3;
};

/// Unit diagonal plus randomly placed off-diagonal entries with magnitudes
/// in [0.1, 0.3], subject to max_j sum_l |sigma_jl|^q <= m_p_target and
/// off-diagonal absolute row sums below 0.9.
struct RandomSparse {
  double q = 0.0;
  double m_p_target = 3.0;
  std::uint64_t seed = 1;
};

using SigmaStructure = std::variant<Banded, BlockDiagonal, RandomSparse>;

enum class NoiseDistribution { kGaussian, kScaledUniform };

struct DGPSpec {
  std::size_t p = 100;
  std::size_t n = 200;
  std::size_t k = 3;
  /// Loading entries i.i.d. uniform on [loading_lo, loading_hi].
  double loading_lo = 0.5;
  double loading_hi = 1.5;
  /// Empty means the K x K identity.
  std::vector<double> factor_cov;
  SigmaStructure sigma_u = Banded{};
  NoiseDistribution noise = NoiseDistribution::kGaussian;
  std::uint64_t seed = 0;
};

/// Throws ArgumentError on out-of-range fields.
void validate(const DGPSpec& spec);

std::uint64_t replication_seed(std::uint64_t root, std::size_t replication);

struct GeneratedSigma {
  SymmetricMatrix sigma;
  /// Set when the diagonal had to be inflated to restore positive definiteness.
  bool inflated = false;
};

GeneratedSigma generate_sigma_u(const DGPSpec& spec);

/// max_j sum_l |sigma_jl|^q, with zero entries contributing nothing when q = 0.
double sparsity_measure(const SymmetricMatrix& sigma, double q);

struct SimulatedPanel {
  DataMatrix y;
  Matrix factors;       // n x K
  Matrix residuals;     // p x n
  Matrix loadings;      // p x K
};

/// One draw from the model. Loadings, then (f_i, u_i) for i = 1..n, all come
/// from a single mt19937_64 seeded with spec.seed.
SimulatedPanel simulate(const DGPSpec& spec);
/// Same, with the Cholesky factor of Sigma_u precomputed.
SimulatedPanel simulate(const DGPSpec& spec, const Matrix& sigma_u_factor);

struct MomentDiagnostics {
  double min_cross_fourth = 0.0;     // min_jl (1/n) sum u_j^2 u_l^2
  double max_sixth = 0.0;            // max_j (1/n) sum u_j^6
  double max_fourth_gap = 0.0;       // max_jl |(1/n) sum (u^2 u^2 - uhat^2 uhat^2)|
  std::vector<std::string> flags;
};

inline constexpr const char* kWeakFourthMomentFlag = "cross fourth moment below 1e-4";
inline constexpr const char* kStudentizerDriftFlag =
    "estimated studentizer drifts from the true one";

MomentDiagnostics moment_diagnostics(const Matrix& u, const Matrix& u_hat);

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
};

struct GridPointReport {
  std::size_t p = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  SummaryStat max_error;
  SummaryStat operator_error;
  SummaryStat frobenius_error;
  SummaryStat residual_term;
  SummaryStat zero_fraction;
  double coverage_frequency = 0.0;
  double coverage_standard_error = 0.0;
  bool sigma_inflated = false;
};

struct ExperimentReport {
  std::string kind;
  std::string axis;
  double c0 = 1.1;
  double alpha = 0.05;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  std::vector<GridPointReport> points;
  std::map<std::string, SlopeFit> fitted_slopes;
  std::vector<std::string> warnings;
};

struct ExperimentOptions {
  double c0 = 1.1;
  double alpha = 0.05;
  /// Multiplies every plug-in threshold; 1 for the estimator itself.
  double threshold_scale = 1.0;
  std::size_t threads = 1;
};

/// Frequency over replications of max_jl |s_jl - sigma_jl| / mu_jl > 1,
/// with its binomial standard error. spec.seed is the root seed.
ExperimentReport coverage_experiment(const DGPSpec& spec, std::size_t reps,
                                     const ExperimentOptions& options = {});

enum class RateAxis { kVaryN, kVaryP };

/// Mean estimation errors and residual term at each grid value of n or p,
/// and the log-log slope of each against the axis value. Needs at least
/// three distinct grid values.
ExperimentReport rate_experiment(const DGPSpec& base, RateAxis axis,
                                 const std::vector<std::size_t>& grid, std::size_t reps,
                                 const ExperimentOptions& options = {});

/// Raised when a replication fails; carries the seed that reproduces it.
class ReplicationError : public NumericError {
 public:
  ReplicationError(const std::string& what, std::uint64_t seed)
      : NumericError(what), seed_(seed) {}
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace factorcov
