#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "factorcov/normal_quantile.hpp"
#include "factorcov/simulation.hpp"
#include "factorcov/threshold.hpp"
#include "oracles.hpp"

using namespace factorcov;

namespace {

std::vector<bool> zero_pattern(const SymmetricMatrix& s) {
  std::vector<bool> z;
  for (std::size_t j = 0; j < s.dim(); ++j) {
    for (std::size_t l = 0; l < s.dim(); ++l) z.push_back(s(j, l) == 0.0);
  }
  return z;
}

SymmetricMatrix from_pairs(double diag, double off) {
  SymmetricMatrix s(2);
  s.set(0, 0, diag);
  s.set(1, 1, diag);
  s.set(0, 1, off);
  return s;
}

Matrix filled(std::size_t p, double v) { return Matrix(p, p, v); }

DataMatrix simulated_panel(std::size_t p, std::size_t n, std::uint64_t seed) {
  DGPSpec spec;
  spec.p = p;
  spec.n = n;
  spec.k = 2;
  spec.seed = seed;
  return simulate(spec).y;
}

}  // namespace

TEST_CASE("plug-in threshold: hand-computed 2 x 4 example") {
  Matrix u(2, 4, 1.0);
  const Matrix mu = plugin_thresholds(u, 1.1, 0.05);
  // (1.1 / 2) * Phi^{-1}(1 - 0.05 / 8) = 0.55 * 2.49771
  const double expected = 0.55 * oracle::bisection_quantile(0.99375);
  CHECK(expected == doctest::Approx(1.37374).epsilon(1e-4));
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t l = 0; l < 2; ++l) CHECK(std::abs(mu(j, l) - expected) < 1e-9);
  }
}

TEST_CASE("plug-in threshold matches a direct recomputation and is symmetric") {
  std::mt19937_64 rng(31);
  const Matrix u = oracle::gaussian_matrix(50, 200, rng);
  const Matrix mu = plugin_thresholds(u, 1.1, 0.05);
  CHECK(max_norm(subtract(mu, oracle::direct_plugin_thresholds(u, 1.1, 0.05))) < 1e-12);
  for (std::size_t j = 0; j < 50; ++j) {
    for (std::size_t l = 0; l < 50; ++l) {
      CHECK(mu(j, l) == mu(l, j));
      CHECK(mu(j, l) >= 0.0);
    }
  }
}

TEST_CASE("plug-in threshold is homogeneous in each residual row") {
  std::mt19937_64 rng(32);
  const Matrix u = oracle::gaussian_matrix(6, 40, rng);
  Matrix scaled = u;
  const double c = -2.5;
  for (double& x : scaled.row(3)) x *= c;
  const Matrix a = plugin_thresholds(u, 1.1, 0.05);
  const Matrix b = plugin_thresholds(scaled, 1.1, 0.05);
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t l = 0; l < 6; ++l) {
      const double factor = (j == 3 ? std::abs(c) : 1.0) * (l == 3 ? std::abs(c) : 1.0);
      CHECK(b(j, l) == doctest::Approx(factor * a(j, l)).epsilon(1e-12));
    }
  }
}

TEST_CASE("plug-in threshold argument checks") {
  Matrix u(3, 5, 1.0);
  CHECK_THROWS_AS(plugin_thresholds(u, 1.0, 0.05), ArgumentError);
  CHECK_THROWS_AS(plugin_thresholds(u, 1.1, 0.0), ArgumentError);
  CHECK_THROWS_AS(plugin_thresholds(u, 1.1, 1.0), ArgumentError);
  CHECK_THROWS_AS(plugin_thresholds(Matrix(3, 1, 1.0), 1.1, 0.05), DimensionError);
}

TEST_CASE("zero studentizer gives an infinite threshold and a guard flag") {
  std::mt19937_64 rng(33);
  Matrix u = oracle::gaussian_matrix(4, 30, rng);
  for (double& x : u.row(2)) x = 0.0;
  const Matrix mu = plugin_thresholds(u, 1.1, 0.05);
  CHECK(std::isinf(mu(2, 0)));
  CHECK(std::isinf(mu(1, 2)));
  CHECK(std::isfinite(mu(0, 1)));

  const auto est = estimate_from_residuals(u, PlugInRule{});
  CHECK(est.sigma_u_hat(2, 0) == 0.0);
  const bool flagged = std::any_of(est.guard_flags.begin(), est.guard_flags.end(), [](auto& f) {
    return f.rfind(kZeroStudentizerWarning, 0) == 0;
  });
  CHECK(flagged);
}

TEST_CASE("soft threshold: definition, kill zone, identity") {
  const Matrix mu = filled(2, 0.2);
  CHECK(soft_threshold(from_pairs(1.0, 0.5), mu)(0, 1) == doctest::Approx(0.3));
  CHECK(soft_threshold(from_pairs(1.0, -0.5), mu)(0, 1) == doctest::Approx(-0.3));
  CHECK(soft_threshold(from_pairs(1.0, 0.2), mu)(0, 1) == 0.0);
  CHECK(soft_threshold(from_pairs(1.0, -0.1), mu)(0, 1) == 0.0);
  // Diagonal untouched even though mu_jj > 0.
  CHECK(soft_threshold(from_pairs(0.1, 0.5), mu)(0, 0) == 0.1);

  std::mt19937_64 rng(34);
  const auto s = oracle::random_symmetric(9, rng);
  CHECK(soft_threshold(s, Matrix(9, 9, 0.0)) == s);

  CHECK_THROWS_AS(soft_threshold(s, Matrix(8, 8)), DimensionError);
  CHECK_THROWS_AS(soft_threshold(from_pairs(1.0, 0.5), filled(2, -0.1)), ArgumentError);
}

TEST_CASE("property: soft threshold shrinks entrywise and preserves sign") {
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> m(0.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_symmetric(25, rng, 2.0);
    Matrix mu(25, 25);
    for (std::size_t j = 0; j < 25; ++j) {
      for (std::size_t l = j; l < 25; ++l) mu(j, l) = mu(l, j) = m(rng);
    }
    const auto out = soft_threshold(s, mu);
    for (std::size_t j = 0; j < 25; ++j) {
      CHECK(out(j, j) == s(j, j));
      for (std::size_t l = 0; l < 25; ++l) {
        if (j == l) continue;
        CHECK(std::abs(out(j, l)) <= std::max(std::abs(s(j, l)) - mu(j, l), 0.0) + 1e-15);
        CHECK(std::abs(out(j, l)) <= std::abs(s(j, l)));
        CHECK((out(j, l) == 0.0 || std::signbit(out(j, l)) == std::signbit(s(j, l))));
        CHECK(out(j, l) == out(l, j));
      }
    }
  }
}

TEST_CASE("estimate_covariance: fixed constant zero reproduces S_u") {
  const auto y = simulated_panel(20, 60, 1);
  const auto est = estimate_covariance(y, 2, FixedConstantRule{0.0});
  const auto s = residual_sample_covariance(fit_pc(y, 2));
  CHECK(est.sigma_u_hat == s);
  CHECK(est.threshold_constant == 0.0);
}

TEST_CASE("estimate_covariance: invariants and diagnostics") {
  const auto y = simulated_panel(40, 120, 2);
  const auto s = residual_sample_covariance(fit_pc(y, 2));
  const auto est = estimate_covariance(y, 2, PlugInRule{});
  for (std::size_t j = 0; j < 40; ++j) {
    CHECK(est.sigma_u_hat(j, j) == s(j, j));
    for (std::size_t l = j + 1; l < 40; ++l) {
      CHECK(std::abs(est.sigma_u_hat(j, l)) <=
            std::max(std::abs(s(j, l)) - est.thresholds(j, l), 0.0) + 1e-15);
    }
  }
  CHECK(est.zero_fraction >= 0.0);
  CHECK(est.zero_fraction <= 1.0);
  CHECK(est.min_eigenvalue == doctest::Approx(sym_eigen(est.sigma_u_hat).values.back()));
  CHECK(rule_name(est.rule) == "plugin");
}

TEST_CASE("estimate_covariance: zero fraction is monotone in c0") {
  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    const auto y = simulated_panel(30, 80, seed);
    const auto lo = estimate_covariance(y, 2, PlugInRule{1.1, 0.05});
    const auto hi = estimate_covariance(y, 2, PlugInRule{2.0, 0.05});
    CHECK(hi.zero_fraction >= lo.zero_fraction);
  }
}

TEST_CASE("estimate_covariance: scale equivariance of the zero pattern") {
  const auto y = simulated_panel(25, 70, 9);
  const auto base = estimate_covariance(y, 2, PlugInRule{});
  for (double c : {0.01, 3.0, 250.0}) {
    const auto scaled = estimate_covariance(DataMatrix(scale(y.values(), c)), 2, PlugInRule{});
    CHECK(zero_pattern(scaled.sigma_u_hat) == zero_pattern(base.sigma_u_hat));
    CHECK(scaled.zero_fraction == base.zero_fraction);
    CHECK(max_norm(subtract(scale(base.sigma_u_hat.matrix(), c * c),
                            scaled.sigma_u_hat.matrix())) <
          1e-9 * c * c * max_norm(base.sigma_u_hat));
  }
}

TEST_CASE("estimate_covariance: permutation equivariance of the zero pattern") {
  const auto y = simulated_panel(25, 70, 10);
  std::vector<std::size_t> perm(25);
  std::iota(perm.begin(), perm.end(), 0u);
  std::mt19937_64 rng(10);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix yp(25, 70);
  for (std::size_t j = 0; j < 25; ++j) {
    for (std::size_t i = 0; i < 70; ++i) yp(j, i) = y.values()(perm[j], i);
  }
  const auto a = estimate_covariance(y, 2, PlugInRule{});
  const auto b = estimate_covariance(DataMatrix(yp), 2, PlugInRule{});
  std::vector<double> ea, eb;
  for (std::size_t j = 0; j < 25; ++j) {
    for (std::size_t l = 0; l < 25; ++l) {
      CHECK((b.sigma_u_hat(j, l) == 0.0) == (a.sigma_u_hat(perm[j], perm[l]) == 0.0));
      CHECK(std::abs(b.sigma_u_hat(j, l) - a.sigma_u_hat(perm[j], perm[l])) < 1e-10);
      ea.push_back(a.sigma_u_hat(j, l));
      eb.push_back(b.sigma_u_hat(j, l));
    }
  }
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  for (std::size_t i = 0; i < ea.size(); ++i) CHECK(std::abs(ea[i] - eb[i]) < 1e-10);
}

TEST_CASE("estimate_covariance: diagonal Sigma_u is mostly zeroed") {
  DGPSpec spec;
  spec.p = 100;
  spec.n = 400;
  spec.k = 3;
  spec.sigma_u = Banded{0, 0.0};
  double total = 0.0;
  const std::size_t reps = 20;
  for (std::size_t r = 0; r < reps; ++r) {
    spec.seed = replication_seed(77, r);
    total += estimate_covariance(simulate(spec).y, 3, PlugInRule{}).zero_fraction;
  }
  CHECK(total / reps >= 0.95);
}

TEST_CASE("estimate_covariance: optional eigenvalue floor") {
  // Perfectly correlated residual rows give a singular S_u.
  std::mt19937_64 rng(36);
  Matrix u = oracle::gaussian_matrix(3, 50, rng);
  for (std::size_t i = 0; i < 50; ++i) u(2, i) = u(0, i) + u(1, i);
  const auto plain = estimate_from_residuals(u, FixedConstantRule{0.0});
  CHECK(plain.min_eigenvalue < 1e-10);

  const auto floored = estimate_from_residuals(u, FixedConstantRule{0.0}, {.eigen_floor = true});
  const double floor = 1e-8 * trace(plain.sigma_u_hat) / 3.0;
  CHECK(floored.min_eigenvalue >= floor * (1.0 - 1e-6));
  CHECK(std::find(floored.guard_flags.begin(), floored.guard_flags.end(),
                  std::string(kEigenFloorWarning)) != floored.guard_flags.end());
}

TEST_CASE("rule validation") {
  CHECK_THROWS_AS(validate(PlugInRule{1.0, 0.05}), ArgumentError);
  CHECK_THROWS_AS(validate(PlugInRule{1.1, 1.5}), ArgumentError);
  CHECK_THROWS_AS(validate(CrossValidationRule{1, {1.0}}), ArgumentError);
  CHECK_THROWS_AS(validate(CrossValidationRule{5, {}}), ArgumentError);
  CHECK_THROWS_AS(validate(CrossValidationRule{5, {1.0, -0.5}}), ArgumentError);
  CHECK_THROWS_AS(validate(FixedConstantRule{-1.0}), ArgumentError);
  CHECK_NOTHROW(validate(PlugInRule{}));
}

TEST_CASE("cross-validation constant") {
  const auto y = simulated_panel(20, 60, 11);
  CHECK(cv_threshold_constant(y, 2, 3, {1.7}) == 1.7);

  const std::vector<double> grid = {0.0, 0.5, 1.0, 1.5, 2.0, 3.0};
  const std::vector<double> dup = {3.0, 1.0, 1.0, 0.0, 0.5, 2.0, 0.5, 1.5, 3.0};
  const double chosen = cv_threshold_constant(y, 2, 4, grid);
  CHECK(cv_threshold_constant(y, 2, 4, dup) == chosen);
  CHECK(std::find(grid.begin(), grid.end(), chosen) != grid.end());

  // 60 observations in 31 folds leaves single-observation folds.
  CHECK_THROWS_AS(cv_threshold_constant(y, 2, 31, grid), ArgumentError);
  CHECK_NOTHROW(cv_threshold_constant(y, 2, 30, grid));

  const auto est = estimate_covariance(y, 2, CrossValidationRule{4, grid});
  CHECK(est.threshold_constant == chosen);
}

TEST_CASE("cross-validation: Frobenius error within 25% of the plug-in rule") {
  DGPSpec spec;
  spec.p = 50;
  spec.n = 200;
  spec.k = 3;
  spec.sigma_u = Banded{0, 0.0};
  const auto sigma = SymmetricMatrix::identity(50);
  double cv_err = 0.0;
  double plugin_err = 0.0;
  const std::size_t reps = 30;
  for (std::size_t r = 0; r < reps; ++r) {
    spec.seed = replication_seed(5150, r);
    const auto residuals = fit_pc(simulate(spec).y, 3).residuals;
    cv_err += frobenius_norm(
        subtract(estimate_from_residuals(residuals, CrossValidationRule{}).sigma_u_hat, sigma));
    plugin_err += frobenius_norm(
        subtract(estimate_from_residuals(residuals, PlugInRule{}).sigma_u_hat, sigma));
  }
  MESSAGE("mean Frobenius error: cv " << cv_err / reps << ", plug-in " << plugin_err / reps);
  CHECK(cv_err <= 1.25 * plugin_err);
}

TEST_CASE("regime guards") {
  CHECK(regime_guards(100, 200).empty());
  const auto big_n = regime_guards(5, 1000000);
  REQUIRE(big_n.size() == 1);
  CHECK(big_n[0] == kUnderThresholdingWarning);
  const auto big_p = regime_guards(10000, 30);
  REQUIRE(big_p.size() == 1);
  CHECK(big_p[0] == kModerateDeviationWarning);
  CHECK_THROWS_AS(regime_guards(1, 10), ArgumentError);
}
