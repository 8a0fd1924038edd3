#include "factorcov/normal_quantile.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "factorcov/matrix.hpp"

namespace factorcov {

namespace {

constexpr std::array<double, 6> kA = {-3.969683028665376e+01, 2.209460984245205e+02,
                                      -2.759285104469687e+02, 1.383577518672690e+02,
                                      -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB = {-5.447609879822406e+01, 1.615858368580409e+02,
                                      -1.556989798598866e+02, 6.680131188771972e+01,
                                      -1.328068155288572e+01};
constexpr std::array<double, 6> kC = {-7.784894002430293e-03, -3.223964580411365e-01,
                                      -2.400758277161838e+00, -2.549671348416539e+00,
                                      4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD = {7.784695709041462e-03, 3.224671290700398e-01,
                                      2.445134137142996e+00, 3.754408661907416e+00};

constexpr double kLowRegion = 0.02425;

// Lower-tail quantile for 0 < t <= 1/2.
double lower_quantile(double t) {
  double x;
  if (t < kLowRegion) {
    const double r = std::sqrt(-2.0 * std::log(t));
    x = (((((kC[0] * r + kC[1]) * r + kC[2]) * r + kC[3]) * r + kC[4]) * r + kC[5]) /
        ((((kD[0] * r + kD[1]) * r + kD[2]) * r + kD[3]) * r + 1.0);
  } else {
    const double u = t - 0.5;
    const double r = u * u;
    x = (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * u /
        (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
  }

  // Halley step on F(x) = Phi(x) - t.
  const double err = norm_cdf(x) - t;
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  const double step = err / density;
  return x - step / (1.0 + 0.5 * x * step);
}

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double inv_norm_cdf(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw ArgumentError("inv_norm_cdf: argument must lie in (0, 1), got " + std::to_string(q));
  }
  if (q == 0.5) return 0.0;
  const double z = q < 0.5 ? lower_quantile(q) : -lower_quantile(1.0 - q);
  if (!std::isfinite(z)) throw NumericError("inv_norm_cdf: quantile overflow");
  return z;
}

}  // namespace factorcov
