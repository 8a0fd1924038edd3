#pragma once

#include <span>

namespace factorcov {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Classical OLS standard error of the slope; 0 when only two points.
  double standard_error = 0.0;
};

/// OLS of y on x with intercept. Throws ArgumentError with fewer than two
/// points, mismatched lengths, or when all x coincide.
SlopeFit ols_slope(std::span<const double> x, std::span<const double> y);

/// OLS of log(y) on log(x); all values must be positive.
SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace factorcov
