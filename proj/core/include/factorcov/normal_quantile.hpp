#pragma once

namespace factorcov {

/// Standard normal CDF, evaluated through std::erfc so both tails keep
/// full relative precision.
double norm_cdf(double x);

/// Inverse standard normal CDF.
///
/// Acklam's rational approximation (relative error about 1.15e-9) followed
/// by one Halley correction against norm_cdf. Arguments above 1/2 are
/// reflected through 1 - q, which is exact in binary floating point, so
/// upper-tail quantiles such as 1 - alpha / (2 p^2) lose nothing.
///
/// Throws ArgumentError unless 0 < q < 1, NumericError if the result
/// is not finite.
double inv_norm_cdf(double q);

}  // namespace factorcov
