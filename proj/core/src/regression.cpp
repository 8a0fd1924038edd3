#include "factorcov/regression.hpp"

#include <cmath>
#include <vector>

#include "factorcov/matrix.hpp"

namespace factorcov {

SlopeFit ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("ols_slope: x and y lengths differ");
  if (x.size() < 2) throw ArgumentError("ols_slope: need at least two points");
  const double m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ArgumentError("ols_slope: regressor values are all equal");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.standard_error = std::sqrt(rss / (m - 2.0) / sxx);
  }
  return fit;
}

SlopeFit loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("loglog_slope: x and y lengths differ");
  std::vector<double> lx(x.size());
  std::vector<double> ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ArgumentError("loglog_slope: values must be positive");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return ols_slope(lx, ly);
}

}  // namespace factorcov
