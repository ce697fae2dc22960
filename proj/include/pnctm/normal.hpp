#pragma once

// Scalar standard-normal functions: density, CDF, log-CDF and quantile.
// Everything goes through the complementary error function so that the
// lower tail keeps full relative accuracy.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace pnctm {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

/// Phi(x). Relative accuracy is preserved for large negative x.
inline double std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("std_normal_cdf: NaN argument");
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

namespace detail {

// log Phi(x) for x << 0 from the Mills-ratio asymptotic series
//   Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
inline double log_cdf_lower_tail(double x) {
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv_x2;
    sum += term;
  }
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(sum);
}

}  // namespace detail

/// log Phi(x), finite for every finite x.
inline double log_std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::domain_error("log_std_normal_cdf: NaN argument");
  if (x > 5.0) return std::log1p(-0.5 * std::erfc(x * kInvSqrt2));
  // erfc stays in the normal double range down to about x = -37.5
  if (x > -36.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  return detail::log_cdf_lower_tail(x);
}

/// Phi^{-1}(p) for p in (0, 1).
inline double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_normal_quantile: p outside (0,1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace pnctm
