#pragma once

#include <cmath>
#include <numbers>

namespace ampcs {

/// Standard normal density.
inline double phi(double x) {
  if (std::isinf(x)) return 0.0;
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal upper tail P(Z > x), accurate far into both tails.
inline double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Standard normal distribution function.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// P(l < Z < h) without cancellation when both ends sit in the same tail.
inline double normal_mass(double l, double h) {
  if (!(h > l)) return 0.0;
  if (l >= 0.0) return normal_sf(l) - normal_sf(h);
  if (h <= 0.0) return normal_cdf(h) - normal_cdf(l);
  return 1.0 - normal_cdf(l) - normal_sf(h);
}

/// Phi^{-1}(0.75).
inline constexpr double kNormalQ75 = 0.6744897501960817;

}  // namespace ampcs
