#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>

#include "gsim/error.hpp"

namespace gsim {

/// Largest exponent accepted before e^x is considered out of range.
inline constexpr double kExpLimit = 700.0;

namespace detail {

// Ei(x) = gamma + ln x + sum_{k>=1} x^k / (k k!). All terms are positive for
// x > 0, so the sum is well conditioned.
inline double ei_series(double x) noexcept {
  double term = 1.0;  // x^k / k!
  double sum = 0.0;
  for (int k = 1; k < 500; ++k) {
    term *= x / k;
    const double add = term / k;
    sum += add;
    if (add < sum * 1e-17) break;
  }
  return std::numbers::egamma + std::log(x) + sum;
}

// Ei(x) ~ e^x / x * sum_k k! / x^k, truncated before the smallest term.
inline double ei_asymptotic(double x) noexcept {
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = term * k / x;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return std::exp(x) / x * sum;
}

inline constexpr double kEiSwitch = 40.0;

}  // namespace detail

/// Exponential integral Ei(x) for x > 0.
inline double ei(double x) {
  if (!(x > 0.0)) throw Error(Errc::non_positive_argument, "Ei requires x > 0");
  if (x > kExpLimit) throw Error(Errc::overflow, "Ei argument exceeds 700");
  return x <= detail::kEiSwitch ? detail::ei_series(x) : detail::ei_asymptotic(x);
}

namespace detail {

// Unchecked variant for inner loops; caller guarantees 0 < x <= kExpLimit.
inline double ei_unchecked(double x) noexcept {
  return x <= kEiSwitch ? ei_series(x) : ei_asymptotic(x);
}

}  // namespace detail

/// Gauss-Legendre rule on [0, 1].
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    // Newton iteration on P_N starting from the Chebyshev-like guess.
    for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
      double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(N) + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (std::size_t k = 2; k <= N; ++k) {
          const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        if constexpr (N == 1) p0 = 1.0;
        dp = static_cast<double>(N) * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - z * z) * dp * dp);
      // map [-1, 1] -> [0, 1]
      nodes[i] = 0.5 * (1.0 - z);
      nodes[N - 1 - i] = 0.5 * (1.0 + z);
      weights[i] = 0.5 * w;
      weights[N - 1 - i] = 0.5 * w;
    }
  }
};

template <std::size_t N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule;
  return rule;
}

}  // namespace gsim
