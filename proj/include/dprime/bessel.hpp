#pragma once

// Exponentially scaled modified spherical Bessel functions
//
//   i_l(z) e^{-z},   k_l(z) e^{z},   k_0(z) = (pi/2) e^{-z} / z,
//
// with Wronskian i_l k_l' - i_l' k_l = -pi / (2 z^2). Closed forms are used
// for l <= 5 (power series for i_l at small z, where the closed form
// cancels), upward recurrence for k_l and normalized downward (Miller)
// recurrence for i_l above.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "dprime/errors.hpp"

namespace dprime::bessel {

inline constexpr int kClosedFormMax = 5;

namespace detail {

// (l + k)! / (k! (l - k)!)
inline double coefficient(int l, int k) {
  double c = 1.0;
  for (int m = l - k + 1; m <= l + k; ++m) c *= m;
  for (int m = 2; m <= k; ++m) c /= m;
  return c;
}

// i_l(z) e^{-z} by its power series (all terms positive).
inline double i_series_scaled(int l, double z) {
  double pref = 1.0;
  for (int m = 1; m <= l; ++m) pref *= z / (2 * m + 1);
  const double q = 0.5 * z * z;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (k * (2.0 * l + 2 * k + 1));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return pref * sum * std::exp(-z);
}

inline double i_closed_scaled(int l, double z) {
  double a = 0, b = 0, p = 1.0;
  for (int k = 0; k <= l; ++k) {
    const double c = coefficient(l, k) * p;
    a += (k % 2 == 0 ? c : -c);
    b += c;
    p /= 2 * z;
  }
  const double sign = (l % 2 == 0) ? 1.0 : -1.0;
  return (a - sign * std::exp(-2 * z) * b) / (2 * z);
}

inline double k_closed_scaled(int l, double z) {
  double s = 0, p = 1.0;
  for (int k = 0; k <= l; ++k) {
    s += coefficient(l, k) * p;
    p /= 2 * z;
  }
  return 0.5 * std::numbers::pi * s / z;
}

// Below this argument the closed form of i_l loses digits to cancellation.
inline double series_threshold(int l) { return 2.0 * l + 10.0; }

}  // namespace detail

/// e^{-z} i_l(z), z > 0.
inline double i_scaled(int l, double z);

/// e^{z} k_l(z), z > 0.
inline double k_scaled(int l, double z) {
  if (!(z > 0) || l < 0) throw DomainError("k_scaled: requires z > 0 and l >= 0");
  if (l <= kClosedFormMax) return detail::k_closed_scaled(l, z);
  double km = detail::k_closed_scaled(kClosedFormMax - 1, z);
  double k = detail::k_closed_scaled(kClosedFormMax, z);
  for (int n = kClosedFormMax; n < l; ++n) {
    const double kp = km + (2 * n + 1) / z * k;
    km = k;
    k = kp;
  }
  return k;
}

/// Downward recurrence for e^{-z} i_l(z), normalized by the closed-form i_0.
inline double i_scaled_miller(int l, double z) {
  const int start = l + 30 + static_cast<int>(z + 10.0 * std::sqrt(z + 1.0));
  double ip = 0.0, i = 1e-300, result = 0.0;
  for (int n = start; n > 0; --n) {
    const double im = ip + (2 * n + 1) / z * i;
    ip = i;
    i = im;
    if (n - 1 == l) result = i;
    if (std::abs(i) > 1e250) {
      i *= 1e-250;
      ip *= 1e-250;
      result *= 1e-250;
    }
  }
  const double i0 = (z < detail::series_threshold(0)) ? detail::i_series_scaled(0, z)
                                                     : detail::i_closed_scaled(0, z);
  return l == 0 ? i0 : result * (i0 / i);
}

inline double i_scaled(int l, double z) {
  if (!(z > 0) || l < 0) throw DomainError("i_scaled: requires z > 0 and l >= 0");
  if (z < detail::series_threshold(l)) return detail::i_series_scaled(l, z);
  if (l <= kClosedFormMax) return detail::i_closed_scaled(l, z);
  return i_scaled_miller(l, z);
}

/// e^{-z} i_l'(z) = e^{-z} (i_{l+1} + (l/z) i_l).
inline double i_prime_scaled(int l, double z) { return i_scaled(l + 1, z) + l / z * i_scaled(l, z); }

/// e^{z} k_l'(z) = e^{z} (-k_{l+1} + (l/z) k_l).
inline double k_prime_scaled(int l, double z) { return -k_scaled(l + 1, z) + l / z * k_scaled(l, z); }

/// z^2 (i_l k_l' - i_l' k_l) * (2/pi); equals -1 identically.
inline double wronskian_check(int l, double z) {
  return (i_scaled(l, z) * k_prime_scaled(l, z) - i_prime_scaled(l, z) * k_scaled(l, z)) * z * z * 2.0 /
         std::numbers::pi;
}

}  // namespace dprime::bessel
