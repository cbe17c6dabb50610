#pragma once

// Generalized symmetric tridiagonal eigenproblems A x = lambda W x with a
// positive diagonal W, solved by Sturm-sequence bisection.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dprime/errors.hpp"

namespace dprime {

/// A tridiagonal matrix stored by diagonals (lower may differ from upper)
/// together with a diagonal mass.
struct TridiagonalPencil {
  std::vector<double> diag;
  std::vector<double> upper;  // A(i, i+1)
  std::vector<double> lower;  // A(i+1, i)
  std::vector<double> mass;

  std::size_t size() const { return diag.size(); }
};

/// Symmetric tridiagonal matrix similar to W^{-1} A (diag, off).
struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  /// Number of eigenvalues strictly below x.
  std::size_t count_below(double x) const {
    std::size_t count = 0;
    double q = 1.0;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i < diag.size(); ++i) {
      q = diag[i] - x - (i > 0 ? off[i - 1] * off[i - 1] / q : 0.0);
      if (q == 0) q = -tiny;
      if (q < 0) ++count;
    }
    return count;
  }

  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < diag.size() ? std::abs(off[i]) : 0.0);
      lo = std::min(lo, diag[i] - r);
      hi = std::max(hi, diag[i] + r);
    }
    return {lo, hi};
  }

  /// k-th smallest eigenvalue (k = 0 is the lowest) by bisection.
  double eigenvalue(std::size_t k) const {
    auto [lo, hi] = gershgorin();
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (count_below(mid) > k)
        hi = mid;
      else
        lo = mid;
    }
    return 0.5 * (lo + hi);
  }
};

/// Diagonal similarity W^{-1/2} D A D^{-1} W^{-1/2} that makes the pencil
/// symmetric; requires upper(i) * lower(i) > 0 wherever either is nonzero.
inline SymmetricTridiagonal symmetrize(const TridiagonalPencil& p) {
  SymmetricTridiagonal s;
  const std::size_t n = p.size();
  s.diag.resize(n);
  s.off.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(p.mass[i] > 0)) throw DomainError("tridiagonal pencil: mass must be positive");
    s.diag[i] = p.diag[i] / p.mass[i];
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double prod = p.upper[i] * p.lower[i];
    if (prod < 0 || (prod == 0 && (p.upper[i] != 0 || p.lower[i] != 0)))
      throw DomainError("tridiagonal pencil is not symmetrizable");
    const double sign = p.upper[i] < 0 ? -1.0 : 1.0;
    s.off[i] = sign * std::sqrt(prod / (p.mass[i] * p.mass[i + 1]));
  }
  return s;
}

}  // namespace dprime
