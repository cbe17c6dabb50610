#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "dprime/errors.hpp"

namespace dprime {

struct RootResult {
  double root = 0;
  double residual = 0;
  int iterations = 0;
};

/// Bisection on [lo, hi] (sign change required) followed by a safeguarded
/// Newton polish. Newton steps that leave the current bracket fall back to
/// bisection. Stops when |f| <= residual_tol or the bracket collapses.
template <class F, class DF>
RootResult bisect_newton(F&& f, DF&& df, double lo, double hi, double residual_tol = 1e-13,
                         int max_iter = 400) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0) return {lo, 0.0, 0};
  if (fhi == 0) return {hi, 0.0, 0};
  if ((flo < 0) == (fhi < 0)) throw NoRootError("no sign change in root bracket");

  // Coarse bisection to a relative width of 1e-6, then Newton.
  int it = 0;
  while (it < max_iter && (hi - lo) > 1e-6 * std::max(std::abs(lo), std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    ++it;
    if (fm == 0) return {mid, 0.0, it};
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  double fx = f(x);
  while (it < max_iter) {
    ++it;
    if (std::abs(fx) <= residual_tol) break;
    if ((fx < 0) == (flo < 0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double slope = df(x);
    double next = x - fx / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
      x = next;
      fx = f(x);
      break;
    }
    x = next;
    fx = f(x);
  }
  return {x, fx, it};
}

/// Brackets [grid[i], grid[i+1]] on which f changes sign.
template <class F>
std::vector<std::pair<double, double>> sign_change_brackets(F&& f, const std::vector<double>& grid) {
  std::vector<std::pair<double, double>> out;
  if (grid.empty()) return out;
  double prev = f(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    if (prev == 0 || (prev < 0) != (cur < 0)) {
      if (prev != 0 || i == 1) out.emplace_back(grid[i - 1], grid[i]);
    }
    prev = cur;
  }
  return out;
}

/// n points geometrically spaced from lo to hi (lo, hi > 0).
inline std::vector<double> geometric_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(r * i);
  g.back() = hi;
  return g;
}

}  // namespace dprime
