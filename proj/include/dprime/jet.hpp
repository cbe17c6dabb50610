#pragma once

// Truncated two-variable Taylor arithmetic.
//
// A Jet<2> carries a value, its gradient and its Hessian with respect to the
// chart coordinates (s1, s2); Jet<1> drops the Hessian. Curvature potentials
// that need second s-derivatives of curvature are evaluated by pushing the
// chart's derivative tower through ordinary formulas written on jets.

#include <array>
#include <cmath>

namespace dprime {

template <int Order>
struct Jet {
  static_assert(Order == 1 || Order == 2);

  double v = 0.0;
  std::array<double, 2> d{};  // d/ds_mu
  std::array<double, 3> dd{}; // d2/ds1ds1, d2/ds1ds2, d2/ds2ds2 (Order == 2 only)

  Jet() = default;
  constexpr Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static constexpr int hess_index(int mu, int nu) { return mu + nu; }

  double hess(int mu, int nu) const { return dd[hess_index(mu, nu)]; }
};

using Jet1 = Jet<1>;
using Jet2 = Jet<2>;

/// Partial derivative with respect to s_mu; loses one order.
inline Jet1 partial(const Jet2& a, int mu) {
  Jet1 r;
  r.v = a.d[mu];
  r.d[0] = a.hess(mu, 0);
  r.d[1] = a.hess(mu, 1);
  return r;
}

inline Jet1 truncate(const Jet2& a) {
  Jet1 r;
  r.v = a.v;
  r.d = a.d;
  return r;
}

template <int N>
Jet<N> operator+(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  r.v = a.v + b.v;
  for (int i = 0; i < 2; ++i) r.d[i] = a.d[i] + b.d[i];
  if constexpr (N == 2)
    for (int i = 0; i < 3; ++i) r.dd[i] = a.dd[i] + b.dd[i];
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a) {
  Jet<N> r;
  r.v = -a.v;
  for (int i = 0; i < 2; ++i) r.d[i] = -a.d[i];
  if constexpr (N == 2)
    for (int i = 0; i < 3; ++i) r.dd[i] = -a.dd[i];
  return r;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, const Jet<N>& b) {
  return a + (-b);
}

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
  Jet<N> r;
  r.v = a.v * b.v;
  for (int i = 0; i < 2; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  if constexpr (N == 2) {
    for (int mu = 0; mu < 2; ++mu)
      for (int nu = mu; nu < 2; ++nu)
        r.dd[mu + nu] = a.hess(mu, nu) * b.v + a.d[mu] * b.d[nu] +
                        a.d[nu] * b.d[mu] + a.v * b.hess(mu, nu);
  }
  return r;
}

template <int N>
Jet<N> operator*(double s, const Jet<N>& a) {
  Jet<N> r = a;
  r.v *= s;
  for (auto& x : r.d) x *= s;
  if constexpr (N == 2)
    for (auto& x : r.dd) x *= s;
  return r;
}

template <int N>
Jet<N> operator*(const Jet<N>& a, double s) {
  return s * a;
}

template <int N>
Jet<N> operator+(const Jet<N>& a, double s) {
  Jet<N> r = a;
  r.v += s;
  return r;
}

template <int N>
Jet<N> operator+(double s, const Jet<N>& a) {
  return a + s;
}

template <int N>
Jet<N> operator-(double s, const Jet<N>& a) {
  return (-a) + s;
}

template <int N>
Jet<N> operator-(const Jet<N>& a, double s) {
  return a + (-s);
}

/// Scalar chain rule: f(a) given f(a.v), f'(a.v), f''(a.v).
template <int N>
Jet<N> chain(const Jet<N>& a, double f0, double f1, double f2) {
  Jet<N> r;
  r.v = f0;
  for (int i = 0; i < 2; ++i) r.d[i] = f1 * a.d[i];
  if constexpr (N == 2) {
    for (int mu = 0; mu < 2; ++mu)
      for (int nu = mu; nu < 2; ++nu)
        r.dd[mu + nu] = f1 * a.hess(mu, nu) + f2 * a.d[mu] * a.d[nu];
  }
  return r;
}

template <int N>
Jet<N> inverse(const Jet<N>& a) {
  const double x = a.v;
  return chain(a, 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
  return a * inverse(b);
}

template <int N>
Jet<N> operator/(const Jet<N>& a, double s) {
  return (1.0 / s) * a;
}

template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double r = std::sqrt(a.v);
  return chain(a, r, 0.5 / r, -0.25 / (r * a.v));
}

template <int N>
Jet<N> log(const Jet<N>& a) {
  return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}

}  // namespace dprime
