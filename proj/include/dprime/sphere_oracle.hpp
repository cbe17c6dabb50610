#pragma once

// Exact negative spectrum of the delta-prime Hamiltonian on a sphere of
// radius R by separation of variables, a radial finite-difference oracle for
// it, and the characteristic-function variational bound.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dprime/bessel.hpp"
#include "dprime/errors.hpp"
#include "dprime/roots.hpp"
#include "dprime/tridiagonal.hpp"

namespace dprime {

struct SphereLevel {
  int l = 0;
  bool present = false;
  double kappa = 0;
  double lambda = 0;
  int degeneracy = 1;
  double residual = 0;
};

struct SphereSpectrum {
  double R = 0, beta = 0;
  std::vector<SphereLevel> levels;

  /// Ascending eigenvalues with multiplicity 2l+1, at most `count` of them.
  std::vector<double> expanded(std::size_t count) const {
    std::vector<double> out;
    for (const auto& lv : levels) {
      if (!lv.present) continue;
      for (int m = 0; m < lv.degeneracy; ++m) out.push_back(lv.lambda);
    }
    std::sort(out.begin(), out.end());
    if (out.size() > count) out.resize(count);
    return out;
  }
};

/// Scaled secular function for angular momentum l:
///   -(2/pi) beta kappa z^2 i_l'(z) k_l'(z) - 1,  z = kappa R.
/// Matching A i_l(kappa r) inside and B k_l(kappa r) outside with continuous
/// radial derivative and -beta psi' = psi(R+) - psi(R-) gives, through the
/// Wronskian, -beta kappa i_l' k_l' = pi / (2 z^2).
inline double sphere_secular(int l, double R, double beta, double kappa) {
  const double z = kappa * R;
  return -2.0 / std::numbers::pi * beta * kappa * z * z * bessel::i_prime_scaled(l, z) *
             bessel::k_prime_scaled(l, z) -
         1.0;
}

/// Same function written with the elementary l = 0 forms
/// i_0 = sinh z / z and k_0 = (pi/2) e^{-z} / z.
inline double sphere_secular_l0_closed(double R, double beta, double kappa) {
  const double z = kappa * R;
  const double em = std::exp(-2 * z);
  // e^{-z} i_0'(z) = (z cosh z - sinh z) e^{-z} / z^2
  const double ip = (z * 0.5 * (1 + em) - 0.5 * (1 - em)) / (z * z);
  // e^{z} k_0'(z) = -(pi/2)(z + 1) / z^2
  const double kp = -0.5 * std::numbers::pi * (z + 1) / (z * z);
  return -2.0 / std::numbers::pi * beta * kappa * z * z * ip * kp - 1.0;
}

inline SphereLevel sphere_level(int l, double R, double beta) {
  SphereLevel lv;
  lv.l = l;
  lv.degeneracy = 2 * l + 1;
  auto f = [&](double k) { return sphere_secular(l, R, beta, k); };
  const double centre = 2.0 / beta;
  double eps = std::max(4.0 * std::exp(-4.0 * R / beta), 1e-15);
  double lo = std::max(1e-8 / R, centre * (1 - 10 * eps)), hi = centre * (1 + 10 * eps);
  // Geometric widening; the lower end is capped at a tiny positive kappa.
  const double floor = 1e-8 / R;
  while ((f(lo) < 0) == (f(hi) < 0)) {
    if (lo <= floor && hi > 1e6 * centre) return lv;  // absorbed into the continuum
    eps *= 2;
    lo = std::max(floor, centre * (1 - 10 * eps));
    hi = centre * (1 + 10 * eps);
  }
  auto df = [&](double k) {
    const double h = 1e-7 * k;
    return (f(k + h) - f(k - h)) / (2 * h);
  };
  const RootResult root = bisect_newton(f, df, lo, hi, 1e-13);
  lv.present = true;
  lv.kappa = root.root;
  lv.lambda = -root.root * root.root;
  lv.residual = root.residual;
  return lv;
}

/// Negative eigenvalues lambda_l = -kappa_l^2 for l = 0..l_max.
inline SphereSpectrum sphere_eigenvalues(double R, double beta, int l_max) {
  if (!(R > 0) || !(beta > 0)) throw DomainError("sphere_eigenvalues: R and beta must be positive");
  SphereSpectrum s;
  s.R = R;
  s.beta = beta;
  for (int l = 0; l <= l_max; ++l) s.levels.push_back(sphere_level(l, R, beta));
  return s;
}

/// Ghost-point / lumped finite-difference pencil of the radial problem in
/// u = r psi form on (0, R_cut) \ {R}, Dirichlet at 0 and R_cut. The delta-prime
/// matching for psi becomes the interface block of the quadratic form
///   int (u'^2 + l(l+1) u^2 / r^2) + (u(R+)^2 - u(R-)^2)/R - (u(R+) - u(R-))^2 / beta.
inline TridiagonalPencil radial_pencil(double R, double beta, int l, int n, double R_cut) {
  if (!(R_cut > R)) throw DomainError("radial oracle: R_cut must exceed R");
  const double h = R_cut / n;
  const int n_in = std::max(2, static_cast<int>(std::lround(R / h)));
  const int n_out = std::max(2, static_cast<int>(std::lround((R_cut - R) / h)));
  const double h1 = R / n_in, h2 = (R_cut - R) / n_out;
  const double ll = l * (l + 1.0);
  auto V = [&](double r) { return ll / (r * r); };

  const int N = n_in + n_out;  // inner nodes r = i h1 (i = 1..n_in), outer r = R + j h2 (j = 0..n_out-1)
  TridiagonalPencil P;
  P.diag.assign(N, 0.0);
  P.upper.assign(N - 1, 0.0);
  P.lower.assign(N - 1, 0.0);
  P.mass.assign(N, 0.0);
  for (int i = 1; i < n_in; ++i) {
    const int k = i - 1;
    P.diag[k] = 2.0 / h1 + h1 * V(i * h1);
    P.mass[k] = h1;
    P.upper[k] = P.lower[k] = -1.0 / h1;
  }
  const int im = n_in - 1, ip = n_in;
  P.diag[im] = 1.0 / h1 - 1.0 / beta - 1.0 / R + 0.5 * h1 * V(R);
  P.mass[im] = 0.5 * h1;
  P.upper[im] = P.lower[im] = 1.0 / beta;
  P.diag[ip] = 1.0 / h2 - 1.0 / beta + 1.0 / R + 0.5 * h2 * V(R);
  P.mass[ip] = 0.5 * h2;
  for (int j = 1; j < n_out; ++j) {
    const int k = ip + j;
    P.diag[k] = 2.0 / h2 + h2 * V(R + j * h2);
    P.mass[k] = h2;
  }
  for (int k = ip; k + 1 < N; ++k) P.upper[k] = P.lower[k] = -1.0 / h2;
  return P;
}

/// Lowest eigenvalue of the radial finite-difference operator for angular momentum l.
inline double radial_fd_oracle(double R, double beta, int l, int n, double R_cut) {
  return symmetrize(radial_pencil(R, beta, l, n, R_cut)).eigenvalue(0);
}

/// h_beta(chi) / ||chi||^2 for the characteristic function chi of the
/// enclosed volume: the gradient term vanishes and the jump term contributes
/// -area/beta, so the quotient is -area / (beta volume).
inline double characteristic_function_bound(double area, double volume, double beta) {
  if (!(beta > 0) || !(area > 0) || !(volume > 0)) throw DomainError("variational bound: bad arguments");
  return -area / (beta * volume);
}

/// -3 / (beta R) for the sphere.
inline double variational_bound(double R, double beta) {
  return characteristic_function_bound(4 * std::numbers::pi * R * R, 4.0 / 3.0 * std::numbers::pi * R * R * R,
                                       beta);
}

/// -2 / (beta r) for the torus R > r.
inline double torus_variational_bound(double R, double r, double beta) {
  return characteristic_function_bound(4 * std::numbers::pi * std::numbers::pi * R * r,
                                       2 * std::numbers::pi * std::numbers::pi * R * r * r, beta);
}

}  // namespace dprime
