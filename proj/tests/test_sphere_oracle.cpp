#include <gtest/gtest.h>

#include <cmath>

#include "dprime/sphere_oracle.hpp"

using namespace dprime;

namespace {

// Dropping the e^{-2 kappa R} terms, the l = 0 secular equation reduces to
// beta R^2 kappa^2 - 2 R^2 kappa - beta = 0.
double l0_kappa_quadratic(double R, double beta) { return (1 + std::sqrt(1 + beta * beta / (R * R))) / beta; }

}  // namespace

TEST(SphereOracle, GroundStateMatchesReducedQuadratic) {
  for (double R : {0.5, 1.0, 3.0})
    for (double beta : {0.1, 0.05, 0.01}) {
      const SphereLevel lv = sphere_level(0, R, beta);
      ASSERT_TRUE(lv.present);
      const double k = l0_kappa_quadratic(R, beta);
      EXPECT_NEAR(lv.lambda / (-k * k), 1.0, 1e-12 + 4 * std::exp(-2 * k * R)) << "R=" << R << " beta=" << beta;
    }
}

TEST(SphereOracle, ResidualTendsToMinusTwoOverRSquared) {
  // -(1 + sqrt(1 + b^2/R^2))^2 / b^2 = -4/b^2 - 2/R^2 + O(b^2)
  const double R = 1.0;
  for (double beta : {0.02, 0.01, 0.005}) {
    const double r = sphere_level(0, R, beta).lambda + 4 / (beta * beta);
    EXPECT_NEAR(r, -2.0 / (R * R), beta * beta);
  }
}

TEST(SphereOracle, ClosedFormSecularAgreesWithBesselPath) {
  for (double k : {5.0, 19.9, 20.0, 21.0, 300.0})
    EXPECT_NEAR(sphere_secular(0, 1.0, 0.1, k), sphere_secular_l0_closed(1.0, 0.1, k), 1e-12);
}

TEST(SphereOracle, SecularRootsMatchRadialFiniteDifferences) {
  const double R = 1.0, beta = 0.1, R_cut = R + 20 * beta;
  const SphereSpectrum s = sphere_eigenvalues(R, beta, 4);
  for (int l = 0; l <= 4; ++l) {
    const double exact = s.levels[l].lambda;
    const double a = radial_fd_oracle(R, beta, l, 2500, R_cut);
    const double b = radial_fd_oracle(R, beta, l, 5000, R_cut);
    const double c = radial_fd_oracle(R, beta, l, 10000, R_cut);
    EXPECT_LE(std::abs(c - exact) / std::abs(exact), 1e-5) << "l=" << l;
    const double ratio = (a - b) / (b - c);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
  }
}

TEST(SphereOracle, LargeRadiusApproachesLineValue) {
  const double lambda = sphere_level(0, 50.0, 0.1).lambda;
  EXPECT_NEAR(lambda / -400.0, 1.0, 1e-5);
  EXPECT_LT(lambda, -400.0);
}

TEST(SphereOracle, DegeneracyAndOrdering) {
  const SphereSpectrum s = sphere_eigenvalues(1.0, 0.05, 2);
  const auto e = s.expanded(9);
  ASSERT_EQ(e.size(), 9u);
  EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
  EXPECT_DOUBLE_EQ(e[1], e[3]);
  EXPECT_DOUBLE_EQ(e[4], e[8]);
  EXPECT_LT(e[0], e[1]);
}

TEST(SphereOracle, WeakCouplingLeavesOnlyTheGroundState) {
  const SphereSpectrum s = sphere_eigenvalues(1.0, 5.0, 3);
  EXPECT_TRUE(s.levels[0].present);
  for (int l = 1; l <= 3; ++l) EXPECT_FALSE(s.levels[l].present);
}

TEST(SphereOracle, GroundStateBelowVariationalBound) {
  for (double R : {0.5, 1.0, 2.0, 5.0})
    for (double beta : {0.01, 0.1, 0.5, 1.0, 3.0}) {
      const double bound = variational_bound(R, beta);
      EXPECT_NEAR(bound, -3.0 / (beta * R), 1e-12 * std::abs(bound));
      EXPECT_LE(sphere_level(0, R, beta).lambda, bound) << "R=" << R << " beta=" << beta;
    }
}

TEST(SphereOracle, TorusVariationalBoundIsNegative) {
  for (double beta : {0.01, 0.1, 1.0, 10.0}) {
    EXPECT_LT(torus_variational_bound(3.0, 1.0, beta), 0.0);
    EXPECT_NEAR(torus_variational_bound(3.0, 1.0, beta), -2.0 / beta, 1e-12 / beta);
  }
}
