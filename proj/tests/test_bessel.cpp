#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>

#include "dprime/bessel.hpp"

using namespace dprime::bessel;

namespace {

// e^{-z} i_l(z) and e^{z} k_l(z) from cylinder functions of half-integer order.
double boost_i_scaled(int l, double z) {
  return std::sqrt(std::numbers::pi / (2 * z)) * boost::math::cyl_bessel_i(l + 0.5, z) * std::exp(-z);
}
double boost_k_scaled(int l, double z) {
  return std::sqrt(std::numbers::pi / (2 * z)) * boost::math::cyl_bessel_k(l + 0.5, z) * std::exp(z);
}

}  // namespace

TEST(Bessel, MatchesHalfIntegerCylinderFunctions) {
  for (int l = 0; l <= 12; ++l)
    for (double z : {0.05, 0.7, 3.0, 11.0, 29.0, 120.0, 600.0}) {
      EXPECT_NEAR(i_scaled(l, z) / boost_i_scaled(l, z), 1.0, 1e-12) << "l=" << l << " z=" << z;
      EXPECT_NEAR(k_scaled(l, z) / boost_k_scaled(l, z), 1.0, 1e-12) << "l=" << l << " z=" << z;
    }
}

TEST(Bessel, WronskianIsMinusOne) {
  for (int l = 0; l <= 10; ++l)
    for (double z : {0.1, 1.0, 7.5, 40.0, 400.0, 4e4}) EXPECT_NEAR(wronskian_check(l, z), -1.0, 1e-12);
}

TEST(Bessel, MillerAgreesWithSeriesAndClosedForm) {
  for (int l = 0; l <= 8; ++l)
    for (double z : {0.5, 5.0, 50.0}) EXPECT_NEAR(i_scaled_miller(l, z) / i_scaled(l, z), 1.0, 1e-12);
}

TEST(Bessel, KnownValues) {
  // i_0(1) = sinh 1, k_0(1) = pi/(2e).
  EXPECT_NEAR(i_scaled(0, 1.0) * std::exp(1.0), std::sinh(1.0), 1e-15);
  EXPECT_NEAR(k_scaled(0, 1.0) * std::exp(-1.0), std::numbers::pi / (2 * std::exp(1.0)), 1e-15);
}

TEST(Bessel, RejectsNonPositiveArgument) {
  EXPECT_THROW(i_scaled(0, 0.0), dprime::DomainError);
  EXPECT_THROW(k_scaled(1, -1.0), dprime::DomainError);
}
