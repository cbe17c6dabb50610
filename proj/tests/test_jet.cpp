#include <gtest/gtest.h>

#include <cmath>

#include "dprime/jet.hpp"

using dprime::Jet2;

namespace {

Jet2 variable(int mu, double value) {
  Jet2 x(value);
  x.d[mu] = 1.0;
  return x;
}

}  // namespace

TEST(Jet, ProductAndQuotientMatchHandDerivatives) {
  const Jet2 x = variable(0, 0.7), y = variable(1, -1.3);
  const Jet2 f = x * x * y / (1.0 + y * y);  // x^2 y / (1 + y^2)
  const double X = 0.7, Y = -1.3, q = 1 + Y * Y;
  EXPECT_NEAR(f.v, X * X * Y / q, 1e-15);
  EXPECT_NEAR(f.d[0], 2 * X * Y / q, 1e-15);
  EXPECT_NEAR(f.d[1], X * X * (1 - Y * Y) / (q * q), 1e-15);
  EXPECT_NEAR(f.hess(0, 0), 2 * Y / q, 1e-15);
  EXPECT_NEAR(f.hess(0, 1), 2 * X * (1 - Y * Y) / (q * q), 1e-15);
  EXPECT_NEAR(f.hess(1, 1), X * X * (2 * Y * Y * Y - 6 * Y) / (q * q * q), 1e-14);
}

TEST(Jet, LogAndSqrtChainRule) {
  const Jet2 x = variable(0, 2.0), y = variable(1, 3.0);
  const Jet2 r = sqrt(x * x + y * y);
  EXPECT_NEAR(r.v, std::sqrt(13.0), 1e-15);
  EXPECT_NEAR(r.d[0], 2 / std::sqrt(13.0), 1e-15);
  EXPECT_NEAR(r.hess(0, 0), 9 / std::pow(13.0, 1.5), 1e-15);
  EXPECT_NEAR(r.hess(0, 1), -6 / std::pow(13.0, 1.5), 1e-15);

  const Jet2 l = log(x * y);
  EXPECT_NEAR(l.d[0], 0.5, 1e-15);
  EXPECT_NEAR(l.d[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(l.hess(0, 0), -0.25, 1e-15);
  EXPECT_NEAR(l.hess(0, 1), 0.0, 1e-15);
}

TEST(Jet, PartialDropsOneOrder) {
  const Jet2 x = variable(0, 1.5), y = variable(1, 0.5);
  const Jet2 f = x * x * x * y;
  const dprime::Jet1 fx = partial(f, 0);
  EXPECT_NEAR(fx.v, 3 * 1.5 * 1.5 * 0.5, 1e-14);
  EXPECT_NEAR(fx.d[0], 6 * 1.5 * 0.5, 1e-14);
  EXPECT_NEAR(fx.d[1], 3 * 1.5 * 1.5, 1e-14);
}
