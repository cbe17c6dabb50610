#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dprime/geometry.hpp"

using namespace dprime;

namespace {

constexpr double kPi = std::numbers::pi;

ChartPtr fd_torus(double R, double r) {
  auto map = [R, r](const Vec2& s) {
    const double c = R + r * std::cos(s[0]);
    return Vec3(c * std::cos(s[1]), c * std::sin(s[1]), r * std::sin(s[0]));
  };
  return std::make_shared<FunctionChart>("torus-fd", map, ChartDomain::periodic_box(2 * kPi, 2 * kPi));
}

}  // namespace

TEST(Geometry, SphereCurvatures) {
  for (double R : {0.5, 1.0, 3.0}) {
    const SphereChart chart(R);
    for (const Vec2& s : sample_points(chart.domain(), 9)) {
      const GeometryJet j = geometry_jet(chart, s);
      EXPECT_NEAR(j.gauss, 1 / (R * R), 1e-12 / (R * R));
      EXPECT_NEAR(std::abs(j.mean), 1 / R, 1e-12 / R);
      EXPECT_NEAR(j.k1, j.k2, 1e-12 / R);
      EXPECT_NEAR(j.metric_det, std::pow(R, 4) * std::pow(std::sin(s[0]), 2), 1e-12 * std::pow(R, 4));
    }
  }
}

TEST(Geometry, TorusMatchesClosedForms) {
  const TorusChart chart(3.0, 1.0);
  for (const Vec2& s : sample_points(chart.domain(), 40)) {
    const GeometryJet j = geometry_jet(chart, s);
    EXPECT_NEAR(j.gauss, chart.gauss_exact(s[0]), 1e-13);
    EXPECT_NEAR(j.mean, chart.mean_exact(s[0]), 1e-13);
    EXPECT_NEAR(j.k1, 1.0, 1e-12);  // the tube direction
  }
}

TEST(Geometry, BumpSummitAndFlatFar) {
  const double h = 1.3, sigma = 0.7;
  const BumpChart chart(h, sigma, 12.0);
  const GeometryJet top = geometry_jet(chart, Vec2(0, 0));
  EXPECT_NEAR(top.mean, -h / (sigma * sigma), 1e-13);
  EXPECT_NEAR(top.gauss, std::pow(h / (sigma * sigma), 2), 1e-12);
  const GeometryJet far = geometry_jet(chart, Vec2(11, 0));
  EXPECT_LT(std::abs(far.gauss), 1e-40);
  EXPECT_LT(std::abs(far.mean), 1e-40);
}

TEST(Geometry, BumpRadialProfileAgainstGraphFormulas) {
  // For z = f(r): K = f' f'' / (r W^4), 2M = f''/W^3 + f'/(r W) with upward normal.
  const double h = 1.0, sigma = 1.0;
  const BumpChart chart(h, sigma, 12.0);
  for (double r : {0.3, 0.9, 1.7, 2.5}) {
    const double f1 = -h * r * std::exp(-r * r / 2), f2 = h * (r * r - 1) * std::exp(-r * r / 2);
    const double W = std::sqrt(1 + f1 * f1);
    const GeometryJet j = geometry_jet(chart, Vec2(r / std::sqrt(2.0), r / std::sqrt(2.0)));
    EXPECT_NEAR(j.gauss, f1 * f2 / (r * std::pow(W, 4)), 1e-13);
    EXPECT_NEAR(j.mean, 0.5 * (f2 / std::pow(W, 3) + f1 / (r * W)), 1e-13);
  }
}

TEST(Geometry, DifferenceQuotientChartAgreesWithAnalyticChart) {
  const TorusChart exact(3.0, 1.0);
  const ChartPtr fd = fd_torus(3.0, 1.0);
  for (const Vec2& s : sample_points(exact.domain(), 7)) {
    const GeometryJet a = geometry_jet(exact, s), b = geometry_jet(*fd, s);
    EXPECT_NEAR(a.gauss, b.gauss, 1e-5);
    EXPECT_NEAR(a.mean, b.mean, 1e-5);
    const LayerJet la = layer_jet(exact, s, 0.1, 0.2), lb = layer_jet(*fd, s, 0.1, 0.2);
    EXPECT_NEAR(la.V1, lb.V1, 1e-3);
  }
}

TEST(Geometry, CurvatureIsChartInvariant) {
  const double R = 2.0;
  const SphereChart latlong(R);
  const ChartPtr stereo = make_stereographic_sphere(R);
  for (const Vec2& s : {Vec2(0.3, -0.2), Vec2(1.5, 0.7), Vec2(-2.0, 3.0)}) {
    const GeometryJet a = geometry_jet(*stereo, s);
    EXPECT_NEAR(a.gauss, 1 / (R * R), 1e-6);
    EXPECT_NEAR(std::abs(a.mean), 1 / R, 1e-6);
    // the same point in latitude-longitude coordinates
    const Vec3 p = a.gamma;
    const Vec2 t(std::acos(p.z() / R), std::atan2(p.y(), p.x()) + (p.y() < 0 ? 2 * kPi : 0.0));
    const GeometryJet b = geometry_jet(latlong, t);
    EXPECT_NEAR((b.gamma - p).norm(), 0.0, 1e-12);
    EXPECT_NEAR(a.gauss, b.gauss, 1e-6);
    EXPECT_NEAR(std::abs(a.mean), std::abs(b.mean), 1e-6);
  }
}

TEST(Geometry, SwappingCoordinatesFlipsOnlyTheMeanCurvature) {
  auto torus = std::make_shared<TorusChart>(3.0, 1.0);
  const SwappedChart swapped(torus);
  for (const Vec2& s : sample_points(torus->domain(), 6)) {
    const GeometryJet a = geometry_jet(*torus, s);
    const GeometryJet b = geometry_jet(swapped, Vec2(s[1], s[0]));
    EXPECT_NEAR(a.gauss, b.gauss, 1e-13);
    EXPECT_NEAR(a.mean, -b.mean, 1e-13);
  }
}

TEST(Geometry, CurvatureAndLayerIdentities) {
  const TorusChart torus(3.0, 1.0);
  const BumpChart bump(1.0, 1.0, 12.0);
  for (const SurfaceChart* c : {static_cast<const SurfaceChart*>(&torus), static_cast<const SurfaceChart*>(&bump)})
    for (const Vec2& s : sample_points(c->domain(), 30)) {
      const GeometryJet j = geometry_jet(*c, s);
      EXPECT_NEAR(j.gauss - j.mean * j.mean + 0.25 * (j.k1 - j.k2) * (j.k1 - j.k2), 0.0, 1e-12);
      const LayerJet l = layer_jet(*c, s, -0.15, 0.3);
      EXPECT_NEAR(l.G_det, j.metric_det * l.xi * l.xi, 1e-10 * j.metric_det);
      EXPECT_NEAR(l.xi, (1 + 0.15 * j.k1) * (1 + 0.15 * j.k2), 1e-12);
      EXPECT_NEAR(l.V2, (j.gauss - j.mean * j.mean) / (l.xi * l.xi), 1e-12);
    }
}

TEST(Geometry, SphereLayerFactor) {
  const SphereChart chart(1.0);
  const Vec2 s(1.0, 2.0);
  const double M = geometry_jet(chart, s).mean;
  const LayerJet l = layer_jet(chart, s, -0.1, 0.5);
  EXPECT_NEAR(l.xi, (1 + 0.1 * M) * (1 + 0.1 * M), 1e-14);
  EXPECT_NEAR(l.xi, M < 0 ? 0.81 : 1.21, 1e-14);
  EXPECT_NEAR(l.V1, 0.0, 1e-12);  // xi is constant on a sphere
  EXPECT_NEAR(l.V2, 0.0, 1e-12);
}

TEST(Geometry, PlaneLayerIsFlat) {
  const PlaneChart chart(5.0);
  const LayerJet l = layer_jet(chart, Vec2(1.0, -2.0), 0.3, 1.0);
  EXPECT_EQ(l.xi, 1.0);
  EXPECT_EQ(l.V1, 0.0);
  EXPECT_EQ(l.V2, 0.0);
}

TEST(Geometry, TorusLayerPotentialAgainstOneDimensionalFormula) {
  // G is diagonal with G_11 = (r - u)^2, so
  // V1 = (1/(r rho)) d/dth (r rho J' / (r - u)^2) + J'^2/(r - u)^2,
  // rho = R + r cos th, J = log((1 - u/r)(1 - u cos th/rho))/2.
  const double R = 3.0, r = 1.0, u = 0.2;
  const TorusChart chart(R, r);
  auto J = [&](double th) {
    const double rho = R + r * std::cos(th);
    return 0.5 * std::log((1 - u / r) * (1 - u * std::cos(th) / rho));
  };
  const double h = 1e-3;
  auto dJ = [&](double th) {
    return (-J(th + 2 * h) + 8 * J(th + h) - 8 * J(th - h) + J(th - 2 * h)) / (12 * h);
  };
  auto flux = [&](double th) { return r * (R + r * std::cos(th)) * dJ(th) / ((r - u) * (r - u)); };
  for (double th : {0.0, 0.7, 2.0, 3.1, 4.5}) {
    const double dflux = (-flux(th + 2 * h) + 8 * flux(th + h) - 8 * flux(th - h) + flux(th - 2 * h)) / (12 * h);
    const double expected = dflux / (r * (R + r * std::cos(th))) + dJ(th) * dJ(th) / ((r - u) * (r - u));
    EXPECT_NEAR(layer_jet(chart, Vec2(th, 1.0), u, 0.5).V1, expected, 1e-9);
  }
}

TEST(Geometry, XiBoundsOnTorusAndBump) {
  const TorusChart torus(3.0, 1.0);
  const SupNorms tn = sup_norms(torus, 16);
  EXPECT_NEAR(tn.rho, 1.0, 1e-12);
  EXPECT_NEAR(tn.sup_K, 0.5, 1e-12);  // attained at theta = pi, a grid vertex
  const XiBoundsReport xb = check_xi_bounds(torus, 0.4, 32, tn);
  EXPECT_TRUE(xb.ok());
  EXPECT_NEAR(xb.c_minus, 0.36, 1e-14);
  EXPECT_NEAR(xb.c_plus, 1.96, 1e-14);

  const BumpChart bump(1.0, 1.0, 12.0);
  const SupNorms bn = sup_norms(bump, 32);
  EXPECT_TRUE(bn.stable);
  EXPECT_TRUE(check_xi_bounds(bump, 0.5 * bn.rho, 64, bn).ok());
}

TEST(Geometry, PlaneHasInfiniteReach) {
  const PlaneChart plane(4.0);
  const SupNorms n = sup_norms(plane, 8);
  EXPECT_TRUE(std::isinf(n.rho));
  EXPECT_EQ(n.sup_M, 0.0);
}

TEST(Geometry, Failures) {
  const SphereChart sphere(1.0);
  EXPECT_THROW(geometry_jet(sphere, Vec2(0.0, 1.0)), SingularChartError);
  const TorusChart torus(3.0, 1.0);
  EXPECT_THROW(layer_jet(torus, Vec2(0.5, 0.5), 0.0, 1.0), LayerWidthError);
  EXPECT_THROW(layer_jet(torus, Vec2(0.5, 0.5), 0.3, 0.2), DomainError);
  EXPECT_THROW(check_xi_bounds(torus, 1.5, 8, sup_norms(torus, 8)), LayerWidthError);
  EXPECT_THROW(TorusChart(1.0, 2.0), DomainError);
}
