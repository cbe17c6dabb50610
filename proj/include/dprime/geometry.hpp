#pragma once

// Differential geometry of a chart and of its layer neighbourhood
// gamma(s) + u n(s), |u| < d.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dprime/chart.hpp"
#include "dprime/errors.hpp"
#include "dprime/jet.hpp"

namespace dprime {

using Mat2 = Eigen::Matrix2d;

struct GeometryJet {
  Vec3 gamma;
  std::array<Vec3, 2> tangents;
  Vec3 normal;
  Mat2 metric;       // g_{mu nu}
  double metric_det; // g
  Mat2 weingarten;   // h_mu^nu, row mu, column nu
  double gauss;      // K
  double mean;       // M
  double k1;         // principal curvatures, k1 >= k2
  double k2;
};

struct LayerJet {
  double u;
  double xi;
  Mat2 G_munu;
  double G_det;
  double J;
  double V1;
  double V2;
  double sigma;  // (M - K u) / xi
};

namespace detail {

template <class T>
using Triple = std::array<T, 3>;

template <class T>
T dot(const Triple<T>& a, const Triple<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
Triple<T> cross(const Triple<T>& a, const Triple<T>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// First and second fundamental forms from gamma_{,1}, gamma_{,2},
/// gamma_{,11}, gamma_{,12}, gamma_{,22}. Works on doubles and on jets.
template <class T>
struct FundamentalForms {
  T g11, g12, g22;  // metric
  T b11, b12, b22;  // second fundamental form gamma_{,mu nu} . n
  T sqrt_g;

  T det_g() const { return g11 * g22 - g12 * g12; }
  T gauss() const { return (b11 * b22 - b12 * b12) / det_g(); }
  T mean() const { return 0.5 * (b11 * g22 - 2.0 * b12 * g12 + b22 * g11) / det_g(); }
};

template <class T>
FundamentalForms<T> fundamental_forms(const std::array<Triple<T>, 5>& d) {
  const auto& t1 = d[0];
  const auto& t2 = d[1];
  FundamentalForms<T> f;
  f.g11 = dot(t1, t1);
  f.g12 = dot(t1, t2);
  f.g22 = dot(t2, t2);
  const Triple<T> c = cross(t1, t2);
  f.sqrt_g = sqrt(dot(c, c));
  const T inv = inverse(f.sqrt_g);
  const Triple<T> n{c[0] * inv, c[1] * inv, c[2] * inv};
  f.b11 = dot(d[2], n);
  f.b12 = dot(d[3], n);
  f.b22 = dot(d[4], n);
  return f;
}

/// In-layer metric G = g - 2u b + u^2 b g^{-1} b as three components.
template <class T>
std::array<T, 3> layer_metric(const FundamentalForms<T>& f, double u) {
  const T dg = f.det_g();
  const T i11 = f.g22 / dg, i12 = -1.0 * f.g12 / dg, i22 = f.g11 / dg;
  // b g^{-1} b
  const T p11 = f.b11 * (i11 * f.b11 + i12 * f.b12) + f.b12 * (i12 * f.b11 + i22 * f.b12);
  const T p12 = f.b11 * (i11 * f.b12 + i12 * f.b22) + f.b12 * (i12 * f.b12 + i22 * f.b22);
  const T p22 = f.b12 * (i11 * f.b12 + i12 * f.b22) + f.b22 * (i12 * f.b12 + i22 * f.b22);
  return {f.g11 - 2.0 * u * f.b11 + u * u * p11, f.g12 - 2.0 * u * f.b12 + u * u * p12,
          f.g22 - 2.0 * u * f.b22 + u * u * p22};
}

inline Jet2 derivative_jet(const std::array<std::array<Vec3, 5>, 5>& D, int a, int b, int c) {
  Jet2 r;
  r.v = D[a][b][c];
  r.d = {D[a + 1][b][c], D[a][b + 1][c]};
  r.dd = {D[a + 2][b][c], D[a + 1][b + 1][c], D[a][b + 2][c]};
  return r;
}

}  // namespace detail

/// Pointwise geometry of the chart at s.
inline GeometryJet geometry_jet(const SurfaceChart& chart, const Vec2& s) {
  GeometryJet j;
  j.gamma = chart.point(s);
  j.tangents = {chart.derivative(1, 0, s), chart.derivative(0, 1, s)};
  const Vec3 c = j.tangents[0].cross(j.tangents[1]);
  const double scale = j.tangents[0].norm() * j.tangents[1].norm();
  if (!(c.norm() > 1e-12 * std::max(1.0, scale))) {
    std::ostringstream os;
    os << "degenerate tangents of chart '" << chart.name() << "' at s = (" << s[0] << ", " << s[1]
       << ")";
    throw SingularChartError(os.str());
  }
  j.normal = c / c.norm();
  j.metric << j.tangents[0].dot(j.tangents[0]), j.tangents[0].dot(j.tangents[1]),
      j.tangents[1].dot(j.tangents[0]), j.tangents[1].dot(j.tangents[1]);
  j.metric_det = j.metric.determinant();

  Mat2 second;
  const Vec3 x11 = chart.derivative(2, 0, s), x12 = chart.derivative(1, 1, s),
             x22 = chart.derivative(0, 2, s);
  second << x11.dot(j.normal), x12.dot(j.normal), x12.dot(j.normal), x22.dot(j.normal);
  // h_mu^nu = -n_{,mu} . gamma_{,sigma} g^{sigma nu} = b_{mu sigma} g^{sigma nu}
  j.weingarten = second * j.metric.inverse();
  j.gauss = j.weingarten.determinant();
  j.mean = 0.5 * j.weingarten.trace();
  // Principal curvatures from the symmetric form L^{-1} b L^{-T}, g = L L^T; this
  // keeps umbilic points accurate to rounding, unlike sqrt(M^2 - K).
  const Eigen::LLT<Mat2> llt(j.metric);
  const Mat2 Linv = Mat2(llt.matrixL()).inverse();
  const Eigen::SelfAdjointEigenSolver<Mat2> es(Linv * second * Linv.transpose(), Eigen::EigenvaluesOnly);
  j.k1 = es.eigenvalues()[1];
  j.k2 = es.eigenvalues()[0];
  return j;
}

/// Layer quantities at (s, u). V1 is evaluated by propagating the order-4
/// derivative tower of the chart through the formulas on second-order jets.
inline LayerJet layer_jet(const SurfaceChart& chart, const Vec2& s, double u, double d) {
  if (!(d > 0)) throw DomainError("layer half-width must be positive");
  if (std::abs(u) > d) throw DomainError("|u| exceeds the layer half-width");
  if (d >= chart.injectivity_width())
    throw LayerWidthError("layer half-width reaches the injectivity width of " + chart.name());

  std::array<std::array<Vec3, 5>, 5> D;
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) D[a][b] = chart.derivative(a, b, s);

  std::array<detail::Triple<Jet2>, 5> tower;
  const std::array<std::array<int, 2>, 5> offsets{{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
  for (int k = 0; k < 5; ++k)
    for (int c = 0; c < 3; ++c) tower[k][c] = detail::derivative_jet(D, offsets[k][0], offsets[k][1], c);

  const auto ff = detail::fundamental_forms(tower);
  if (!(ff.sqrt_g.v > 1e-12)) throw SingularChartError("degenerate tangents in layer_jet");

  const Jet2 K = ff.gauss();
  const Jet2 M = ff.mean();
  const Jet2 xi = 1.0 - 2.0 * u * M + u * u * K;
  if (!(xi.v > 0)) {
    std::ostringstream os;
    os << "layer self-intersection: xi = " << xi.v << " at s = (" << s[0] << ", " << s[1]
       << "), u = " << u;
    throw LayerWidthError(os.str());
  }
  const auto G = detail::layer_metric(ff, u);
  const Jet2 detG = G[0] * G[2] - G[1] * G[1];
  const Jet2 J = 0.5 * log(xi);

  // G^{mu nu}
  const Jet1 gi11 = truncate(G[2] / detG), gi12 = truncate(-1.0 * G[1] / detG),
             gi22 = truncate(G[0] / detG);
  const Jet1 sg = truncate(ff.sqrt_g);
  const Jet1 dJ1 = partial(J, 0), dJ2 = partial(J, 1);
  const Jet1 w1 = sg * (gi11 * dJ1 + gi12 * dJ2);
  const Jet1 w2 = sg * (gi12 * dJ1 + gi22 * dJ2);
  const double divergence = w1.d[0] + w2.d[1];
  const double quad = dJ1.v * (gi11.v * dJ1.v + gi12.v * dJ2.v) + dJ2.v * (gi12.v * dJ1.v + gi22.v * dJ2.v);

  LayerJet lj;
  lj.u = u;
  lj.xi = xi.v;
  lj.G_munu << G[0].v, G[1].v, G[1].v, G[2].v;
  lj.G_det = detG.v;
  lj.J = J.v;
  lj.V1 = divergence / sg.v + quad;
  lj.V2 = (K.v - M.v * M.v) / (xi.v * xi.v);
  lj.sigma = (M.v - K.v * u) / xi.v;
  return lj;
}

/// Cell-centred sample points covering the chart domain, n per direction.
/// Points of a truncated plane outside the disk are dropped.
inline std::vector<Vec2> sample_points(const ChartDomain& dom, int n) {
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 s(dom.lo[0] + (i + 0.5) * dom.length(0) / n, dom.lo[1] + (j + 0.5) * dom.length(1) / n);
      if (dom.kind == ChartDomain::Kind::truncated_plane && s.norm() > dom.radius) continue;
      pts.push_back(s);
    }
  return pts;
}

/// Grid vertices covering the chart domain, n intervals per direction, so
/// that symmetry points such as the origin are hit for even n.
inline std::vector<Vec2> vertex_points(const ChartDomain& dom, int n) {
  std::vector<Vec2> pts;
  const int last0 = dom.periodic[0] ? n - 1 : n, last1 = dom.periodic[1] ? n - 1 : n;
  for (int i = 0; i <= last0; ++i)
    for (int j = 0; j <= last1; ++j) {
      const Vec2 s(dom.lo[0] + i * dom.length(0) / n, dom.lo[1] + j * dom.length(1) / n);
      if (dom.kind == ChartDomain::Kind::truncated_plane && s.norm() > dom.radius) continue;
      pts.push_back(s);
    }
  return pts;
}

/// (1 +- d/rho)^2.
inline double c_plus(double d, double rho) { return (1 + d / rho) * (1 + d / rho); }
inline double c_minus(double d, double rho) { return (1 - d / rho) * (1 - d / rho); }

struct SupNorms {
  double sup_k1 = 0, sup_k2 = 0, sup_M = 0, sup_K = 0;
  double rho = std::numeric_limits<double>::infinity();
  double ellipticity_min = 0;  // c_- : smallest eigenvalue of g over the samples
  double ellipticity_max = 0;  // c_+ : largest eigenvalue of g
  int grid_resolution = 0;
  double refinement_change = 0;  // relative change of the sup-norms over the last doubling
  bool stable = true;
  std::string warning;
};

namespace detail {

inline SupNorms sup_norms_at(const SurfaceChart& chart, int n) {
  SupNorms r;
  r.grid_resolution = n;
  r.ellipticity_min = std::numeric_limits<double>::infinity();
  for (const Vec2& s : vertex_points(chart.domain(), n)) {
    GeometryJet j;
    try {
      j = geometry_jet(chart, s);
    } catch (const SingularChartError&) {
      continue;  // coordinate singularities such as the poles of a latitude-longitude chart
    }
    r.sup_k1 = std::max(r.sup_k1, std::abs(j.k1));
    r.sup_k2 = std::max(r.sup_k2, std::abs(j.k2));
    r.sup_M = std::max(r.sup_M, std::abs(j.mean));
    r.sup_K = std::max(r.sup_K, std::abs(j.gauss));
    Eigen::SelfAdjointEigenSolver<Mat2> es(j.metric, Eigen::EigenvaluesOnly);
    r.ellipticity_min = std::min(r.ellipticity_min, es.eigenvalues()[0]);
    r.ellipticity_max = std::max(r.ellipticity_max, es.eigenvalues()[1]);
  }
  const double kmax = std::max(r.sup_k1, r.sup_k2);
  r.rho = kmax > 0 ? 1.0 / kmax : std::numeric_limits<double>::infinity();
  return r;
}

inline double relative_change(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0 ? std::abs(a - b) / scale : 0.0;
}

inline double max_change(const SupNorms& a, const SupNorms& b) {
  return std::max({relative_change(a.sup_k1, b.sup_k1), relative_change(a.sup_k2, b.sup_k2),
                   relative_change(a.sup_M, b.sup_M), relative_change(a.sup_K, b.sup_K)});
}

}  // namespace detail

/// Sampled sup-norms of the curvatures at resolutions n, 2n, 4n; the values
/// of the finest grid are returned together with the last relative change.
inline SupNorms sup_norms(const SurfaceChart& chart, int n = 64) {
  const SupNorms a = detail::sup_norms_at(chart, n);
  const SupNorms b = detail::sup_norms_at(chart, 2 * n);
  SupNorms c = detail::sup_norms_at(chart, 4 * n);
  c.refinement_change = detail::max_change(b, c);
  if (detail::max_change(a, b) > 0.05 && c.refinement_change > 0.05) {
    c.stable = false;
    c.warning = "sup-norm estimate of " + chart.name() + " did not settle after two doublings";
  }
  return c;
}

struct XiViolation {
  Vec2 s;
  double u;
  double xi;
};

struct XiBoundsReport {
  double d = 0, rho = 0;
  double c_minus = 0, c_plus = 0;
  double min_xi = 0, max_xi = 0;
  std::size_t samples = 0;
  std::vector<XiViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Samples xi over the layer of half-width d (u in [-d, d], n_u points) and
/// checks C_-(d) <= xi <= C_+(d).
inline XiBoundsReport check_xi_bounds(const SurfaceChart& chart, double d, int n_samples,
                                      const SupNorms& norms, int n_u = 21) {
  if (!(d < norms.rho)) throw LayerWidthError("check_xi_bounds requires d < rho");
  XiBoundsReport r;
  r.d = d;
  r.rho = norms.rho;
  r.c_minus = c_minus(d, norms.rho);
  r.c_plus = c_plus(d, norms.rho);
  r.min_xi = std::numeric_limits<double>::infinity();
  r.max_xi = -r.min_xi;
  const double tol = 1e-12;
  for (const Vec2& s : sample_points(chart.domain(), n_samples)) {
    const GeometryJet j = geometry_jet(chart, s);
    for (int k = 0; k < n_u; ++k) {
      const double u = -d + 2.0 * d * k / (n_u - 1);
      const double xi = 1.0 - 2.0 * j.mean * u + j.gauss * u * u;
      r.min_xi = std::min(r.min_xi, xi);
      r.max_xi = std::max(r.max_xi, xi);
      ++r.samples;
      if (xi < r.c_minus * (1 - tol) || xi > r.c_plus * (1 + tol)) r.violations.push_back({s, u, xi});
    }
  }
  return r;
}

inline XiBoundsReport check_xi_bounds(const SurfaceChart& chart, double d, int n_samples) {
  return check_xi_bounds(chart, d, n_samples, sup_norms(chart, std::max(8, n_samples / 4)));
}

}  // namespace dprime
