#pragma once

// Parametrized surfaces with a derivative tower up to total order 4.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "dprime/errors.hpp"

namespace dprime {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr int kMaxDerivativeOrder = 4;

struct ChartDomain {
  enum class Kind { periodic_box, rectangle, truncated_plane };

  Kind kind = Kind::rectangle;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<bool, 2> periodic{false, false};
  double radius = 0.0;  // truncated_plane only; the box is [-radius, radius]^2

  static ChartDomain periodic_box(double len1, double len2) {
    return {Kind::periodic_box, {0.0, 0.0}, {len1, len2}, {true, true}, 0.0};
  }
  static ChartDomain rectangle(std::array<double, 2> lo, std::array<double, 2> hi,
                               std::array<bool, 2> periodic = {false, false}) {
    return {Kind::rectangle, lo, hi, periodic, 0.0};
  }
  static ChartDomain truncated_plane(double radius) {
    return {Kind::truncated_plane, {-radius, -radius}, {radius, radius}, {false, false}, radius};
  }

  double length(int mu) const { return hi[mu] - lo[mu]; }

  bool contains(const Vec2& s) const {
    if (kind == Kind::truncated_plane) return s.norm() <= radius;
    for (int mu = 0; mu < 2; ++mu)
      if (!periodic[mu] && (s[mu] < lo[mu] || s[mu] > hi[mu])) return false;
    return true;
  }
};

/// A regular parametrization s -> gamma(s) of a surface in R^3.
///
/// derivative(i, j, s) returns the mixed partial d^i/ds1^i d^j/ds2^j of gamma;
/// implementations must support i + j <= kMaxDerivativeOrder. Charts are
/// immutable and may be shared across threads.
class SurfaceChart {
 public:
  virtual ~SurfaceChart() = default;

  virtual std::string name() const = 0;
  virtual ChartDomain domain() const = 0;
  virtual Vec3 derivative(int i, int j, const Vec2& s) const = 0;

  /// True when derivative() is exact rather than a difference quotient.
  virtual bool analytic_derivatives() const { return true; }
  virtual std::map<std::string, double> params() const { return {}; }

  /// Critical layer half-width below which the layer map is injective, if known.
  virtual double injectivity_width() const { return std::numeric_limits<double>::infinity(); }

  Vec3 point(const Vec2& s) const { return derivative(0, 0, s); }
};

using ChartPtr = std::shared_ptr<const SurfaceChart>;

namespace detail {

// d^k/dx^k of cos(x) and sin(x).
inline double cos_deriv(int k, double x) { return std::cos(x + k * std::numbers::pi / 2); }
inline double sin_deriv(int k, double x) { return std::sin(x + k * std::numbers::pi / 2); }

// d^k/dx^k exp(-a x^2) divided by exp(-a x^2), k <= 4.
inline double gauss_poly(int k, double a, double x) {
  switch (k) {
    case 0: return 1.0;
    case 1: return -2.0 * a * x;
    case 2: return 4.0 * a * a * x * x - 2.0 * a;
    case 3: return -8.0 * a * a * a * x * x * x + 12.0 * a * a * x;
    case 4: return 16.0 * a * a * a * a * x * x * x * x - 48.0 * a * a * a * x * x + 12.0 * a * a;
    default: throw DomainError("gauss_poly: order above 4");
  }
}

inline void check_order(int i, int j) {
  if (i < 0 || j < 0 || i + j > kMaxDerivativeOrder)
    throw DomainError("chart derivative order out of range");
}

}  // namespace detail

/// The plane z = 0, truncated to a disk of radius L for sampling purposes.
class PlaneChart final : public SurfaceChart {
 public:
  explicit PlaneChart(double L = 10.0) : L_(L) {}
  std::string name() const override { return "plane"; }
  ChartDomain domain() const override { return ChartDomain::truncated_plane(L_); }
  std::map<std::string, double> params() const override { return {{"L", L_}}; }
  Vec3 derivative(int i, int j, const Vec2& s) const override {
    detail::check_order(i, j);
    if (i == 0 && j == 0) return {s[0], s[1], 0.0};
    if (i == 1 && j == 0) return Vec3::UnitX();
    if (i == 0 && j == 1) return Vec3::UnitY();
    return Vec3::Zero();
  }

 private:
  double L_;
};

/// The flat rectangle [0, L1] x [0, L2] in the plane z = 0.
class PlaneBoxChart final : public SurfaceChart {
 public:
  PlaneBoxChart(double L1, double L2) : L1_(L1), L2_(L2) {
    if (!(L1 > 0) || !(L2 > 0)) throw DomainError("plane box sides must be positive");
  }
  std::string name() const override { return "plane-box"; }
  ChartDomain domain() const override { return ChartDomain::rectangle({0.0, 0.0}, {L1_, L2_}); }
  std::map<std::string, double> params() const override { return {{"L1", L1_}, {"L2", L2_}}; }
  Vec3 derivative(int i, int j, const Vec2& s) const override {
    return PlaneChart().derivative(i, j, s);
  }

 private:
  double L1_, L2_;
};

/// Sphere of radius R in latitude-longitude coordinates (theta, phi).
///
/// theta in (0, pi), phi periodic. The chart normal points outward, so the
/// Weingarten tensor is -delta/R: k1 = k2 = -1/R and M = -1/R.
class SphereChart final : public SurfaceChart {
 public:
  explicit SphereChart(double R) : R_(R) {
    if (!(R > 0)) throw DomainError("sphere radius must be positive");
  }
  std::string name() const override { return "sphere"; }
  ChartDomain domain() const override {
    return ChartDomain::rectangle({0.0, 0.0}, {std::numbers::pi, 2 * std::numbers::pi}, {false, true});
  }
  std::map<std::string, double> params() const override { return {{"R", R_}}; }
  double injectivity_width() const override { return R_; }
  double radius() const { return R_; }

  Vec3 derivative(int i, int j, const Vec2& s) const override {
    detail::check_order(i, j);
    using detail::cos_deriv;
    using detail::sin_deriv;
    const double st = sin_deriv(i, s[0]);
    return R_ * Vec3(st * cos_deriv(j, s[1]), st * sin_deriv(j, s[1]),
                     j == 0 ? cos_deriv(i, s[0]) : 0.0);
  }

 private:
  double R_;
};

/// Torus with tube radius r around a circle of radius R, coordinates
/// (theta, phi) both periodic; theta = 0 is the outer equator.
///
/// The chart normal points into the tube, giving
/// k_tube = 1/r and k_parallel = cos(theta)/(R + r cos(theta)).
class TorusChart final : public SurfaceChart {
 public:
  TorusChart(double R, double r) : R_(R), r_(r) {
    if (!(r > 0) || !(R > r)) throw DomainError("torus requires R > r > 0");
  }
  std::string name() const override { return "torus"; }
  ChartDomain domain() const override {
    return ChartDomain::periodic_box(2 * std::numbers::pi, 2 * std::numbers::pi);
  }
  std::map<std::string, double> params() const override { return {{"R", R_}, {"r", r_}}; }
  double injectivity_width() const override { return r_; }
  double major() const { return R_; }
  double minor() const { return r_; }

  Vec3 derivative(int i, int j, const Vec2& s) const override {
    detail::check_order(i, j);
    using detail::cos_deriv;
    using detail::sin_deriv;
    const double c = (i == 0 ? R_ : 0.0) + r_ * cos_deriv(i, s[0]);
    return {c * cos_deriv(j, s[1]), c * sin_deriv(j, s[1]),
            j == 0 ? r_ * sin_deriv(i, s[0]) : 0.0};
  }

  double gauss_exact(double theta) const {
    return std::cos(theta) / (r_ * (R_ + r_ * std::cos(theta)));
  }
  /// Mean curvature in this chart's orientation.
  double mean_exact(double theta) const {
    return 0.5 * (1.0 / r_ + std::cos(theta) / (R_ + r_ * std::cos(theta)));
  }

 private:
  double R_;
  double r_;
};

/// Graph surface z = h exp(-(s1^2 + s2^2) / (2 sigma^2)) truncated at radius L.
///
/// Upward normal (-f1, -f2, 1)/W; at the summit M = -h/sigma^2.
class BumpChart final : public SurfaceChart {
 public:
  BumpChart(double h, double sigma, double L) : h_(h), sigma_(sigma), L_(L) {
    if (!(sigma > 0) || !(L > 0)) throw DomainError("bump requires sigma > 0 and L > 0");
  }
  std::string name() const override { return "bump"; }
  ChartDomain domain() const override { return ChartDomain::truncated_plane(L_); }
  std::map<std::string, double> params() const override {
    return {{"h", h_}, {"sigma", sigma_}, {"L", L_}};
  }

  double height(int i, int j, const Vec2& s) const {
    const double a = 1.0 / (2 * sigma_ * sigma_);
    return h_ * detail::gauss_poly(i, a, s[0]) * detail::gauss_poly(j, a, s[1]) *
           std::exp(-a * s.squaredNorm());
  }

  Vec3 derivative(int i, int j, const Vec2& s) const override {
    detail::check_order(i, j);
    const double x = (i == 0 && j == 0) ? s[0] : (i == 1 && j == 0 ? 1.0 : 0.0);
    const double y = (i == 0 && j == 0) ? s[1] : (i == 0 && j == 1 ? 1.0 : 0.0);
    return {x, y, height(i, j, s)};
  }

 private:
  double h_;
  double sigma_;
  double L_;
};

/// A chart given only by its point map; derivatives are central differences.
///
/// Order-k derivatives use a tensor product of second-order central stencils
/// with step eps^(1/(k+2)) scaled by max(1, |s|); first derivatives therefore
/// use the cube root of machine precision.
class FunctionChart final : public SurfaceChart {
 public:
  using Map = std::function<Vec3(const Vec2&)>;

  FunctionChart(std::string name, Map map, ChartDomain domain,
                std::map<std::string, double> params = {})
      : name_(std::move(name)), map_(std::move(map)), domain_(domain), params_(std::move(params)) {}

  std::string name() const override { return name_; }
  ChartDomain domain() const override { return domain_; }
  std::map<std::string, double> params() const override { return params_; }
  bool analytic_derivatives() const override { return false; }

  Vec3 derivative(int i, int j, const Vec2& s) const override {
    detail::check_order(i, j);
    if (i == 0 && j == 0) return map_(s);
    const double scale = std::max(1.0, s.norm());
    const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (i + j + 2)) * scale;
    const auto& si = stencil(i);
    const auto& sj = stencil(j);
    const int hi = static_cast<int>(si.size()) / 2;
    const int hj = static_cast<int>(sj.size()) / 2;
    Vec3 acc = Vec3::Zero();
    for (int a = 0; a < static_cast<int>(si.size()); ++a) {
      if (si[a] == 0.0) continue;
      for (int b = 0; b < static_cast<int>(sj.size()); ++b) {
        if (sj[b] == 0.0) continue;
        acc += si[a] * sj[b] * map_(s + Vec2((a - hi) * h, (b - hj) * h));
      }
    }
    return acc / std::pow(h, i + j);
  }

 private:
  static const std::vector<double>& stencil(int k) {
    static const std::array<std::vector<double>, 5> table{
        std::vector<double>{1.0},
        std::vector<double>{-0.5, 0.0, 0.5},
        std::vector<double>{1.0, -2.0, 1.0},
        std::vector<double>{-0.5, 1.0, 0.0, -1.0, 0.5},
        std::vector<double>{1.0, -4.0, 6.0, -4.0, 1.0}};
    return table[k];
  }

  std::string name_;
  Map map_;
  ChartDomain domain_;
  std::map<std::string, double> params_;
};

/// The same surface with the two chart coordinates exchanged (flips the normal).
class SwappedChart final : public SurfaceChart {
 public:
  explicit SwappedChart(ChartPtr base) : base_(std::move(base)) {}
  std::string name() const override { return base_->name() + "-swapped"; }
  ChartDomain domain() const override {
    ChartDomain d = base_->domain();
    std::swap(d.lo[0], d.lo[1]);
    std::swap(d.hi[0], d.hi[1]);
    std::swap(d.periodic[0], d.periodic[1]);
    return d;
  }
  std::map<std::string, double> params() const override { return base_->params(); }
  bool analytic_derivatives() const override { return base_->analytic_derivatives(); }
  double injectivity_width() const override { return base_->injectivity_width(); }
  Vec3 derivative(int i, int j, const Vec2& s) const override {
    return base_->derivative(j, i, Vec2(s[1], s[0]));
  }

 private:
  ChartPtr base_;
};

/// Stereographic chart of the sphere of radius R from the north pole,
/// truncated at parameter radius L; difference-quotient derivatives.
inline ChartPtr make_stereographic_sphere(double R, double L = 4.0) {
  auto map = [R](const Vec2& s) {
    const double q = s.squaredNorm();
    return Vec3(2 * R * s[0] / (1 + q), 2 * R * s[1] / (1 + q), R * (q - 1) / (1 + q));
  };
  return std::make_shared<FunctionChart>("sphere-stereographic", map,
                                         ChartDomain::truncated_plane(L),
                                         std::map<std::string, double>{{"R", R}});
}

}  // namespace dprime
