#pragma once

// The comparison operator S = -Delta + K - M^2 and the longitudinal bracket
// operators U_d^+- = -C_+- Delta + C_+-^{-2}(K - M^2) + v^+- d on tensor grids.
//
// Laplace-Beltrami is discretized in weak form with bilinear elements whose
// coefficient sqrt(g) g^{mu nu} is frozen at the cell centre; the mass is
// lumped to sqrt(g) ds1 ds2 at the nodes and the potential is nodal. The
// result is a symmetric generalized eigenproblem A x = mu W x.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dprime/chart.hpp"
#include "dprime/eigensolver.hpp"
#include "dprime/errors.hpp"
#include "dprime/geometry.hpp"
#include "dprime/parallel.hpp"
#include "dprime/variant.hpp"

namespace dprime {

/// Closure of a grid direction. Periodic is only legal on periodic chart
/// directions. Natural puts nodes at cell centres and leaves the ends free
/// (used for the polar direction of a latitude-longitude sphere).
enum class Closure { periodic, dirichlet, natural };

struct MeshNode {
  int i = 0, j = 0;  // grid position
  Vec2 s;
  GeometryJet jet;
  double mass = 0;
};

class SurfaceMesh {
 public:
  /// n1, n2 count intervals for Dirichlet directions and nodes otherwise.
  SurfaceMesh(ChartPtr chart, int n1, int n2, std::optional<Closure> non_periodic = std::nullopt)
      : chart_(std::move(chart)), domain_(chart_->domain()), n_{n1, n2} {
    if (n1 < 4 || n2 < 4) throw DomainError("mesh needs at least 4 cells per direction");
    for (int mu = 0; mu < 2; ++mu) {
      if (domain_.periodic[mu]) {
        closure_[mu] = Closure::periodic;
      } else {
        closure_[mu] = non_periodic.value_or(Closure::dirichlet);
        if (closure_[mu] == Closure::periodic)
          throw DomainError("periodic closure on a non-periodic direction of " + chart_->name());
      }
      h_[mu] = domain_.length(mu) / n_[mu];
    }
    if (domain_.kind == ChartDomain::Kind::truncated_plane &&
        (closure_[0] != Closure::dirichlet || closure_[1] != Closure::dirichlet))
      throw DomainError("truncated planes take Dirichlet closure");
    build_nodes();
    assemble_laplace();
  }

  const SurfaceChart& chart() const { return *chart_; }
  ChartPtr chart_ptr() const { return chart_; }
  int n(int mu) const { return n_[mu]; }
  double h(int mu) const { return h_[mu]; }
  Closure closure(int mu) const { return closure_[mu]; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<MeshNode>& nodes() const { return nodes_; }

  Eigen::VectorXd mass() const {
    Eigen::VectorXd m(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) m[k] = nodes_[k].mass;
    return m;
  }
  /// K - M^2 at the nodes.
  Eigen::VectorXd potential() const {
    Eigen::VectorXd v(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) v[k] = nodes_[k].jet.gauss - nodes_[k].jet.mean * nodes_[k].jet.mean;
    return v;
  }
  /// Weak-form -Delta: x^T L x = integral of g^{mu nu} x_mu x_nu sqrt(g).
  const SparseMatrix& laplace() const { return laplace_; }

  /// Nodal values of a function of the chart coordinates.
  template <class F>
  Eigen::VectorXd interpolate(F&& f) const {
    Eigen::VectorXd v(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) v[k] = f(nodes_[k].s);
    return v;
  }

 private:
  int positions(int mu) const { return closure_[mu] == Closure::dirichlet ? n_[mu] + 1 : n_[mu]; }
  int cells(int mu) const {
    switch (closure_[mu]) {
      case Closure::periodic: return n_[mu];
      case Closure::dirichlet: return n_[mu];
      case Closure::natural: return n_[mu] - 1;
    }
    return 0;
  }
  double coordinate(int mu, int i) const {
    const double off = closure_[mu] == Closure::natural ? 0.5 : 0.0;
    return domain_.lo[mu] + (i + off) * h_[mu];
  }
  double weight(int mu, int i) const {
    if (closure_[mu] == Closure::natural && (i == 0 || i == n_[mu] - 1)) return 0.5 * h_[mu];
    return h_[mu];
  }
  bool on_boundary(int mu, int i) const {
    return closure_[mu] == Closure::dirichlet && (i == 0 || i == n_[mu]);
  }
  int wrap(int mu, int i) const { return closure_[mu] == Closure::periodic ? i % n_[mu] : i; }

  void build_nodes() {
    const int p0 = positions(0), p1 = positions(1);
    index_.assign(static_cast<std::size_t>(p0) * p1, -1);
    for (int i = 0; i < p0; ++i)
      for (int j = 0; j < p1; ++j) {
        if (on_boundary(0, i) || on_boundary(1, j)) continue;
        const Vec2 s(coordinate(0, i), coordinate(1, j));
        if (domain_.kind == ChartDomain::Kind::truncated_plane && !(s.norm() < domain_.radius)) continue;
        MeshNode node;
        node.i = i;
        node.j = j;
        node.s = s;
        node.jet = geometry_jet(*chart_, s);
        node.mass = std::sqrt(node.jet.metric_det) * weight(0, i) * weight(1, j);
        if (!(node.mass > 0)) {
          std::ostringstream os;
          os << "non-positive mass weight at (" << s[0] << ", " << s[1] << ") on " << chart_->name();
          throw DomainError(os.str());
        }
        index_[static_cast<std::size_t>(i) * p1 + j] = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
      }
    if (nodes_.empty()) throw DomainError("mesh has no interior nodes");
  }

  int index(int i, int j) const {
    return index_[static_cast<std::size_t>(wrap(0, i)) * positions(1) + wrap(1, j)];
  }

  void assemble_laplace() {
    // Reference gradients of the bilinear shape functions at the 2x2 Gauss
    // points; corners ordered (0,0), (1,0), (1,1), (0,1).
    const double g = 0.5 / std::sqrt(3.0);
    const std::array<double, 2> q{0.5 - g, 0.5 + g};
    const std::array<std::array<int, 2>, 4> corner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(cells(0)) * cells(1) * 16);
    for (int ci = 0; ci < cells(0); ++ci)
      for (int cj = 0; cj < cells(1); ++cj) {
        std::array<int, 4> idx;
        bool any = false;
        for (int a = 0; a < 4; ++a) {
          idx[a] = index(ci + corner[a][0], cj + corner[a][1]);
          any = any || idx[a] >= 0;
        }
        if (!any) continue;
        const Vec2 centre(coordinate(0, ci) + 0.5 * h_[0], coordinate(1, cj) + 0.5 * h_[1]);
        const GeometryJet jet = geometry_jet(*chart_, centre);
        const Mat2 coef = std::sqrt(jet.metric_det) * jet.metric.inverse();
        Eigen::Matrix4d Ke = Eigen::Matrix4d::Zero();
        for (double x : q)
          for (double y : q) {
            Eigen::Matrix<double, 2, 4> grad;
            for (int a = 0; a < 4; ++a) {
              const double sx = corner[a][0] ? x : 1 - x;
              const double sy = corner[a][1] ? y : 1 - y;
              grad(0, a) = (corner[a][0] ? 1.0 : -1.0) * sy / h_[0];
              grad(1, a) = (corner[a][1] ? 1.0 : -1.0) * sx / h_[1];
            }
            Ke += 0.25 * h_[0] * h_[1] * grad.transpose() * coef * grad;
          }
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            if (idx[a] >= 0 && idx[b] >= 0) trip.emplace_back(idx[a], idx[b], 0.5 * (Ke(a, b) + Ke(b, a)));
      }
    laplace_.resize(static_cast<Eigen::Index>(nodes_.size()), static_cast<Eigen::Index>(nodes_.size()));
    laplace_.setFromTriplets(trip.begin(), trip.end());
    laplace_.makeCompressed();
  }

  ChartPtr chart_;
  ChartDomain domain_;
  std::array<int, 2> n_;
  std::array<double, 2> h_{};
  std::array<Closure, 2> closure_{};
  std::vector<int> index_;
  std::vector<MeshNode> nodes_;
  SparseMatrix laplace_;
};

struct OperatorMeta {
  std::string surface;
  double d = 0;
  std::string variant = "S";  // "S", "plus" or "minus"
  int n1 = 0, n2 = 0;
};

struct DiscreteOperator {
  SparseMatrix stiffness;     // laplace_scale * L + diag(potential * mass)
  Eigen::VectorXd mass;       // lumped sqrt(g) ds1 ds2
  Eigen::VectorXd potential;  // nodal potential including any constant shift
  double laplace_scale = 1;
  OperatorMeta meta;

  /// x^T A x / x^T W x.
  double rayleigh_quotient(const Eigen::VectorXd& x) const {
    return x.dot(stiffness * x) / x.dot(mass.asDiagonal() * x);
  }
};

namespace detail {

inline DiscreteOperator make_operator(const SurfaceMesh& mesh, double scale, const Eigen::VectorXd& potential,
                                      OperatorMeta meta) {
  DiscreteOperator op;
  op.mass = mesh.mass();
  op.potential = potential;
  op.laplace_scale = scale;
  SparseMatrix diag(op.mass.size(), op.mass.size());
  diag.reserve(Eigen::VectorXi::Constant(op.mass.size(), 1));
  for (Eigen::Index k = 0; k < op.mass.size(); ++k) diag.insert(k, k) = potential[k] * op.mass[k];
  op.stiffness = scale * mesh.laplace() + diag;
  op.stiffness.makeCompressed();
  meta.surface = mesh.chart().name();
  meta.n1 = mesh.n(0);
  meta.n2 = mesh.n(1);
  op.meta = std::move(meta);
  return op;
}

}  // namespace detail

inline DiscreteOperator assemble_S(const SurfaceMesh& mesh) {
  return detail::make_operator(mesh, 1.0, mesh.potential(), {});
}

struct VPm {
  double v_minus = 0, v_plus = 0;
  double refinement_change = 0;
  bool stable = true;
  std::string warning;
};

inline DiscreteOperator assemble_U(const SurfaceMesh& mesh, double d, Variant sign, const SupNorms& norms,
                                   const VPm& v) {
  if (!(d >= 0)) throw DomainError("assemble_U requires d >= 0");
  if (!(d < norms.rho)) {
    std::ostringstream os;
    os << "layer half-width d = " << d << " is not below rho = " << norms.rho;
    throw LayerWidthError(os.str());
  }
  const bool plus = sign == Variant::plus;
  const double C = plus ? c_plus(d, norms.rho) : c_minus(d, norms.rho);
  const double shift = (plus ? v.v_plus : v.v_minus) * d;
  const Eigen::VectorXd pot = (mesh.potential() / (C * C)).array() + shift;
  return detail::make_operator(mesh, C, pot, {"", d, to_string(sign), 0, 0});
}

struct SpectralResult {
  std::vector<double> values;        // finest mesh, ascending
  std::vector<int> mesh_sizes;       // coarse to fine
  std::vector<double> extrapolated;  // Richardson, second order
  std::vector<double> error_estimate;
  std::vector<double> coarse;        // values on the previous mesh, if any
  int iterations = 0;
};

inline SpectralResult eigen_lowest(const DiscreteOperator& op, int count, EigenOptions opt = {}) {
  if (count < 1) throw DomainError("eigen_lowest requires count >= 1");
  const double vmin = op.potential.minCoeff();
  const double shift = vmin - std::max(1.0, 0.5 * std::abs(vmin));
  const EigenPairs ep = lowest_eigenpairs(op.stiffness, op.mass, count, shift, opt);
  SpectralResult r;
  r.values.assign(ep.values.data(), ep.values.data() + ep.values.size());
  std::sort(r.values.begin(), r.values.end());
  r.mesh_sizes = {op.meta.n1};
  r.extrapolated = r.values;
  r.error_estimate.assign(r.values.size(), std::numeric_limits<double>::quiet_NaN());
  r.iterations = ep.iterations;
  return r;
}

/// Builds the operator of a family on an n-cell mesh.
using OperatorFamily = std::function<DiscreteOperator(int n)>;

/// Lowest eigenvalues at n/2 and n with a second-order Richardson estimate.
inline SpectralResult eigen_lowest(const OperatorFamily& family, int n, int count, EigenOptions opt = {}) {
  const SpectralResult coarse = eigen_lowest(family(n / 2), count, opt);
  SpectralResult fine = eigen_lowest(family(n), count, opt);
  fine.mesh_sizes = {n / 2, n};
  fine.coarse = coarse.values;
  for (std::size_t k = 0; k < fine.values.size(); ++k) {
    const double delta = (fine.values[k] - coarse.values[k]) / 3.0;
    fine.extrapolated[k] = fine.values[k] + delta;
    fine.error_estimate[k] = std::abs(delta);
  }
  return fine;
}

inline OperatorFamily s_family(ChartPtr chart, std::optional<Closure> closure = std::nullopt) {
  return [chart, closure](int n) { return assemble_S(SurfaceMesh(chart, n, n, closure)); };
}

/// (mu_n/4 - mu_n/2) / (mu_n/2 - mu_n) per eigenvalue; 4 for a second-order scheme.
inline std::vector<double> richardson_ratios(const OperatorFamily& family, int n, int count,
                                             EigenOptions opt = {}) {
  const auto a = eigen_lowest(family(n / 4), count, opt).values;
  const auto b = eigen_lowest(family(n / 2), count, opt).values;
  const auto c = eigen_lowest(family(n), count, opt).values;
  std::vector<double> r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = (a[k] - b[k]) / (b[k] - c[k]);
  return r;
}

/// The Laplace-Beltrami spectrum of the round sphere, l(l+1)/R^2 with
/// multiplicity 2l+1; K - M^2 vanishes there, so this is also S.
inline SpectralResult sphere_spectrum(double R, int count, double scale = 1.0, double shift = 0.0) {
  if (!(R > 0) || count < 1) throw DomainError("sphere_spectrum: bad arguments");
  SpectralResult r;
  for (int l = 0; static_cast<int>(r.values.size()) < count; ++l)
    for (int m = 0; m < 2 * l + 1 && static_cast<int>(r.values.size()) < count; ++m)
      r.values.push_back(scale * l * (l + 1) / (R * R) + shift);
  r.extrapolated = r.values;
  r.error_estimate.assign(r.values.size(), 0.0);
  return r;
}

/// Spectrum of U_d^+- on the sphere: (1 +- d/rho)^2 l(l+1)/R^2 + v^+- d.
inline SpectralResult sphere_spectrum_U(double R, double d, Variant sign, double rho, const VPm& v, int count) {
  if (!(d < rho)) throw LayerWidthError("sphere_spectrum_U requires d < rho");
  const bool plus = sign == Variant::plus;
  return sphere_spectrum(R, count, plus ? c_plus(d, rho) : c_minus(d, rho), (plus ? v.v_plus : v.v_minus) * d);
}

/// Diagnostic latitude-longitude discretization of -Delta on the sphere.
inline SpectralResult sphere_latlong_diagnostic(double R, int n, int count) {
  return eigen_lowest(s_family(std::make_shared<SphereChart>(R), Closure::natural), n, count);
}

namespace detail {

inline VPm sample_v_pm(const SurfaceChart& chart, double d, int n_samples, int n_u) {
  VPm v;
  v.v_minus = 0;  // V1 vanishes on the surface itself
  v.v_plus = 0;
  for (const Vec2& s : sample_points(chart.domain(), n_samples))
    for (int k = 0; k < n_u; ++k) {
      const double u = -d + 2.0 * d * k / (n_u - 1);
      const double q = layer_jet(chart, s, u, d).V1 / d;
      v.v_minus = std::min(v.v_minus, q);
      v.v_plus = std::max(v.v_plus, q);
    }
  return v;
}

}  // namespace detail

/// v^+ = max V1/d and v^- = min V1/d over layer samples at resolutions n and
/// 2n; the finer values are returned.
inline VPm estimate_v_pm(const SurfaceChart& chart, double d, int n_samples, int n_u = 9) {
  if (!(d > 0)) throw DomainError("estimate_v_pm requires d > 0");
  const VPm a = detail::sample_v_pm(chart, d, n_samples, n_u);
  VPm b = detail::sample_v_pm(chart, d, 2 * n_samples, 2 * n_u - 1);
  b.refinement_change = std::max(detail::relative_change(a.v_minus, b.v_minus),
                                 detail::relative_change(a.v_plus, b.v_plus));
  const double scale = std::max({std::abs(b.v_minus), std::abs(b.v_plus), 1e-12});
  const double abs_change = std::max(std::abs(a.v_minus - b.v_minus), std::abs(a.v_plus - b.v_plus));
  if (abs_change > 0.05 * scale) {
    b.stable = false;
    std::ostringstream os;
    os << "v+- on " << chart.name() << " changed by " << abs_change / scale * 100 << "% under refinement";
    b.warning = os.str();
  }
  return b;
}

/// Envelope of estimate_v_pm over a set of widths, so that one pair serves
/// the whole set.
inline VPm estimate_v_pm(const SurfaceChart& chart, const std::vector<double>& d_grid, int n_samples) {
  VPm env;
  for (double d : d_grid) {
    const VPm v = estimate_v_pm(chart, d, n_samples);
    env.v_minus = std::min(env.v_minus, v.v_minus);
    env.v_plus = std::max(env.v_plus, v.v_plus);
    env.refinement_change = std::max(env.refinement_change, v.refinement_change);
    if (!v.stable) {
      env.stable = false;
      env.warning = v.warning;
    }
  }
  return env;
}

struct Lemma2Fit {
  int j = 0;
  Variant sign = Variant::plus;
  std::vector<double> mu_d;  // mu_j^+-(d) over the grid
  double intercept = 0, slope = 0, quadratic = 0;
  double mu_direct = 0;
  double expected_slope = std::numeric_limits<double>::quiet_NaN();  // sphere only
  double intercept_error = 0;  // |a - mu_j|
  double quad_ratio = 0;       // |c| d_max / |b|
  bool pass = false;
};

struct Lemma2Report {
  std::string surface;
  std::vector<double> d_grid;
  VPm v;
  double rho = 0;
  int mesh = 0;  // 0 on the analytic path
  std::vector<Lemma2Fit> fits;
  std::vector<std::string> diagnostics;
  bool all_pass() const {
    return !fits.empty() && std::all_of(fits.begin(), fits.end(), [](const Lemma2Fit& f) { return f.pass; });
  }
};

struct Lemma2Options {
  int mesh = 192;
  double intercept_tol = 0.02;  // relative to |mu_j| (absolute if mu_j = 0)
  double quad_tol = 0.1;
  int v_samples = 32;
  int jobs = 1;
};

/// Least-squares fit y = a + b d + c d^2.
inline Eigen::Vector3d quadratic_fit(const std::vector<double>& d, const std::vector<double>& y) {
  if (d.size() != y.size() || d.size() < 3) throw DomainError("quadratic_fit needs at least 3 points");
  Eigen::MatrixXd A(d.size(), 3);
  Eigen::VectorXd b(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    A(k, 0) = 1;
    A(k, 1) = d[k];
    A(k, 2) = d[k] * d[k];
    b[k] = y[k];
  }
  return A.colPivHouseholderQr().solve(b);
}

namespace detail {

inline void check_d_grid(const std::vector<double>& d_grid, double rho) {
  if (d_grid.size() < 4) throw DomainError("verify_lemma2 needs at least 4 widths");
  for (double d : d_grid)
    if (!(d > 0) || !(d < rho)) throw LayerWidthError("verify_lemma2 widths must lie in (0, rho)");
}

inline void fit_lemma2(Lemma2Fit& f, const std::vector<double>& d_grid) {
  const Eigen::Vector3d c = quadratic_fit(d_grid, f.mu_d);
  f.intercept = c[0];
  f.slope = c[1];
  f.quadratic = c[2];
  f.intercept_error = std::abs(f.intercept - f.mu_direct);
  const double dmax = *std::max_element(d_grid.begin(), d_grid.end());
  f.quad_ratio = std::abs(f.slope) > 0 ? std::abs(f.quadratic) * dmax / std::abs(f.slope)
                                       : (f.quadratic == 0 ? 0.0 : std::numeric_limits<double>::infinity());
}

inline std::string describe(const Lemma2Fit& f) {
  std::ostringstream os;
  os.precision(10);
  os << "j=" << f.j << " " << to_string(f.sign) << ": intercept " << f.intercept << " vs " << f.mu_direct
     << ", slope " << f.slope << ", quadratic/linear " << f.quad_ratio;
  return os.str();
}

}  // namespace detail

/// Width expansion on a meshed surface: fits mu_j^+-(d) over d_grid and compares the
/// intercepts with mu_j of S on the same mesh.
inline Lemma2Report verify_lemma2(ChartPtr chart, const std::vector<double>& d_grid, int j_max,
                                  const Lemma2Options& opt = {}) {
  const SupNorms norms = sup_norms(*chart);
  detail::check_d_grid(d_grid, norms.rho);
  Lemma2Report rep;
  rep.surface = chart->name();
  rep.d_grid = d_grid;
  rep.rho = norms.rho;
  rep.mesh = opt.mesh;
  rep.v = estimate_v_pm(*chart, d_grid, opt.v_samples);
  if (!rep.v.stable) rep.diagnostics.push_back(rep.v.warning);

  const SurfaceMesh mesh(chart, opt.mesh, opt.mesh);
  const int count = j_max + 1;
  // Task 0 is S itself; then (d, sign) pairs.
  const std::size_t tasks = 1 + 2 * d_grid.size();
  std::vector<std::vector<double>> values(tasks);
  parallel_for(tasks, opt.jobs, [&](std::size_t t) {
    if (t == 0) {
      values[t] = eigen_lowest(assemble_S(mesh), count).values;
      return;
    }
    const std::size_t k = (t - 1) / 2;
    const Variant sign = (t - 1) % 2 == 0 ? Variant::plus : Variant::minus;
    values[t] = eigen_lowest(assemble_U(mesh, d_grid[k], sign, norms, rep.v), count).values;
  });
  for (int j = 0; j <= j_max; ++j)
    for (Variant sign : {Variant::plus, Variant::minus}) {
      Lemma2Fit f;
      f.j = j;
      f.sign = sign;
      f.mu_direct = values[0][j];
      for (std::size_t k = 0; k < d_grid.size(); ++k)
        f.mu_d.push_back(values[1 + 2 * k + (sign == Variant::plus ? 0 : 1)][j]);
      detail::fit_lemma2(f, d_grid);
      const double tol = opt.intercept_tol * (f.mu_direct != 0 ? std::abs(f.mu_direct) : 1.0);
      f.pass = f.intercept_error <= tol && f.quad_ratio < opt.quad_tol;
      if (!f.pass) rep.diagnostics.push_back(detail::describe(f));
      rep.fits.push_back(std::move(f));
    }
  return rep;
}

/// Width expansion on the round sphere through the analytic spectra; intercepts must
/// be exact to `tol` and slopes equal +-2 mu_j / rho + v^+- to `slope_tol`.
inline Lemma2Report verify_lemma2_sphere(double R, const std::vector<double>& d_grid, int j_max,
                                         double tol = 1e-10, double slope_tol = 1e-8, int v_samples = 16) {
  const SphereChart chart(R);
  const double rho = R;
  detail::check_d_grid(d_grid, rho);
  Lemma2Report rep;
  rep.surface = "sphere";
  rep.d_grid = d_grid;
  rep.rho = rho;
  rep.v = estimate_v_pm(chart, d_grid, v_samples);
  const int count = j_max + 1;
  const auto mu = sphere_spectrum(R, count).values;
  for (int j = 0; j <= j_max; ++j)
    for (Variant sign : {Variant::plus, Variant::minus}) {
      Lemma2Fit f;
      f.j = j;
      f.sign = sign;
      f.mu_direct = mu[j];
      for (double d : d_grid) f.mu_d.push_back(sphere_spectrum_U(R, d, sign, rho, rep.v, count).values[j]);
      const double vs = sign == Variant::plus ? rep.v.v_plus : rep.v.v_minus;
      f.expected_slope = (sign == Variant::plus ? 2.0 : -2.0) * mu[j] / rho + vs;
      detail::fit_lemma2(f, d_grid);
      f.pass = f.intercept_error <= tol * std::max(1.0, std::abs(mu[j])) &&
               std::abs(f.slope - f.expected_slope) <= slope_tol * std::max(1.0, std::abs(f.expected_slope));
      if (!f.pass) rep.diagnostics.push_back(detail::describe(f));
      rep.fits.push_back(std::move(f));
    }
  return rep;
}

}  // namespace dprime
