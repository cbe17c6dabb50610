#pragma once

// Strong-coupling bracket  t_-(d) + mu_j^-(d) <= lambda_j <= t_+(d) + mu_j^+(d)
// with d(beta) = -beta ln beta, residuals lambda_j + 4/beta^2 - mu_j, their
// fitted envelopes, the essential-spectrum threshold bound and the
// bound-state existence check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dprime/effective.hpp"
#include "dprime/errors.hpp"
#include "dprime/geometry.hpp"
#include "dprime/parallel.hpp"
#include "dprime/sphere_oracle.hpp"
#include "dprime/surfaces.hpp"
#include "dprime/transverse.hpp"

namespace dprime {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// d(beta) = -beta ln beta.
inline double choose_d(double beta) {
  if (!(beta > 0) || !(beta < 1)) throw DomainError("choose_d requires 0 < beta < 1");
  return -beta * std::log(beta);
}

struct DChoice {
  double beta = 0, d = 0;
  bool in_regime = false;  // d/beta > 2 and beta (||M|| + d ||K||) < 1
  std::string warning;
};

inline DChoice choose_d(double beta, const SupNorms& norms) {
  DChoice c{beta, choose_d(beta), false, {}};
  if (!(c.d < norms.rho)) {
    std::ostringstream os;
    os << "d(beta) = " << c.d << " is not below rho = " << norms.rho;
    throw LayerWidthError(os.str());
  }
  const bool lemma1 = c.d / beta > 2;
  const bool curvature = beta * (norms.sup_M + c.d * norms.sup_K) < 1;
  c.in_regime = lemma1 && curvature;
  if (!lemma1) c.warning = "beta >= exp(-2): d/beta <= 2";
  else if (!curvature) c.warning = "beta (||M|| + d ||K||) >= 1";
  return c;
}

/// Lower bound -4/beta^2 - 16 exp(-4d/beta)/beta^2 on the essential threshold.
inline double essential_threshold(double beta, double d) {
  if (!(beta > 0) || !(d > 0)) throw DomainError("essential_threshold requires beta, d > 0");
  return line_eigenvalue(beta) - lemma1_gap(beta, d);
}

struct ThresholdReport {
  double beta = 0, d = 0;
  double threshold = 0;  // the certified lower bound
  double gap = 0;        // distance to -4/beta^2
  double t_minus = 0;
  bool consistent = false;  // t_-(d) >= threshold
  bool in_regime = false;
};

inline ThresholdReport threshold_report(double beta, double d) {
  ThresholdReport r;
  r.beta = beta;
  r.d = d;
  r.threshold = essential_threshold(beta, d);
  r.gap = lemma1_gap(beta, d);
  r.in_regime = d / beta > 2;
  TransverseProblem p;
  p.d = d;
  p.beta = beta;
  p.variant = Variant::minus;
  p.robin_theta = 0.0;
  r.t_minus = solve_transverse(p).eigenvalue;
  r.consistent = r.t_minus >= r.threshold * (1 + 1e-12);
  return r;
}

/// The longitudinal side of the bracket for one surface: spectra of S and
/// of U_d^+-. The round sphere is handled analytically and the plane is a
/// control whose S-spectrum [0, inf) is represented by its bottom 0.
class EffectiveModel {
 public:
  struct Options {
    int mesh = 192;
    int v_samples = 16;
  };

  explicit EffectiveModel(const SurfaceSpec& spec) : EffectiveModel(spec, Options{}) {}
  EffectiveModel(const SurfaceSpec& spec, Options opt)
      : spec_(resolve(spec)), chart_(make_chart(spec_)), opt_(opt), norms_(sup_norms(*chart_)) {
    if (spec_.name != "sphere" && spec_.name != "plane")
      mesh_ = std::make_shared<const SurfaceMesh>(chart_, opt_.mesh, opt_.mesh);
  }

  const SurfaceSpec& spec() const { return spec_; }
  const SurfaceChart& chart() const { return *chart_; }
  const SupNorms& norms() const { return norms_; }
  bool analytic() const { return !mesh_; }
  int mesh_size() const { return mesh_ ? opt_.mesh : 0; }

  std::vector<double> mu(int count) const {
    if (spec_.name == "sphere") return sphere_spectrum(radius(), count).values;
    if (spec_.name == "plane") return std::vector<double>(count, 0.0);
    return eigen_lowest(assemble_S(*mesh_), count).values;
  }

  VPm v_pm(double d) const {
    if (spec_.name == "plane") return {};
    return estimate_v_pm(*chart_, d, opt_.v_samples);
  }

  std::vector<double> mu_pm(double d, Variant sign, const VPm& v, int count) const {
    if (spec_.name == "sphere") return sphere_spectrum_U(radius(), d, sign, norms_.rho, v, count).values;
    if (spec_.name == "plane") return std::vector<double>(count, 0.0);
    return eigen_lowest(assemble_U(*mesh_, d, sign, norms_, v), count).values;
  }

  double radius() const { return spec_.params.at("R"); }

 private:
  SurfaceSpec spec_;
  ChartPtr chart_;
  Options opt_;
  SupNorms norms_;
  std::shared_ptr<const SurfaceMesh> mesh_;
};

struct BracketSpectrum {
  double beta = 0, d = 0;
  bool in_regime = false;
  std::string warning;
  double theta = 0;  // Robin coefficient of t_-
  double t_minus = 0, t_plus = 0;
  VPm v;
  std::vector<double> mu, mu_minus, mu_plus;
  std::vector<double> lower, upper;

  double width(std::size_t j) const { return upper[j] - lower[j]; }
};

inline BracketSpectrum bracket_spectrum(const EffectiveModel& model, double beta, int j_max,
                                        const std::vector<double>* mu = nullptr) {
  if (j_max < 0) throw DomainError("bracket_spectrum requires j_max >= 0");
  const DChoice dc = choose_d(beta, model.norms());
  BracketSpectrum b;
  b.beta = beta;
  b.d = dc.d;
  b.in_regime = dc.in_regime;
  b.warning = dc.warning;
  const double d = dc.d;
  const double bound = model.norms().sup_M + d * model.norms().sup_K;
  b.theta = bound / c_minus(d, model.norms().rho);

  TransverseProblem p;
  p.d = d;
  p.beta = beta;
  p.curvature_bound = bound;
  p.variant = Variant::plus;
  b.t_plus = solve_transverse(p).eigenvalue;
  p.variant = Variant::minus;
  p.robin_theta = b.theta;
  b.t_minus = solve_transverse(p).eigenvalue;

  const int count = j_max + 1;
  b.v = model.v_pm(d);
  b.mu = mu ? *mu : model.mu(count);
  b.mu_minus = model.mu_pm(d, Variant::minus, b.v, count);
  b.mu_plus = model.mu_pm(d, Variant::plus, b.v, count);
  for (int j = 0; j < count; ++j) {
    b.lower.push_back(b.t_minus + b.mu_minus[j]);
    b.upper.push_back(b.t_plus + b.mu_plus[j]);
  }
  return b;
}

struct AsymptoticsRow {
  BracketSpectrum bracket;
  std::vector<double> lambda;    // sphere oracle, or the bracket midpoint
  std::vector<double> error_bar; // 0 for the oracle, half width otherwise
  std::vector<double> residual;  // lambda_j + 4/beta^2 - mu_j
  std::vector<bool> sandwiched;  // lower <= lambda <= upper within tolerance
  ThresholdReport threshold;
  double scale = 0;              // beta |ln beta|
};

struct EnvelopeViolation {
  int j = 0;
  double beta = 0;
  std::string what;
};

struct AsymptoticsReport {
  SurfaceSpec surface;
  bool oracle = false;
  int j_max = 0;
  std::vector<AsymptoticsRow> rows;  // in grid order, largest beta first
  double envelope_C = kNaN;          // |r_j| <= C beta |ln beta|
  double width_C = kNaN;             // upper - lower <= C' beta |ln beta|
  std::vector<EnvelopeViolation> violations;
  bool envelope_ok = false, decreasing_ok = false, width_ok = false, sandwich_ok = false;
};

struct AsymptoticsOptions {
  double sandwich_tol = 1e-9;  // relative to |lambda|
  double envelope_tol = 1e-9;  // relative slack on fitted envelopes
  int jobs = 1;
};

/// Per-beta brackets and residuals; envelope constants are fitted at the
/// largest beta of the grid and asserted at every smaller one.
inline AsymptoticsReport asymptotic_residuals(const EffectiveModel& model, std::vector<double> beta_grid, int j_max,
                                              const AsymptoticsOptions& opt = {}) {
  if (beta_grid.size() < 2) throw DomainError("asymptotic_residuals needs at least two beta values");
  std::sort(beta_grid.begin(), beta_grid.end(), std::greater<>());
  AsymptoticsReport rep;
  rep.surface = model.spec();
  rep.j_max = j_max;
  rep.oracle = model.spec().name == "sphere";
  const int count = j_max + 1;
  const std::vector<double> mu = model.mu(count);

  rep.rows.resize(beta_grid.size());
  parallel_for(beta_grid.size(), opt.jobs, [&](std::size_t k) {
    const double beta = beta_grid[k];
    AsymptoticsRow row;
    row.bracket = bracket_spectrum(model, beta, j_max, &mu);
    row.scale = beta * std::abs(std::log(beta));
    row.threshold = threshold_report(beta, row.bracket.d);
    if (rep.oracle) {
      const int l_max = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
      row.lambda = sphere_eigenvalues(model.radius(), beta, l_max).expanded(count);
      row.lambda.resize(count, kNaN);
      row.error_bar.assign(count, 0.0);
    } else {
      for (int j = 0; j < count; ++j) {
        row.lambda.push_back(0.5 * (row.bracket.lower[j] + row.bracket.upper[j]));
        row.error_bar.push_back(0.5 * row.bracket.width(j));
      }
    }
    for (int j = 0; j < count; ++j) {
      row.residual.push_back(row.lambda[j] - line_eigenvalue(beta) - mu[j]);
      const double tol = opt.sandwich_tol * std::abs(row.lambda[j]);
      row.sandwiched.push_back(row.bracket.lower[j] - tol <= row.lambda[j] &&
                               row.lambda[j] <= row.bracket.upper[j] + tol);
    }
    rep.rows[k] = std::move(row);
  });

  const AsymptoticsRow& top = rep.rows.front();
  rep.envelope_C = 0;
  rep.width_C = 0;
  for (int j = 0; j < count; ++j) {
    rep.envelope_C = std::max(rep.envelope_C, std::abs(top.residual[j]) / top.scale);
    rep.width_C = std::max(rep.width_C, top.bracket.width(j) / top.scale);
  }
  rep.envelope_ok = rep.decreasing_ok = rep.width_ok = rep.sandwich_ok = true;
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    const AsymptoticsRow& row = rep.rows[k];
    const double beta = row.bracket.beta;
    for (int j = 0; j < count; ++j) {
      if (!(std::abs(row.residual[j]) <= rep.envelope_C * row.scale * (1 + opt.envelope_tol))) {
        rep.envelope_ok = false;
        rep.violations.push_back({j, beta, "residual envelope"});
      }
      if (!(row.bracket.width(j) <= rep.width_C * row.scale * (1 + opt.envelope_tol))) {
        rep.width_ok = false;
        rep.violations.push_back({j, beta, "bracket width envelope"});
      }
      if (!row.sandwiched[j]) {
        rep.sandwich_ok = false;
        rep.violations.push_back({j, beta, "sandwich"});
      }
      if (k > 0 && !(std::abs(row.residual[j]) < std::abs(rep.rows[k - 1].residual[j]))) {
        rep.decreasing_ok = false;
        rep.violations.push_back({j, beta, "residual not decreasing"});
      }
    }
  }
  return rep;
}

struct BoundStateRow {
  double beta = 0, d = 0;
  bool in_regime = false;
  double upper0 = kNaN;     // t_+ + mu_0^+(d), infinite case
  double threshold = kNaN;  // -4/beta^2 - 16 exp(-4d/beta)/beta^2
  double separation = kNaN; // threshold - upper0
  double variational = kNaN;  // compact case
  bool pass = false;
};

struct BoundStateReport {
  SurfaceSpec surface;
  bool compact = false;
  bool control = false;  // the plane: no separation is claimed
  double mu0 = kNaN;
  double required_gap = kNaN;  // |mu_0| / 2
  std::vector<BoundStateRow> rows;
  std::optional<double> onset_beta;  // largest beta from which every smaller grid beta passes
  bool all_pass() const {
    return control || std::all_of(rows.begin(), rows.end(), [](const BoundStateRow& r) { return r.pass; });
  }
};

/// Infinite surfaces: the D+ upper bound on lambda_0 must lie at least
/// |mu_0|/2 below the threshold formula. Compact surfaces: the constant
/// trial function gives a negative Rayleigh quotient for every beta.
inline BoundStateReport bound_state_existence(const EffectiveModel& model, std::vector<double> beta_grid,
                                              int jobs = 1) {
  std::sort(beta_grid.begin(), beta_grid.end(), std::greater<>());
  BoundStateReport rep;
  rep.surface = model.spec();
  const std::string& name = rep.surface.name;
  rep.compact = name == "sphere" || name == "torus";
  rep.control = name == "plane";
  rep.mu0 = model.mu(1)[0];
  rep.required_gap = std::abs(rep.mu0) / 2;
  const std::vector<double> mu{rep.mu0};
  rep.rows.resize(beta_grid.size());
  parallel_for(beta_grid.size(), jobs, [&](std::size_t k) {
    BoundStateRow row;
    row.beta = beta_grid[k];
    if (rep.compact) {
      const auto& p = rep.surface.params;
      row.variational = name == "sphere" ? variational_bound(p.at("R"), row.beta)
                                         : torus_variational_bound(p.at("R"), p.at("r"), row.beta);
      row.pass = row.variational < 0;
      row.in_regime = true;
    } else {
      const BracketSpectrum b = bracket_spectrum(model, row.beta, 0, &mu);
      row.d = b.d;
      row.in_regime = b.in_regime;
      row.upper0 = b.upper[0];
      row.threshold = essential_threshold(row.beta, b.d);
      row.separation = row.threshold - row.upper0;
      row.pass = !rep.control && rep.mu0 < 0 && row.separation >= rep.required_gap;
    }
    rep.rows[k] = row;
  });
  for (std::size_t k = rep.rows.size(); k-- > 0;) {
    if (!rep.rows[k].pass) break;
    rep.onset_beta = rep.rows[k].beta;
  }
  return rep;
}

}  // namespace dprime
