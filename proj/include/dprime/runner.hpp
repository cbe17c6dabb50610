#pragma once

// Experiment runner: evaluates the checks of one experiment, renders CSV and
// JSON artifacts and maps the outcome to an exit code
//   0 all checks pass, 1 a check failed, 2 configuration error,
//   3 numerical non-convergence.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dprime/asymptotics.hpp"
#include "dprime/config.hpp"
#include "dprime/effective.hpp"
#include "dprime/geometry.hpp"
#include "dprime/parallel.hpp"
#include "dprime/sphere_oracle.hpp"
#include "dprime/transverse.hpp"

namespace dprime {

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitNonConvergence = 3 };

/// Round-trip exact text for a double.
inline std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

  Csv& row() {
    rows_.emplace_back();
    return *this;
  }
  Csv& add(double x) { return put(fmt17(x)); }
  Csv& add(int x) { return put(std::to_string(x)); }
  Csv& add(bool x) { return put(x ? "1" : "0"); }
  Csv& add(const std::string& s) { return put(s); }
  Csv& add(const char* s) { return put(s); }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::ostringstream os;
    line(os, header_);
    for (const auto& r : rows_) line(os, r);
    return os.str();
  }

 private:
  Csv& put(std::string s) {
    if (rows_.empty()) rows_.emplace_back();
    rows_.back().push_back(std::move(s));
    return *this;
  }
  static void line(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Table {
  std::string suffix;  // empty for the main table
  Csv csv;
};

struct ExperimentResult {
  std::string experiment;
  std::string surface;
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  std::vector<Table> tables;
  Json report = Json::object();

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void check(std::string name, bool pass, std::string detail = {}) {
    checks.push_back({std::move(name), pass, std::move(detail)});
  }
};

namespace detail {

inline std::string describe_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

inline ExperimentResult run_geometry(const RunConfig& cfg) {
  ExperimentResult r{"geometry-check", cfg.surface.name};
  const ChartPtr chart = make_chart(cfg.surface);
  const SupNorms norms = sup_norms(*chart);
  const double d = std::isfinite(norms.rho) ? 0.5 * std::min(norms.rho, chart->injectivity_width()) : 0.5;
  const double u = 0.5 * d;
  const auto* torus = dynamic_cast<const TorusChart*>(chart.get());

  Csv csv({"surface", "s1", "s2", "K", "M", "k1", "k2", "curvature_identity", "u", "xi", "layer_det_identity",
           "torus_K_error", "torus_M_error"});
  double worst_id = 0, worst_det = 0, worst_K = 0, worst_M = 0;
  for (const Vec2& s : sample_points(chart->domain(), cfg.samples)) {
    const GeometryJet j = geometry_jet(*chart, s);
    const double id = std::abs(j.gauss - j.mean * j.mean + 0.25 * (j.k1 - j.k2) * (j.k1 - j.k2));
    const LayerJet lj = layer_jet(*chart, s, u, d);
    const double det = std::abs(lj.G_det - j.metric_det * lj.xi * lj.xi);
    double eK = 0, eM = 0;
    if (torus) {
      eK = std::abs(j.gauss - torus->gauss_exact(s[0]));
      eM = std::abs(j.mean - torus->mean_exact(s[0]));
    }
    worst_id = std::max(worst_id, id);
    worst_det = std::max(worst_det, det);
    worst_K = std::max(worst_K, eK);
    worst_M = std::max(worst_M, eM);
    csv.row().add(chart->name()).add(s[0]).add(s[1]).add(j.gauss).add(j.mean).add(j.k1).add(j.k2).add(id).add(u)
        .add(lj.xi).add(det).add(eK).add(eM);
  }
  r.check("curvature identity K - M^2 + (k1-k2)^2/4 = 0", worst_id <= cfg.tol.identity,
          "max " + describe_double(worst_id));
  r.check("layer metric det G = g xi^2", worst_det <= cfg.tol.identity, "max " + describe_double(worst_det));
  if (torus)
    r.check("torus closed-form K and M", std::max(worst_K, worst_M) <= cfg.tol.closed_form,
            "max " + describe_double(std::max(worst_K, worst_M)));
  if (std::isfinite(norms.rho)) {
    const XiBoundsReport xb = check_xi_bounds(*chart, d, std::max(8, cfg.samples / 2), norms);
    r.check("C_-(d) <= xi <= C_+(d)", xb.ok(), std::to_string(xb.violations.size()) + " violations");
    r.report["xi_bounds"] = {{"d", d}, {"min_xi", xb.min_xi}, {"max_xi", xb.max_xi},
                             {"c_minus", xb.c_minus}, {"c_plus", xb.c_plus}};
  }
  if (!norms.stable) r.warnings.push_back(norms.warning);
  r.report["sup_norms"] = {{"k1", norms.sup_k1}, {"k2", norms.sup_k2}, {"M", norms.sup_M}, {"K", norms.sup_K},
                           {"rho", std::isfinite(norms.rho) ? Json(norms.rho) : Json("inf")},
                           {"ellipticity_min", norms.ellipticity_min},
                           {"ellipticity_max", norms.ellipticity_max},
                           {"refinement_change", norms.refinement_change}};
  r.tables.push_back({"", std::move(csv)});
  return r;
}

inline ExperimentResult run_transverse(const RunConfig& cfg) {
  ExperimentResult r{"transverse", cfg.surface.name};
  const auto betas = cfg.beta_grid.resolve();
  const Lemma1Report l1 = verify_lemma1(betas, cfg.d_over_beta, cfg.theta, cfg.tol.lemma1_slack);

  struct Row {
    double beta, d, ratio;
    Variant v;
    TransverseResult res;
    double fd;
  };
  std::vector<Row> rows;
  for (double b : betas)
    for (double ratio : cfg.d_over_beta)
      for (Variant v : {Variant::plus, Variant::minus}) rows.push_back({b, ratio * b, ratio, v, {}, 0});
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t k) {
    Row& row = rows[k];
    TransverseProblem p;
    p.d = row.d;
    p.beta = row.beta;
    p.variant = row.v;
    if (row.v == Variant::minus) p.robin_theta = cfg.theta;
    row.res = solve_transverse(p);
    row.fd = fd_oracle(p, cfg.fd_n);
  });

  Csv csv({"beta", "d", "d_over_beta", "variant", "theta", "in_regime", "eigenvalue", "kappa", "lower", "line",
           "upper", "n_negative", "fd_n", "fd_eigenvalue", "fd_relative"});
  bool single = true, fd_ok = true;
  double worst_fd = 0;
  int out_of_regime = 0;
  for (const Row& row : rows) {
    const auto [lo, hi] = row.res.lemma1_bracket;
    const double line = line_eigenvalue(row.beta);
    const double rel = std::abs(row.fd - row.res.eigenvalue) / std::abs(row.res.eigenvalue);
    single = single && row.res.n_negative == 1;
    fd_ok = fd_ok && rel <= cfg.tol.fd_relative;
    worst_fd = std::max(worst_fd, rel);
    if (!row.res.in_regime) ++out_of_regime;
    csv.row().add(row.beta).add(row.d).add(row.ratio).add(to_string(row.v))
        .add(row.v == Variant::minus ? cfg.theta : 0.0).add(row.res.in_regime).add(row.res.eigenvalue)
        .add(row.res.kappa).add(row.v == Variant::minus ? lo : line).add(line).add(row.v == Variant::plus ? hi : line)
        .add(row.res.n_negative).add(cfg.fd_n).add(row.fd).add(rel);
  }
  if (out_of_regime)
    r.warnings.push_back(std::to_string(out_of_regime) + " rows with d/beta <= 2 are out of regime (not asserted)");
  r.check("exactly one negative eigenvalue", single);
  std::string failing;
  int n_failing = 0;
  for (const auto& row : l1.rows)
    if (row.in_regime && !row.pass && n_failing++ < 3)
      failing += " (beta=" + describe_double(row.beta) + ", d/beta=" + describe_double(row.d / row.beta) +
                 ", slack=" + describe_double(row.slack) + ")";
  if (n_failing) failing = std::to_string(n_failing) + " rows violate, first" + failing;
  r.check("transverse eigenvalue bounds", l1.all_pass(), failing.empty() ? "all in-regime rows" : failing);
  r.check("secular root vs finite differences", fd_ok, "max relative " + describe_double(worst_fd));

  if (cfg.form.trials > 0) {
    const FormInequalityReport f = check_form_inequality(cfg.form.beta, cfg.form.d, cfg.form.trials, cfg.seed,
                                                         cfg.tol.form);
    r.check("form inequality on random trial functions", f.ok(),
            std::to_string(f.violations) + " of " + std::to_string(f.trials) + " violate");
    r.check("ground state saturates the form bound", f.saturation_vs_bound <= 1e-8,
            "relative gap " + describe_double(f.saturation_vs_bound));
    r.report["form_check"] = {{"beta", f.beta}, {"d", f.d}, {"bound", f.bound}, {"trials", f.trials},
                              {"violations", f.violations}, {"worst_margin", f.worst_margin},
                              {"neumann_eigenvalue", f.neumann_eigenvalue},
                              {"saturation_vs_bound", f.saturation_vs_bound}};
  }
  r.report["observed_constant"] = l1.observed_constant;
  r.tables.push_back({"", std::move(csv)});
  return r;
}

inline ExperimentResult run_effective(const RunConfig& cfg) {
  ExperimentResult r{"effective", cfg.surface.name};
  const ChartPtr chart = make_chart(cfg.surface);
  const SupNorms norms = sup_norms(*chart);
  const bool sphere = cfg.surface.name == "sphere";
  const std::string op_name = cfg.d ? to_string(cfg.sign) : "S";

  Csv csv({"surface", "operator", "d", "j", "mu", "extrapolated", "error_estimate", "mesh"});
  std::vector<SpectralResult> results;
  std::optional<VPm> v;
  if (cfg.d && *cfg.d > 0) v = estimate_v_pm(*chart, *cfg.d, 16);
  if (v && !v->stable) r.warnings.push_back(v->warning);
  if (sphere) {
    const double R = cfg.surface.params.at("R");
    results.push_back(cfg.d && *cfg.d > 0 ? sphere_spectrum_U(R, *cfg.d, cfg.sign, norms.rho, *v, cfg.count)
                                          : sphere_spectrum(R, cfg.count));
    results.back().mesh_sizes = {0};
  } else {
    const double d = cfg.d.value_or(0.0);
    const Variant sign = cfg.sign;
    const VPm vv = v.value_or(VPm{});
    OperatorFamily family = [&, d, sign, vv](int n) {
      SurfaceMesh mesh(chart, n, n);
      return d > 0 ? assemble_U(mesh, d, sign, norms, vv) : assemble_S(mesh);
    };
    results.resize(cfg.mesh_sizes.size());
    parallel_for(cfg.mesh_sizes.size(), cfg.jobs,
                 [&](std::size_t k) { results[k] = eigen_lowest(family, cfg.mesh_sizes[k], cfg.count); });
  }
  bool ascending = true, finite = true;
  for (const auto& res : results) {
    for (std::size_t j = 0; j < res.values.size(); ++j) {
      finite = finite && std::isfinite(res.values[j]);
      if (j > 0) ascending = ascending && res.values[j - 1] <= res.values[j];
      csv.row().add(chart->name()).add(op_name).add(cfg.d.value_or(0.0)).add(static_cast<int>(j))
          .add(res.values[j]).add(res.extrapolated[j]).add(res.error_estimate[j]).add(res.mesh_sizes.back());
    }
  }
  r.check("eigenvalues finite and ascending", ascending && finite);
  if (results.size() >= 2) {
    bool decreasing = true;
    for (std::size_t k = 1; k < results.size(); ++k)
      for (std::size_t j = 0; j < results[k].values.size(); ++j)
        decreasing = decreasing && results[k].error_estimate[j] <= results[k - 1].error_estimate[j];
    r.check("refinement decreases the error estimate", decreasing);
  }
  const double mu0 = results.back().values.front();
  r.report["mu0"] = mu0;
  if ((cfg.surface.name == "torus" || cfg.surface.name == "bump") && !cfg.d)
    r.check("lowest eigenvalue of S is negative", mu0 < 0, "mu0 = " + describe_double(mu0));

  if (cfg.d && *cfg.d > 0 && !sphere) {
    // Operator ordering against S on the finest mesh.
    const SpectralResult s = eigen_lowest(assemble_S(SurfaceMesh(chart, cfg.mesh_sizes.back(), cfg.mesh_sizes.back())),
                                          cfg.count);
    bool ordered = true;
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      const double diff = results.back().values[j] - s.values[j];
      ordered = ordered && (cfg.sign == Variant::plus ? diff >= -1e-10 : diff <= 1e-10);
    }
    r.check("operator ordering against S", ordered);
  }

  if (!cfg.d && cfg.surface.name != "plane" && cfg.surface.name != "plane-box" && !cfg.d_grid.empty()) {
    const int j_max = std::min(cfg.count - 1, sphere ? 8 : 0);
    const Lemma2Report l2 = sphere ? verify_lemma2_sphere(cfg.surface.params.at("R"), cfg.d_grid, j_max)
                                   : verify_lemma2(chart, cfg.d_grid, j_max,
                                                   {cfg.mesh_sizes.back(), cfg.tol.lemma2_intercept,
                                                    cfg.tol.lemma2_quadratic, 32, cfg.jobs});
    Csv fit({"surface", "j", "sign", "intercept", "slope", "quadratic", "mu_direct", "intercept_error",
             "quad_ratio", "expected_slope", "pass"});
    for (const auto& f : l2.fits)
      fit.row().add(chart->name()).add(f.j).add(to_string(f.sign)).add(f.intercept).add(f.slope).add(f.quadratic)
          .add(f.mu_direct).add(f.intercept_error).add(f.quad_ratio).add(f.expected_slope).add(f.pass);
    std::string diag;
    for (const auto& s : l2.diagnostics) diag += (diag.empty() ? "" : "; ") + s;
    r.check("longitudinal operators expand linearly in d", l2.all_pass(), diag);
    r.report["lemma2"] = {{"v_minus", l2.v.v_minus}, {"v_plus", l2.v.v_plus}, {"mesh", l2.mesh}, {"d_grid", l2.d_grid}};
    r.tables.push_back({"lemma2", std::move(fit)});
  }
  r.tables.insert(r.tables.begin(), {"", std::move(csv)});
  return r;
}

inline ExperimentResult run_sphere(const RunConfig& cfg) {
  if (cfg.surface.name != "sphere") throw ConfigError("the sphere experiment requires surface 'sphere'");
  ExperimentResult r{"sphere", "sphere"};
  const double R = cfg.surface.params.at("R");
  const auto betas = cfg.beta_grid.resolve();
  std::vector<SphereSpectrum> spectra(betas.size());
  parallel_for(betas.size(), cfg.jobs,
               [&](std::size_t k) { spectra[k] = sphere_eigenvalues(R, betas[k], cfg.l_max); });

  Csv csv({"R", "beta", "l", "present", "kappa", "lambda", "degeneracy", "secular_residual", "lambda_plus_4_over_beta2",
           "variational_bound"});
  bool variational = true;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const double vb = variational_bound(R, betas[k]);
    for (const auto& lv : spectra[k].levels) {
      csv.row().add(R).add(betas[k]).add(lv.l).add(lv.present).add(lv.kappa).add(lv.lambda).add(lv.degeneracy)
          .add(lv.residual).add(lv.present ? lv.lambda + 4 / (betas[k] * betas[k]) : kNaN).add(vb);
    }
    const auto& l0 = spectra[k].levels.front();
    variational = variational && l0.present && l0.lambda <= vb;
  }
  r.check("lowest eigenvalue below the variational bound", variational);

  // Finite-difference oracle at one coupling.
  const double beta = cfg.oracle_beta;
  const double R_cut = R + 20 * beta;
  Csv fd({"R", "beta", "l", "secular", "fd_n", "fd", "fd_relative", "richardson_ratio"});
  bool fd_ok = true, ratio_ok = true;
  const SphereSpectrum ref = sphere_eigenvalues(R, beta, cfg.l_max);
  std::vector<std::array<double, 3>> fdv(ref.levels.size());
  parallel_for(ref.levels.size(), cfg.jobs, [&](std::size_t l) {
    if (!ref.levels[l].present) return;
    for (int k = 0; k < 3; ++k)
      fdv[l][k] = radial_fd_oracle(R, beta, static_cast<int>(l), cfg.fd_n >> (2 - k), R_cut);
  });
  for (std::size_t l = 0; l < ref.levels.size(); ++l) {
    if (!ref.levels[l].present) continue;
    const double sec = ref.levels[l].lambda;
    const double rel = std::abs(fdv[l][2] - sec) / std::abs(sec);
    const double ratio = (fdv[l][0] - fdv[l][1]) / (fdv[l][1] - fdv[l][2]);
    fd_ok = fd_ok && rel <= cfg.tol.fd_relative;
    ratio_ok = ratio_ok && ratio >= 3.5 && ratio <= 4.5;
    fd.row().add(R).add(beta).add(static_cast<int>(l)).add(sec).add(cfg.fd_n).add(fdv[l][2]).add(rel).add(ratio);
  }
  r.check("secular roots vs radial finite differences", fd_ok);
  r.check("radial finite differences converge at second order", ratio_ok);
  r.tables.push_back({"", std::move(csv)});
  r.tables.push_back({"fd", std::move(fd)});
  return r;
}

inline Json bound_state_json(const BoundStateReport& b) {
  Json rows = Json::array();
  for (const auto& row : b.rows)
    rows.push_back({{"beta", row.beta}, {"d", row.d}, {"in_regime", row.in_regime},
                    {"upper0", std::isfinite(row.upper0) ? Json(row.upper0) : Json()},
                    {"threshold", std::isfinite(row.threshold) ? Json(row.threshold) : Json()},
                    {"separation", std::isfinite(row.separation) ? Json(row.separation) : Json()},
                    {"variational", std::isfinite(row.variational) ? Json(row.variational) : Json()},
                    {"pass", row.pass}});
  return {{"compact", b.compact}, {"control", b.control}, {"mu0", b.mu0}, {"required_gap", b.required_gap},
          {"onset_beta", b.onset_beta ? Json(*b.onset_beta) : Json()}, {"rows", rows}};
}

inline ExperimentResult run_asymptotics(const RunConfig& cfg) {
  ExperimentResult r{"asymptotics", cfg.surface.name};
  const double edge = std::exp(-2.0);
  std::vector<double> in, out;
  for (double b : cfg.beta_grid.resolve()) (b < edge ? in : out).push_back(b);
  for (double b : out) r.warnings.push_back("beta = " + describe_double(b) + " is out of regime (d/beta <= 2); not computed");
  r.report["out_of_regime"] = out;
  if (in.size() < 2) {
    r.check("at least two in-regime couplings", false);
    return r;
  }
  const EffectiveModel model(cfg.surface, {cfg.mesh_sizes.back(), 16});
  const AsymptoticsReport rep = asymptotic_residuals(model, in, cfg.j_max, {cfg.tol.sandwich, cfg.tol.envelope, cfg.jobs});

  Csv csv({"surface", "beta", "d", "j", "t_minus", "t_plus", "mu", "mu_minus", "mu_plus", "lower", "upper",
           "lambda", "error_bar", "residual", "sandwiched", "mesh"});
  Json rows = Json::array();
  bool within_bar = true, threshold_ok = true;
  for (const auto& row : rep.rows) {
    const auto& b = row.bracket;
    for (std::size_t j = 0; j < row.lambda.size(); ++j) {
      csv.row().add(cfg.surface.name).add(b.beta).add(b.d).add(static_cast<int>(j)).add(b.t_minus).add(b.t_plus)
          .add(b.mu[j]).add(b.mu_minus[j]).add(b.mu_plus[j]).add(b.lower[j]).add(b.upper[j]).add(row.lambda[j])
          .add(row.error_bar[j]).add(row.residual[j]).add(static_cast<bool>(row.sandwiched[j])).add(model.mesh_size());
      if (!rep.oracle) within_bar = within_bar && std::abs(row.residual[j]) <= row.error_bar[j] * (1 + 1e-12);
    }
    threshold_ok = threshold_ok && row.threshold.consistent;
    rows.push_back({{"beta", b.beta}, {"d", b.d}, {"in_regime", b.in_regime}, {"theta", b.theta},
                    {"v_minus", b.v.v_minus}, {"v_plus", b.v.v_plus}, {"threshold", row.threshold.threshold},
                    {"threshold_gap", row.threshold.gap}});
  }
  auto violations = [&](const std::string& what) {
    std::string first;
    int n = 0;
    for (const auto& v : rep.violations)
      if (v.what == what && n++ < 3) first += " (j=" + std::to_string(v.j) + ", beta=" + describe_double(v.beta) + ")";
    return n ? std::to_string(n) + " violations, first" + first : std::string();
  };
  auto join = [](const std::string& a, const std::string& b) { return b.empty() ? a : a + "; " + b; };
  r.check("residual envelope C beta|ln beta|", rep.envelope_ok, join("C = " + describe_double(rep.envelope_C), violations("residual envelope")));
  r.check("bracket width envelope C' beta|ln beta|", rep.width_ok,
          join("C' = " + describe_double(rep.width_C), violations("bracket width envelope")));
  r.check("threshold bound below t_-", threshold_ok);
  if (rep.oracle) {
    r.check("oracle eigenvalues inside the bracket", rep.sandwich_ok, violations("sandwich"));
    r.check("residuals decrease with beta", rep.decreasing_ok, violations("residual not decreasing"));
  } else {
    r.check("midpoint residual within the bracket half-width", within_bar);
  }
  const BoundStateReport bs = bound_state_existence(model, in, cfg.jobs);
  if (!bs.compact && !bs.control && !bs.all_pass())
    r.warnings.push_back("bound-state separation not established on the whole grid (informational)");
  r.report["envelope_C"] = rep.envelope_C;
  r.report["width_C"] = rep.width_C;
  r.report["rows"] = rows;
  r.report["bound_state"] = bound_state_json(bs);
  r.tables.push_back({"", std::move(csv)});
  return r;
}

}  // namespace detail

inline ExperimentResult run_experiment(const std::string& name, const RunConfig& cfg) {
  if (name == "geometry-check") return detail::run_geometry(cfg);
  if (name == "transverse") return detail::run_transverse(cfg);
  if (name == "effective") return detail::run_effective(cfg);
  if (name == "sphere") return detail::run_sphere(cfg);
  if (name == "asymptotics") return detail::run_asymptotics(cfg);
  throw ConfigError("unknown experiment '" + name + "'");
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

/// Funnels all file output of a run through one lock.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, std::string timestamp)
      : dir_(std::move(dir)), timestamp_(std::move(timestamp)) {
    std::filesystem::create_directories(dir_);
  }

  std::string write(const std::string& experiment, const std::string& surface, const std::string& suffix,
                    const std::string& ext, const std::string& body) {
    std::lock_guard lock(mutex_);
    std::string name = experiment + "-" + surface + "-" + timestamp_;
    if (!suffix.empty()) name += "." + suffix;
    name += "." + ext;
    write_file(dir_ / name, body);
    written_.push_back(name);
    return name;
  }

  void write_manifest(const Json& manifest) {
    std::lock_guard lock(mutex_);
    write_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
  }

  const std::vector<std::string>& written() const { return written_; }
  const std::string& timestamp() const { return timestamp_; }

 private:
  static void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << body;
  }

  std::filesystem::path dir_;
  std::string timestamp_;
  std::mutex mutex_;
  std::vector<std::string> written_;
};

struct RunOutcome {
  int exit_code = kExitPass;
  std::vector<ExperimentResult> results;
  std::vector<std::string> errors;
};

/// Runs the configured experiment (all of them for "full"), writes the
/// artifacts and the manifest, and reports on `log`.
inline RunOutcome run(const RunConfig& cfg, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  RunOutcome outcome;
  cfg.validate();
  std::vector<std::string> names;
  if (cfg.experiment == "full") {
    names = {"geometry-check", "transverse", "effective", "asymptotics"};
    if (cfg.surface.name == "sphere") names.insert(names.begin() + 3, "sphere");
  } else {
    names = {cfg.experiment};
  }
  ArtifactWriter writer(cfg.output_dir, utc_timestamp());
  outcome.results.resize(names.size());
  std::vector<int> codes(names.size(), kExitPass);
  std::vector<std::string> messages(names.size());
  RunConfig inner = cfg;
  if (names.size() > 1) inner.jobs = std::max(1, cfg.jobs / static_cast<int>(names.size()));
  parallel_for(names.size(), names.size() > 1 ? cfg.jobs : 1, [&](std::size_t k) {
    try {
      outcome.results[k] = run_experiment(names[k], names.size() > 1 ? inner : cfg);
      codes[k] = outcome.results[k].pass() ? kExitPass : kExitCheckFailed;
    } catch (const ConfigError& e) {
      codes[k] = kExitConfig;
      messages[k] = e.what();
    } catch (const LayerWidthError& e) {
      codes[k] = kExitConfig;
      messages[k] = e.what();
    } catch (const DomainError& e) {
      codes[k] = kExitConfig;
      messages[k] = e.what();
    } catch (const Error& e) {
      codes[k] = kExitNonConvergence;
      messages[k] = e.what();
    }
    outcome.results[k].experiment = names[k];
    outcome.results[k].surface = cfg.surface.name;
  });

  Json manifest;
  manifest["timestamp"] = writer.timestamp();
  manifest["config"] = to_json(cfg);
  Json experiments = Json::array();
  for (std::size_t k = 0; k < names.size(); ++k) {
    ExperimentResult& res = outcome.results[k];
    Json entry{{"experiment", names[k]}, {"exit_code", codes[k]}};
    Json files = Json::array();
    if (codes[k] == kExitPass || codes[k] == kExitCheckFailed) {
      for (const auto& t : res.tables) files.push_back(writer.write(names[k], res.surface, t.suffix, "csv", t.csv.str()));
      Json report = res.report;
      Json checks = Json::array();
      for (const auto& c : res.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
      report["checks"] = checks;
      report["warnings"] = res.warnings;
      report["surface"] = {{"name", cfg.surface.name}, {"params", cfg.surface.params}};
      files.push_back(writer.write(names[k], res.surface, "", "json", report.dump(2) + "\n"));
      for (const auto& c : res.checks) log << (c.pass ? "[PASS] " : "[FAIL] ") << names[k] << ": " << c.name
                                           << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
      for (const auto& w : res.warnings) log << "[WARN] " << names[k] << ": " << w << "\n";
      for (const auto& c : res.checks)
        if (!c.pass) err << "failed check: " << names[k] << ": " << c.name << "\n";
    } else {
      err << names[k] << ": " << messages[k] << "\n";
      entry["error"] = messages[k];
      outcome.errors.push_back(messages[k]);
    }
    entry["artifacts"] = files;
    experiments.push_back(entry);
    outcome.exit_code = std::max(outcome.exit_code, codes[k]);
  }
  // Configuration problems outrank non-convergence and failed checks.
  for (int c : codes)
    if (c == kExitConfig) outcome.exit_code = kExitConfig;
  manifest["experiments"] = experiments;
  manifest["exit_code"] = outcome.exit_code;
  writer.write_manifest(manifest);
  return outcome;
}

}  // namespace dprime
