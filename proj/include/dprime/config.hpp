#pragma once

// Run configuration: a JSON object with a fixed key set. Unknown keys at any
// level are rejected so that a typo in a sweep cannot silently fall back to a
// default.

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dprime/errors.hpp"
#include "dprime/surfaces.hpp"
#include "dprime/variant.hpp"

namespace dprime {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"geometry-check", "transverse", "effective",
                                              "sphere",         "asymptotics", "full"};
  return names;
}

struct BetaGrid {
  std::vector<double> values;  // explicit values take precedence
  double start = 0.05, stop = 0.005;
  int count = 4;
  bool geometric = true;

  std::vector<double> resolve() const {
    if (!values.empty()) return values;
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
      const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
      out.push_back(geometric ? start * std::pow(stop / start, t) : start + (stop - start) * t);
    }
    return out;
  }
};

struct Tolerances {
  double fd_relative = 1e-5;
  double lemma1_slack = 1e-12;
  double identity = 1e-10;
  double closed_form = 1e-8;
  double sandwich = 1e-9;
  double envelope = 1e-9;
  double lemma2_intercept = 0.02;
  double lemma2_quadratic = 0.1;
  double form = 1e-12;
};

struct FormCheck {
  double beta = 0.1, d = 0.3;
  int trials = 1000;
};

struct RunConfig {
  std::string experiment;
  SurfaceSpec surface;
  BetaGrid beta_grid;
  std::vector<double> d_over_beta{2.5, 3, 5, 10};
  double theta = 0;
  std::vector<int> mesh_sizes{96};
  int count = 6;
  int j_max = 8;
  int l_max = 4;
  std::optional<double> d;
  Variant sign = Variant::plus;
  std::vector<double> d_grid{0.02, 0.04, 0.06, 0.08};
  int samples = 100;  // per direction for geometry checks
  int fd_n = 10000;
  double oracle_beta = 0.1;
  FormCheck form;
  Tolerances tol;
  std::string output_dir = "out";
  int jobs = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

namespace detail {

inline void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
T typed(const Json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

template <class T>
void read(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = typed<T>(obj.at(key), key);
}

template <class T>
void read_list(const Json& obj, const char* key, std::vector<T>& out) {
  if (!obj.contains(key)) return;
  const Json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(std::string("key '") + key + "' must be an array");
  out.clear();
  for (const auto& x : v) out.push_back(typed<T>(x, key));
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  using detail::read;
  using detail::read_list;
  detail::reject_unknown(j,
                         {"experiment", "surface", "beta_grid", "d_over_beta", "theta", "mesh_sizes", "count",
                          "j_max", "l_max", "d", "sign", "d_grid", "samples", "fd_n", "oracle_beta", "form_check",
                          "tolerances", "output_dir", "jobs", "seed"},
                         "config");
  RunConfig c;
  read(j, "experiment", c.experiment);
  if (j.contains("surface")) {
    const Json& s = j.at("surface");
    detail::reject_unknown(s, {"name", "params"}, "surface");
    read(s, "name", c.surface.name);
    if (s.contains("params")) {
      const Json& p = s.at("params");
      if (!p.is_object()) throw ConfigError("surface.params must be an object");
      for (auto it = p.begin(); it != p.end(); ++it) c.surface.params[it.key()] = detail::typed<double>(*it, it.key());
    }
  }
  if (j.contains("beta_grid")) {
    const Json& g = j.at("beta_grid");
    detail::reject_unknown(g, {"values", "start", "stop", "count", "spacing"}, "beta_grid");
    read_list(g, "values", c.beta_grid.values);
    read(g, "start", c.beta_grid.start);
    read(g, "stop", c.beta_grid.stop);
    read(g, "count", c.beta_grid.count);
    std::string spacing = "geometric";
    read(g, "spacing", spacing);
    if (spacing != "geometric" && spacing != "linear") throw ConfigError("beta_grid.spacing must be geometric or linear");
    c.beta_grid.geometric = spacing == "geometric";
  }
  read_list(j, "d_over_beta", c.d_over_beta);
  read(j, "theta", c.theta);
  read_list(j, "mesh_sizes", c.mesh_sizes);
  read(j, "count", c.count);
  read(j, "j_max", c.j_max);
  read(j, "l_max", c.l_max);
  if (j.contains("d")) c.d = detail::typed<double>(j.at("d"), "d");
  if (j.contains("sign")) {
    const std::string s = detail::typed<std::string>(j.at("sign"), "sign");
    if (s != "plus" && s != "minus") throw ConfigError("sign must be plus or minus");
    c.sign = s == "plus" ? Variant::plus : Variant::minus;
  }
  read_list(j, "d_grid", c.d_grid);
  read(j, "samples", c.samples);
  read(j, "fd_n", c.fd_n);
  read(j, "oracle_beta", c.oracle_beta);
  if (j.contains("form_check")) {
    const Json& f = j.at("form_check");
    detail::reject_unknown(f, {"beta", "d", "trials"}, "form_check");
    read(f, "beta", c.form.beta);
    read(f, "d", c.form.d);
    read(f, "trials", c.form.trials);
  }
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    detail::reject_unknown(t,
                           {"fd_relative", "lemma1_slack", "identity", "closed_form", "sandwich", "envelope",
                            "lemma2_intercept", "lemma2_quadratic", "form"},
                           "tolerances");
    read(t, "fd_relative", c.tol.fd_relative);
    read(t, "lemma1_slack", c.tol.lemma1_slack);
    read(t, "identity", c.tol.identity);
    read(t, "closed_form", c.tol.closed_form);
    read(t, "sandwich", c.tol.sandwich);
    read(t, "envelope", c.tol.envelope);
    read(t, "lemma2_intercept", c.tol.lemma2_intercept);
    read(t, "lemma2_quadratic", c.tol.lemma2_quadratic);
    read(t, "form", c.tol.form);
  }
  read(j, "output_dir", c.output_dir);
  read(j, "jobs", c.jobs);
  if (j.contains("seed")) {
    const Json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed must be a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.surface = resolve(c.surface);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline void RunConfig::validate() const {
  bool known = false;
  for (const auto& e : experiment_names()) known = known || e == experiment;
  if (!known) throw ConfigError("unknown experiment '" + experiment + "'");
  const auto betas = beta_grid.resolve();
  if (betas.empty()) throw ConfigError("beta grid is empty");
  for (double b : betas)
    if (!(b > 0 && b < 1)) throw ConfigError("beta grid must lie in (0, 1)");
  if (beta_grid.values.empty() && beta_grid.count < 1) throw ConfigError("beta_grid.count must be positive");
  for (double r : d_over_beta)
    if (!(r > 0)) throw ConfigError("d_over_beta entries must be positive");
  if (!(theta >= 0)) throw ConfigError("theta must be non-negative");
  if (mesh_sizes.empty()) throw ConfigError("mesh_sizes is empty");
  for (int n : mesh_sizes)
    if (n < 8 || n % 2) throw ConfigError("mesh sizes must be even and at least 8");
  if (count < 1 || count > 20) throw ConfigError("count must lie in [1, 20]");
  if (j_max < 0 || j_max > 19) throw ConfigError("j_max must lie in [0, 19]");
  if (l_max < 0 || l_max > 40) throw ConfigError("l_max must lie in [0, 40]");
  if (d && !(*d >= 0)) throw ConfigError("d must be non-negative");
  for (double x : d_grid)
    if (!(x > 0)) throw ConfigError("d_grid entries must be positive");
  if (samples < 2) throw ConfigError("samples must be at least 2");
  if (fd_n < 16) throw ConfigError("fd_n must be at least 16");
  if (!(oracle_beta > 0)) throw ConfigError("oracle_beta must be positive");
  if (!(form.beta > 0) || !(form.d > 0) || form.trials < 0) throw ConfigError("form_check is invalid");
  for (double t : {tol.fd_relative, tol.lemma1_slack, tol.identity, tol.closed_form, tol.sandwich, tol.envelope,
                   tol.lemma2_intercept, tol.lemma2_quadratic, tol.form})
    if (!(t > 0)) throw ConfigError("tolerances must be positive");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
}

/// The fully resolved configuration, as echoed into the manifest.
inline Json to_json(const RunConfig& c) {
  Json j;
  j["experiment"] = c.experiment;
  j["surface"] = {{"name", c.surface.name}, {"params", c.surface.params}};
  j["beta_grid"] = {{"values", c.beta_grid.resolve()}};
  j["d_over_beta"] = c.d_over_beta;
  j["theta"] = c.theta;
  j["mesh_sizes"] = c.mesh_sizes;
  j["count"] = c.count;
  j["j_max"] = c.j_max;
  j["l_max"] = c.l_max;
  if (c.d) j["d"] = *c.d;
  j["sign"] = to_string(c.sign);
  j["d_grid"] = c.d_grid;
  j["samples"] = c.samples;
  j["fd_n"] = c.fd_n;
  j["oracle_beta"] = c.oracle_beta;
  j["form_check"] = {{"beta", c.form.beta}, {"d", c.form.d}, {"trials", c.form.trials}};
  j["tolerances"] = {{"fd_relative", c.tol.fd_relative},     {"lemma1_slack", c.tol.lemma1_slack},
                     {"identity", c.tol.identity},           {"closed_form", c.tol.closed_form},
                     {"sandwich", c.tol.sandwich},           {"envelope", c.tol.envelope},
                     {"lemma2_intercept", c.tol.lemma2_intercept},
                     {"lemma2_quadratic", c.tol.lemma2_quadratic}, {"form", c.tol.form}};
  j["output_dir"] = c.output_dir;
  j["jobs"] = c.jobs;
  j["seed"] = c.seed;
  return j;
}

}  // namespace dprime
