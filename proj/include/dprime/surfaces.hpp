#pragma once

// Construction of the built-in surfaces from a name and a parameter map.

#include <map>
#include <memory>
#include <set>
#include <string>

#include "dprime/chart.hpp"
#include "dprime/errors.hpp"

namespace dprime {

struct SurfaceSpec {
  std::string name = "sphere";
  std::map<std::string, double> params;
};

/// Parameters accepted by each surface, with their defaults.
inline const std::map<std::string, std::map<std::string, double>>& surface_defaults() {
  static const std::map<std::string, std::map<std::string, double>> table{
      {"plane", {{"L", 10.0}}},
      {"plane-box", {{"L1", 1.0}, {"L2", 1.0}}},
      {"sphere", {{"R", 1.0}}},
      {"sphere-stereographic", {{"R", 1.0}, {"L", 4.0}}},
      {"torus", {{"R", 3.0}, {"r", 1.0}}},
      {"bump", {{"h", 1.0}, {"sigma", 1.0}, {"L", 12.0}}},
  };
  return table;
}

/// Fills in defaults; unknown surfaces or parameters are configuration errors.
inline SurfaceSpec resolve(const SurfaceSpec& spec) {
  const auto& table = surface_defaults();
  const auto it = table.find(spec.name);
  if (it == table.end()) throw ConfigError("unknown surface '" + spec.name + "'");
  SurfaceSpec out{spec.name, it->second};
  for (const auto& [k, v] : spec.params) {
    if (!it->second.count(k)) throw ConfigError("surface '" + spec.name + "' has no parameter '" + k + "'");
    out.params[k] = v;
  }
  return out;
}

inline ChartPtr make_chart(const SurfaceSpec& raw) {
  const SurfaceSpec spec = resolve(raw);
  const auto& p = spec.params;
  try {
    if (spec.name == "plane") return std::make_shared<PlaneChart>(p.at("L"));
    if (spec.name == "plane-box") return std::make_shared<PlaneBoxChart>(p.at("L1"), p.at("L2"));
    if (spec.name == "sphere") return std::make_shared<SphereChart>(p.at("R"));
    if (spec.name == "sphere-stereographic") return make_stereographic_sphere(p.at("R"), p.at("L"));
    if (spec.name == "torus") return std::make_shared<TorusChart>(p.at("R"), p.at("r"));
    return std::make_shared<BumpChart>(p.at("h"), p.at("sigma"), p.at("L"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace dprime
