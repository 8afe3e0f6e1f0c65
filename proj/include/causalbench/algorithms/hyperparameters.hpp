#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalbench/errors.hpp"
#include "causalbench/rng.hpp"

namespace causalbench {

enum class ParamType { Real, Integer };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::Real;
  double min = -INFINITY;  // inclusive unless min_exclusive
  double max = INFINITY;   // inclusive
  bool min_exclusive = false;
  double default_value = 0.0;           // package/author default
  std::vector<double> grid;             // swept values
  std::optional<double> sim_mean;       // starred value in the reference grid table
  bool post_fit = false;                // applied after fitting (thresholds, test levels)
  std::string description;

  bool in_domain(double v) const {
    if (!std::isfinite(v)) return false;
    if (type == ParamType::Integer && v != std::floor(v)) return false;
    if (min_exclusive ? !(v > min) : !(v >= min)) return false;
    return v <= max;
  }
};

/// Declared parameters of one algorithm plus fixed settings it always uses.
struct HyperparameterSpace {
  std::string algorithm;
  std::vector<ParamSpec> params;
  std::map<std::string, std::string> fixed;  // informational, e.g. h_tol

  const ParamSpec* find(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return &p;
    return nullptr;
  }
};

/// Canonical text for a parameter value; shortest round-tripping decimal.
inline std::string format_param(double v) {
  char buf[64];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct HyperparameterAssignment {
  std::string algorithm;
  std::map<std::string, double> params;  // ordered by name

  double get(const std::string& name) const {
    const auto it = params.find(name);
    if (it == params.end()) throw ConfigError(algorithm + ": missing hyperparameter '" + name + "'");
    return it->second;
  }
  int get_int(const std::string& name) const { return static_cast<int>(std::lround(get(name))); }

  /// "alg|a=0.1;b=2" with sorted keys.
  std::string canonical() const {
    std::string out = algorithm + "|";
    bool first = true;
    for (const auto& [k, v] : params) {
      if (!first) out += ';';
      first = false;
      out += k + "=" + format_param(v);
    }
    return out;
  }

  /// Stable 16-hex-digit id of the canonical form.
  std::string id() const {
    const std::uint64_t h = fnv1a64(canonical());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  /// Same assignment restricted to parameters that affect fitting.
  HyperparameterAssignment fit_part(const HyperparameterSpace& space) const {
    HyperparameterAssignment out{algorithm, {}};
    for (const auto& [k, v] : params) {
      const auto* spec = space.find(k);
      if (!spec || !spec->post_fit) out.params[k] = v;
    }
    return out;
  }

  friend bool operator==(const HyperparameterAssignment&, const HyperparameterAssignment&) = default;
};

inline void validate_assignment(const HyperparameterSpace& space, const HyperparameterAssignment& a) {
  if (a.algorithm != space.algorithm)
    throw ConfigError("assignment for '" + a.algorithm + "' checked against '" + space.algorithm + "'");
  for (const auto& [k, v] : a.params) {
    const auto* spec = space.find(k);
    if (!spec) throw ConfigError(space.algorithm + ": unknown hyperparameter '" + k + "'");
    if (!spec->in_domain(v))
      throw ConfigError(space.algorithm + ": value " + format_param(v) + " outside the domain of '" + k + "'");
  }
  for (const auto& spec : space.params)
    if (!a.params.count(spec.name))
      throw ConfigError(space.algorithm + ": missing hyperparameter '" + spec.name + "'");
}

inline HyperparameterAssignment default_assignment(const HyperparameterSpace& space) {
  HyperparameterAssignment a{space.algorithm, {}};
  for (const auto& p : space.params) a.params[p.name] = p.default_value;
  return a;
}

inline std::optional<HyperparameterAssignment> sim_mean_assignment(const HyperparameterSpace& space) {
  HyperparameterAssignment a{space.algorithm, {}};
  for (const auto& p : space.params) {
    if (!p.sim_mean) return std::nullopt;
    a.params[p.name] = *p.sim_mean;
  }
  return a;
}

/// Cross product of per-parameter grids, first parameter varying slowest.
inline std::vector<HyperparameterAssignment> expand_grid(const std::string& algorithm,
                                                         const std::map<std::string, std::vector<double>>& grid) {
  std::vector<HyperparameterAssignment> out{{algorithm, {}}};
  for (const auto& [name, values] : grid) {
    if (values.empty()) throw ConfigError(algorithm + ": empty grid for '" + name + "'");
    std::vector<HyperparameterAssignment> next;
    next.reserve(out.size() * values.size());
    for (const auto& partial : out)
      for (double v : values) {
        auto a = partial;
        a.params[name] = v;
        next.push_back(std::move(a));
      }
    out = std::move(next);
  }
  return out;
}

inline std::map<std::string, std::vector<double>> declared_grid(const HyperparameterSpace& space) {
  std::map<std::string, std::vector<double>> g;
  for (const auto& p : space.params) g[p.name] = p.grid;
  return g;
}

}  // namespace causalbench
