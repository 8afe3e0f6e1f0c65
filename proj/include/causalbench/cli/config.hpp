#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "causalbench/algorithms/registry.hpp"
#include "causalbench/errors.hpp"
#include "causalbench/harness/setting.hpp"
#include "causalbench/harness/sweep.hpp"

namespace causalbench {

struct AlgorithmConfig {
  std::map<std::string, std::vector<double>> grid;  // every declared parameter, in name order
  bool include_default = true;

  friend bool operator==(const AlgorithmConfig&, const AlgorithmConfig&) = default;
};

struct SeedPolicy {
  std::uint64_t base_seed = 0;
  bool env_offset = true;  // add CAUSALBENCH_SEED_OFFSET

  std::uint64_t effective() const { return base_seed + (env_offset ? seed_offset_from_env() : 0); }
  friend bool operator==(const SeedPolicy&, const SeedPolicy&) = default;
};

/// A parsed run configuration. Settings are stored fully expanded.
struct RunConfig {
  std::vector<ExperimentSetting> settings;
  std::map<std::string, AlgorithmConfig> algorithms;
  int workers = 1;
  std::string out = "results";
  SeedPolicy seed_policy;
  bool standardize = false;

  std::vector<AlgorithmPrograms> programs() const {
    std::vector<AlgorithmPrograms> out_programs;
    for (const auto& [name, ac] : algorithms) {
      AlgorithmPrograms ap{name, expand_grid(name, ac.grid), std::nullopt};
      if (ac.include_default) ap.default_assignment = default_assignment(Registry::instance().get(name).space());
      out_programs.push_back(std::move(ap));
    }
    return out_programs;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

using json = nlohmann::ordered_json;

inline void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
}

template <class T>
std::vector<T> scalar_or_list(const json& v, const std::string& where) {
  std::vector<T> out;
  try {
    if (v.is_array())
      for (const auto& e : v) out.push_back(e.get<T>());
    else
      out.push_back(v.get<T>());
  } catch (const json::exception&) {
    throw ConfigError(where + ": wrong value type");
  }
  if (out.empty()) throw ConfigError(where + ": empty list");
  return out;
}

inline std::vector<int> parse_seeds(const json& v, const std::string& where) {
  if (v.is_object()) {
    check_keys(v, where, {"count", "first"});
    if (!v.contains("count") || !v["count"].is_number_integer()) throw ConfigError(where + ".count: integer required");
    const int count = v["count"].get<int>();
    const int first = v.contains("first") ? v["first"].get<int>() : 0;
    if (count < 1) throw ConfigError(where + ".count must be >= 1");
    std::vector<int> s;
    for (int i = 0; i < count; ++i) s.push_back(first + i);
    return s;
  }
  const auto s = scalar_or_list<int>(v, where);
  if (std::set<int>(s.begin(), s.end()).size() != s.size()) throw ConfigError(where + ": duplicate seeds");
  return s;
}

inline std::vector<ExperimentSetting> parse_setting_block(const json& b, const std::string& where) {
  check_keys(b, where,
             {"graph_type", "graph_p", "graph_d", "data_n", "data_sem", "seeds", "dataset_ref", "data_path",
              "truth_path"});
  std::vector<int> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  if (b.contains("seeds")) seeds = parse_seeds(b["seeds"], where + ".seeds");

  std::vector<ExperimentSetting> out;
  if (b.contains("dataset_ref")) {
    ExperimentSetting s;
    s.key.dataset_ref = b["dataset_ref"].get<std::string>();
    if (s.key.dataset_ref.empty()) throw ConfigError(where + ".dataset_ref: empty");
    if (b.contains("data_path")) s.data_path = b["data_path"].get<std::string>();
    if (b.contains("truth_path")) s.truth_path = b["truth_path"].get<std::string>();
    for (const char* k : {"graph_type", "graph_p", "graph_d", "data_n", "data_sem"})
      if (b.contains(k)) throw ConfigError(where + ": '" + k + "' cannot be combined with dataset_ref");
    s.seeds = seeds;
    out.push_back(std::move(s));
  } else {
    for (const char* k : {"graph_type", "graph_p", "graph_d", "data_n", "data_sem"})
      if (!b.contains(k)) throw ConfigError(where + ": missing '" + k + "'");
    for (const auto& t : scalar_or_list<std::string>(b["graph_type"], where + ".graph_type"))
      for (int p : scalar_or_list<int>(b["graph_p"], where + ".graph_p"))
        for (double d : scalar_or_list<double>(b["graph_d"], where + ".graph_d"))
          for (int n : scalar_or_list<int>(b["data_n"], where + ".data_n"))
            for (const auto& sem : scalar_or_list<std::string>(b["data_sem"], where + ".data_sem")) {
              ExperimentSetting s;
              s.key = {t, p, d, n, sem, ""};
              s.seeds = seeds;
              out.push_back(std::move(s));
            }
  }
  for (const auto& s : out) {
    try {
      s.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return out;
}

inline AlgorithmConfig declared_algorithm_config(const std::string& name) {
  return {declared_grid(Registry::instance().get(name).space()), true};
}

inline AlgorithmConfig parse_algorithm(const std::string& name, const json& v, const std::string& where) {
  if (!Registry::instance().contains(name)) throw ConfigError(where + ": unknown algorithm '" + name + "'");
  const auto& space = Registry::instance().get(name).space();
  AlgorithmConfig ac = declared_algorithm_config(name);
  if (v.is_boolean()) {
    if (!v.get<bool>()) throw ConfigError(where + ": use true or an object");
    return ac;
  }
  check_keys(v, where, {"grid", "include_default"});
  if (v.contains("include_default")) {
    if (!v["include_default"].is_boolean()) throw ConfigError(where + ".include_default: boolean required");
    ac.include_default = v["include_default"].get<bool>();
  }
  if (v.contains("grid")) {
    const auto& g = v["grid"];
    if (!g.is_object()) throw ConfigError(where + ".grid: expected an object");
    for (const auto& [param, values] : g.items()) {
      const auto* spec = space.find(param);
      if (!spec) throw ConfigError(where + ".grid: unknown key '" + param + "'");
      auto vals = scalar_or_list<double>(values, where + ".grid." + param);
      for (double x : vals)
        if (!spec->in_domain(x))
          throw ConfigError(where + ".grid." + param + ": value " + format_param(x) + " outside the domain");
      ac.grid[param] = std::move(vals);
    }
  }
  return ac;
}

}  // namespace detail

/// Parses a run configuration. Setting fields given as arrays expand to their
/// cross product; "paper_grids" (true or a list of names) selects the
/// registry grids and defaults, and entries under "algorithms" override them
/// per parameter.
inline RunConfig parse_run_config(const nlohmann::ordered_json& j) {
  using detail::json;
  detail::check_keys(j, "config",
                     {"settings", "algorithms", "paper_grids", "workers", "out", "seed_policy", "standardize"});
  RunConfig c;
  if (!j.contains("settings") || !j["settings"].is_array() || j["settings"].empty())
    throw ConfigError("config: 'settings' must be a nonempty list");
  for (std::size_t i = 0; i < j["settings"].size(); ++i) {
    auto block = detail::parse_setting_block(j["settings"][i], "settings[" + std::to_string(i) + "]");
    c.settings.insert(c.settings.end(), block.begin(), block.end());
  }
  for (std::size_t a = 0; a < c.settings.size(); ++a)
    for (std::size_t b = a + 1; b < c.settings.size(); ++b)
      if (c.settings[a].key == c.settings[b].key)
        throw ConfigError("config: setting " + c.settings[a].key.to_string() + " listed twice");

  if (j.contains("paper_grids")) {
    const auto& pg = j["paper_grids"];
    std::vector<std::string> names;
    if (pg.is_boolean()) {
      if (pg.get<bool>()) names = Registry::reference_algorithms();
    } else {
      names = detail::scalar_or_list<std::string>(pg, "paper_grids");
    }
    for (const auto& n : names) {
      if (!Registry::instance().contains(n)) throw ConfigError("paper_grids: unknown algorithm '" + n + "'");
      c.algorithms[n] = detail::declared_algorithm_config(n);
    }
  }
  if (j.contains("algorithms")) {
    if (!j["algorithms"].is_object()) throw ConfigError("algorithms: expected an object");
    for (const auto& [name, v] : j["algorithms"].items()) {
      auto ac = detail::parse_algorithm(name, v, "algorithms." + name);
      c.algorithms[name] = std::move(ac);
    }
  }
  if (c.algorithms.empty()) throw ConfigError("config: no algorithms selected");

  try {
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("standardize")) c.standardize = j["standardize"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: wrong value type (") + e.what() + ")");
  }
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.out.empty()) throw ConfigError("out: empty path");
  if (j.contains("seed_policy")) {
    const auto& sp = j["seed_policy"];
    detail::check_keys(sp, "seed_policy", {"base_seed", "env_offset"});
    if (sp.contains("base_seed")) {
      if (!sp["base_seed"].is_number_unsigned()) throw ConfigError("seed_policy.base_seed: non-negative integer");
      c.seed_policy.base_seed = sp["base_seed"].get<std::uint64_t>();
    }
    if (sp.contains("env_offset")) c.seed_policy.env_offset = sp["env_offset"].get<bool>();
  }
  return c;
}

inline RunConfig parse_run_config_text(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

inline RunConfig load_run_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config_text(text);
}

/// Canonical expanded form: one entry per setting, explicit grids.
inline nlohmann::ordered_json serialize(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["settings"] = nlohmann::ordered_json::array();
  for (const auto& s : c.settings) {
    nlohmann::ordered_json e;
    if (s.key.simulated()) {
      e["graph_type"] = s.key.graph_type;
      e["graph_p"] = s.key.graph_p;
      e["graph_d"] = s.key.graph_d;
      e["data_n"] = s.key.data_n;
      e["data_sem"] = s.key.data_sem;
    } else {
      e["dataset_ref"] = s.key.dataset_ref;
      e["data_path"] = s.data_path;
      if (!s.truth_path.empty()) e["truth_path"] = s.truth_path;
    }
    e["seeds"] = s.seeds;
    j["settings"].push_back(e);
  }
  j["algorithms"] = nlohmann::ordered_json::object();
  for (const auto& [name, ac] : c.algorithms) {
    nlohmann::ordered_json a;
    a["grid"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : ac.grid) a["grid"][k] = v;
    a["include_default"] = ac.include_default;
    j["algorithms"][name] = a;
  }
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["seed_policy"] = {{"base_seed", c.seed_policy.base_seed}, {"env_offset", c.seed_policy.env_offset}};
  j["standardize"] = c.standardize;
  return j;
}

/// Hash of everything that affects results; workers and out are excluded.
inline std::string config_hash(const RunConfig& c) {
  auto j = serialize(c);
  j.erase("workers");
  j.erase("out");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace causalbench
