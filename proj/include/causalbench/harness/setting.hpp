#pragma once

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "causalbench/dataset.hpp"
#include "causalbench/errors.hpp"
#include "causalbench/generators.hpp"
#include "causalbench/graph_io.hpp"
#include "causalbench/algorithms/hyperparameters.hpp"
#include "causalbench/rng.hpp"
#include "causalbench/sem.hpp"

namespace causalbench {

/// The descriptor part of a setting (everything except its seeds). Empty
/// dataset_ref means simulated; otherwise only dataset_ref is meaningful.
struct SettingKey {
  std::string graph_type;  // "ER" | "SF"
  int graph_p = 0;
  double graph_d = 0.0;
  int data_n = 0;
  std::string data_sem;  // "gumbel" | "gp"
  std::string dataset_ref;

  bool simulated() const { return dataset_ref.empty(); }

  std::string to_string() const {
    if (!simulated()) return "dataset=" + dataset_ref;
    return graph_type + "_p" + std::to_string(graph_p) + "_d" + format_param(graph_d) + "_n" +
           std::to_string(data_n) + "_" + data_sem;
  }

  /// Value of a grouping dimension as text.
  std::string dimension(const std::string& dim) const {
    if (dim == "graph_type") return graph_type;
    if (dim == "graph_p") return simulated() ? std::to_string(graph_p) : "";
    if (dim == "graph_d") return simulated() ? format_param(graph_d) : "";
    if (dim == "data_n") return simulated() ? std::to_string(data_n) : "";
    if (dim == "data_sem") return data_sem;
    if (dim == "dataset_ref") return dataset_ref;
    throw ConfigError("unknown setting dimension '" + dim + "'");
  }

  auto tie() const { return std::tie(dataset_ref, graph_type, graph_p, graph_d, data_n, data_sem); }
  friend bool operator<(const SettingKey& a, const SettingKey& b) { return a.tie() < b.tie(); }
  friend bool operator==(const SettingKey& a, const SettingKey& b) { return a.tie() == b.tie(); }
};

inline const std::vector<std::string>& setting_dimensions() {
  static const std::vector<std::string> dims{"graph_type", "graph_p", "graph_d", "data_n", "data_sem", "dataset_ref"};
  return dims;
}

struct ExperimentSetting {
  SettingKey key;
  std::vector<int> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  // File datasets: "{seed}" in either path is replaced by the seed.
  std::string data_path;
  std::string truth_path;

  void validate() const {
    if (seeds.empty()) throw ConfigError("setting " + key.to_string() + ": no seeds");
    if (key.simulated()) {
      if (key.graph_type != "ER" && key.graph_type != "SF")
        throw ConfigError("graph_type must be ER or SF, got '" + key.graph_type + "'");
      if (key.data_sem != "gumbel" && key.data_sem != "gp")
        throw ConfigError("data_sem must be gumbel or gp, got '" + key.data_sem + "'");
      if (key.graph_p < 2) throw ConfigError("graph_p must be >= 2");
      if (!(key.graph_d > 0.0)) throw ConfigError("graph_d must be positive");
      if (key.data_n < 1) throw ConfigError("data_n must be >= 1");
      if (!data_path.empty() || !truth_path.empty())
        throw ConfigError("setting " + key.to_string() + ": data_path only applies with dataset_ref");
    } else {
      if (data_path.empty()) throw ConfigError("dataset '" + key.dataset_ref + "': data_path missing");
      if (key.graph_p || key.data_n || key.graph_d != 0.0 || !key.graph_type.empty() || !key.data_sem.empty())
        throw ConfigError("dataset '" + key.dataset_ref + "': simulation fields must be empty");
    }
  }

  friend bool operator==(const ExperimentSetting&, const ExperimentSetting&) = default;
};

/// Offset added to every seed, read from CAUSALBENCH_SEED_OFFSET.
inline std::uint64_t seed_offset_from_env() {
  const char* v = std::getenv("CAUSALBENCH_SEED_OFFSET");
  if (!v || !*v) return 0;
  char* end = nullptr;
  const unsigned long long off = std::strtoull(v, &end, 10);
  if (*end) throw ConfigError("CAUSALBENCH_SEED_OFFSET must be a non-negative integer");
  return off;
}

/// Graph stream depends on (type, p, d, seed); data stream additionally on
/// (sem, n). Settings that differ only in n or sem therefore share graphs.
inline std::uint64_t graph_seed(const SettingKey& k, int seed, std::uint64_t base) {
  return derive_seed(base + static_cast<std::uint64_t>(seed),
                     "graph|" + k.graph_type + "|" + std::to_string(k.graph_p) + "|" + format_param(k.graph_d));
}

inline std::uint64_t data_seed(const SettingKey& k, int seed, std::uint64_t base) {
  return derive_seed(base + static_cast<std::uint64_t>(seed),
                     "data|" + k.graph_type + "|" + std::to_string(k.graph_p) + "|" + format_param(k.graph_d) + "|" +
                         k.data_sem + "|" + std::to_string(k.data_n));
}

inline std::string substitute_seed(std::string path, int seed) {
  const std::string tag = "{seed}";
  for (auto pos = path.find(tag); pos != std::string::npos; pos = path.find(tag))
    path.replace(pos, tag.size(), std::to_string(seed));
  return path;
}

inline Graph simulate_graph(const SettingKey& k, int seed, std::uint64_t base) {
  SplitMix64 rng(graph_seed(k, seed, base));
  if (k.graph_type == "ER") return random_dag_er(k.graph_p, k.graph_d, rng);
  if (k.graph_d != std::floor(k.graph_d)) throw ConfigError("SF graphs need an integer graph_d");
  return random_dag_sf(k.graph_p, static_cast<int>(k.graph_d), rng);
}

/// The dataset of one (setting, seed), simulated or loaded.
inline Dataset make_setting_dataset(const ExperimentSetting& s, int seed, std::uint64_t base_seed, bool standardized) {
  const auto& k = s.key;
  Dataset ds;
  if (k.simulated()) {
    const Graph g = simulate_graph(k, seed, base_seed);
    SemSpec spec;
    spec.kind = k.data_sem == "gp" ? SemKind::NonlinearGp : SemKind::LinearGumbel;
    SplitMix64 rng(data_seed(k, seed, base_seed));
    ds = sample_sem(g, k.data_n, spec, rng);
    ds.meta["setting"] = k.to_string();
    ds.meta["seed"] = std::to_string(seed);
  } else {
    const std::string data = substitute_seed(s.data_path, seed);
    std::optional<std::string> truth;
    if (!s.truth_path.empty()) truth = substitute_seed(s.truth_path, seed);
    ds = load_dataset(data, truth);
    if (!ds.truth) throw ConfigError("dataset '" + k.dataset_ref + "': a truth graph is required for scoring");
  }
  return standardized ? standardize(ds) : ds;
}

}  // namespace causalbench
