#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "causalbench/algorithms/anm.hpp"
#include "causalbench/algorithms/bivariate.hpp"
#include "causalbench/algorithms/ges.hpp"
#include "causalbench/algorithms/lingam.hpp"
#include "causalbench/algorithms/notears.hpp"
#include "causalbench/algorithms/notears_mlp.hpp"
#include "causalbench/algorithms/pc.hpp"

namespace causalbench {

/// Every learner by name. Learners are stateless, so one shared instance each.
class Registry {
 public:
  static const Registry& instance() {
    static const Registry r;
    return r;
  }

  const Learner& get(const std::string& name) const {
    const auto it = learners_.find(name);
    if (it == learners_.end()) throw ConfigError("unknown algorithm '" + name + "'");
    return *it->second;
  }

  bool contains(const std::string& name) const { return learners_.count(name) > 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : learners_) out.push_back(k);
    return out;
  }

  /// Algorithms with a reference grid (everything but the bivariate toy).
  static std::vector<std::string> reference_algorithms() { return {"anm", "fges", "lingam", "notears", "notears_mlp", "pc"}; }

 private:
  Registry() {
    add(std::make_unique<PcLearner>());
    add(std::make_unique<GesLearner>());
    add(std::make_unique<LingamLearner>());
    add(std::make_unique<AnmLearner>());
    add(std::make_unique<NotearsLearner>());
    add(std::make_unique<NotearsMlpLearner>());
    add(std::make_unique<BivariateLearner>());
  }
  void add(std::unique_ptr<Learner> l) {
    const std::string n = l->name();
    learners_.emplace(n, std::move(l));
  }

  std::map<std::string, std::unique_ptr<Learner>> learners_;
};

inline nlohmann::ordered_json space_to_json(const HyperparameterSpace& s) {
  nlohmann::ordered_json j;
  j["algorithm"] = s.algorithm;
  j["params"] = nlohmann::ordered_json::array();
  for (const auto& p : s.params) {
    nlohmann::ordered_json q;
    q["name"] = p.name;
    q["type"] = p.type == ParamType::Integer ? "integer" : "real";
    q["min"] = std::isfinite(p.min) ? nlohmann::ordered_json(p.min) : nlohmann::ordered_json(nullptr);
    q["min_exclusive"] = p.min_exclusive;
    q["max"] = std::isfinite(p.max) ? nlohmann::ordered_json(p.max) : nlohmann::ordered_json(nullptr);
    q["default"] = p.default_value;
    q["grid"] = p.grid;
    q["sim_mean"] = p.sim_mean ? nlohmann::ordered_json(*p.sim_mean) : nlohmann::ordered_json(nullptr);
    q["post_fit"] = p.post_fit;
    q["description"] = p.description;
    j["params"].push_back(q);
  }
  j["fixed"] = s.fixed;
  return j;
}

inline nlohmann::ordered_json registry_to_json() {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  const auto& r = Registry::instance();
  for (const auto& name : r.names()) out.push_back(space_to_json(r.get(name).space()));
  return out;
}

}  // namespace causalbench
