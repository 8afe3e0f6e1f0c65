#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "causalbench/algorithms/hyperparameters.hpp"
#include "causalbench/dataset.hpp"
#include "causalbench/graph.hpp"

namespace causalbench {

struct LearnOutcome {
  Graph graph;
  std::optional<WeightedAdjacency> weights;  // pre-threshold, SEM-based learners
  std::map<std::string, double> diagnostics;
};

/// Whatever a learner computes before its post-fit parameters apply.
struct FitState {
  virtual ~FitState() = default;
  std::map<std::string, double> diagnostics;
};

/// A learner splits into fit (depends only on non-post-fit parameters) and
/// finalize (thresholds, test levels). A sweep can therefore share one fit
/// across every value of a post-fit parameter.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual const HyperparameterSpace& space() const = 0;
  virtual std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const = 0;
  virtual LearnOutcome finalize(const FitState& state, const Dataset& ds, const HyperparameterAssignment& h) const = 0;

  const std::string& name() const { return space().algorithm; }

  LearnOutcome learn(const Dataset& ds, const HyperparameterAssignment& h) const {
    validate_assignment(space(), h);
    const auto start = std::chrono::steady_clock::now();
    const auto state = fit(ds, h);
    LearnOutcome out = finalize(*state, ds, h);
    for (const auto& [k, v] : state->diagnostics) out.diagnostics.emplace(k, v);
    out.diagnostics["runtime_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (out.graph.p() != ds.p()) throw ContractError(name() + ": output graph size mismatch");
    return out;
  }
};

/// For learners without a post-fit stage: fit keeps the finished outcome.
struct OutcomeState : FitState {
  LearnOutcome outcome;
};

}  // namespace causalbench
