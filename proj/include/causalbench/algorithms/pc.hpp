#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalbench/algorithms/learner.hpp"
#include "causalbench/graph.hpp"
#include "causalbench/stats/ci_tests.hpp"

namespace causalbench {

namespace detail {

// Calls fn(subset) for each size-k subset of items in lexicographic order;
// stops early when fn returns true.
template <typename Fn>
bool for_each_subset(const std::vector<int>& items, std::size_t k, Fn&& fn) {
  if (k > items.size()) return false;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<int> subset(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) subset[i] = items[idx[i]];
    if (fn(subset)) return true;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == items.size() - k + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

struct PcResult {
  Graph graph;
  std::map<std::pair<int, int>, std::vector<int>> sepsets;  // keyed (min, max)
  int tests = 0;
  int max_level = 0;
};

/// Order-independent ("stable") PC: skeleton search with a per-level
/// adjacency snapshot, collider orientation from separating sets, then the
/// Meek closure. Returns a CPDAG-kind graph.
inline PcResult pc_search(const Dataset& ds, double alpha) {
  const int p = ds.p();
  const int n = ds.n();
  if (n <= 3) throw ContractError("pc: need n > 3");
  const FisherZTest tester(ds);
  PcResult res;
  Graph g(p, GraphKind::CPDAG);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) g.add_undirected(i, j);

  for (int level = 0;; ++level) {
    if (n <= level + 3) break;
    std::vector<std::vector<int>> snapshot(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) snapshot[static_cast<std::size_t>(i)] = g.adjacents(i);
    bool any_candidate = false;
    for (int i = 0; i < p; ++i) {
      for (int j : snapshot[static_cast<std::size_t>(i)]) {
        if (j < i || !g.adjacent(i, j)) continue;
        // Both endpoints' snapshot neighbourhoods are searched; the separating
        // set kept is the one with the largest p-value, so neither removal nor
        // the sepset depends on node labels.
        double best_p = -1.0;
        std::vector<int> best_set;
        for (const int side : {i, j}) {
          const int other = side == i ? j : i;
          std::vector<int> cand;
          for (int k : snapshot[static_cast<std::size_t>(side)])
            if (k != other) cand.push_back(k);
          if (static_cast<int>(cand.size()) < level) continue;
          any_candidate = true;
          detail::for_each_subset(cand, static_cast<std::size_t>(level), [&](const std::vector<int>& s) {
            ++res.tests;
            CiTestResult r;
            try {
              r = tester.test(i, j, s);
            } catch (const NumericalError& e) {
              std::string where = "pc: test (" + std::to_string(i) + "," + std::to_string(j) + " | {";
              for (std::size_t a = 0; a < s.size(); ++a) where += (a ? "," : "") + std::to_string(s[a]);
              throw NumericalError(where + "}): " + e.what());
            }
            if (r.independent_at(alpha) && r.p_value > best_p) {
              best_p = r.p_value;
              best_set = s;
            }
            return false;
          });
        }
        if (best_p >= 0.0) {
          g.remove_edge(i, j);
          res.sepsets[{i, j}] = best_set;
        }
      }
    }
    res.max_level = level;
    if (!any_candidate) break;
  }

  // Colliders i -> k <- j for unshielded triples with k outside sepset(i, j).
  // Pairs that receive arrowheads from both sides stay undirected.
  std::vector<char> arrow(static_cast<std::size_t>(p * p), 0);  // arrow[a*p+b]: a -> b wanted
  for (int k = 0; k < p; ++k) {
    const auto adj = g.adjacents(k);
    for (std::size_t a = 0; a < adj.size(); ++a)
      for (std::size_t b = a + 1; b < adj.size(); ++b) {
        const int i = adj[a];
        const int j = adj[b];
        if (g.adjacent(i, j)) continue;
        const auto it = res.sepsets.find({std::min(i, j), std::max(i, j)});
        const bool in_sepset =
            it != res.sepsets.end() && std::find(it->second.begin(), it->second.end(), k) != it->second.end();
        if (in_sepset) continue;
        arrow[static_cast<std::size_t>(i * p + k)] = 1;
        arrow[static_cast<std::size_t>(j * p + k)] = 1;
      }
  }
  std::vector<std::pair<int, int>> wanted;
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      if (arrow[static_cast<std::size_t>(a * p + b)]) wanted.emplace_back(a, b);
  std::set<std::pair<int, int>> blocked;
  orient_simultaneously(g, wanted, blocked);
  apply_meek_rules(g);
  g.set_kind(GraphKind::CPDAG);
  res.graph = std::move(g);
  return res;
}

class PcLearner final : public Learner {
 public:
  PcLearner() {
    space_.algorithm = "pc";
    space_.fixed = {{"indepTest", "fisher-z (gaussCItest)"}};
    ParamSpec alpha;
    alpha.name = "alpha";
    alpha.min = 0.0;
    alpha.max = 1.0;
    alpha.min_exclusive = true;
    alpha.default_value = 0.01;
    alpha.grid = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
    alpha.sim_mean = 0.002;
    alpha.description = "significance level of the conditional independence tests";
    space_.params = {alpha};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const override {
    auto state = std::make_shared<OutcomeState>();
    auto res = pc_search(ds, h.get("alpha"));
    state->outcome.graph = std::move(res.graph);
    state->diagnostics["ci_tests"] = res.tests;
    state->diagnostics["max_level"] = res.max_level;
    return state;
  }

  LearnOutcome finalize(const FitState& state, const Dataset&, const HyperparameterAssignment&) const override {
    return static_cast<const OutcomeState&>(state).outcome;
  }

 private:
  HyperparameterSpace space_;
};

}  // namespace causalbench
