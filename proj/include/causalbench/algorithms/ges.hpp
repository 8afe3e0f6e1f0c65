#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "causalbench/algorithms/learner.hpp"
#include "causalbench/graph.hpp"
#include "causalbench/stats/regression.hpp"

namespace causalbench {

namespace detail {

using NodeMask = std::uint64_t;

inline NodeMask mask_of(const std::vector<int>& nodes) {
  NodeMask m = 0;
  for (int v : nodes) m |= NodeMask{1} << v;
  return m;
}

inline std::vector<int> nodes_of(NodeMask m) {
  std::vector<int> out;
  for (int v = 0; m; ++v, m >>= 1)
    if (m & 1) out.push_back(v);
  return out;
}

class CachedBic {
 public:
  CachedBic(const Dataset& ds, double pd) : bic_(ds, pd) {}

  double operator()(int j, NodeMask parents) {
    auto& slot = cache_[static_cast<std::size_t>(j)];
    const auto it = slot.find(parents);
    if (it != slot.end()) return it->second;
    ++evaluations_;
    const double v = bic_.score(j, nodes_of(parents)).value;
    slot.emplace(parents, v);
    return v;
  }

  void resize(int p) { cache_.resize(static_cast<std::size_t>(p)); }
  int evaluations() const { return evaluations_; }

 private:
  BicScorer bic_;
  std::vector<std::unordered_map<NodeMask, double>> cache_;
  int evaluations_ = 0;
};

inline bool is_clique(const Graph& g, const std::vector<int>& nodes) {
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b)
      if (!g.adjacent(nodes[a], nodes[b])) return false;
  return true;
}

// Every clique C (including empty) with base ∪ C a clique, C ⊆ pool.
inline void for_each_clique_extension(const Graph& g, const std::vector<int>& base, const std::vector<int>& pool,
                                      const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    fn(chosen);
    for (std::size_t i = start; i < pool.size(); ++i) {
      const int v = pool[i];
      bool ok = true;
      for (int b : base)
        if (!g.adjacent(v, b)) { ok = false; break; }
      for (int c : chosen)
        if (ok && !g.adjacent(v, c)) ok = false;
      if (!ok) continue;
      chosen.push_back(v);
      rec(i + 1);
      chosen.pop_back();
    }
  };
  rec(0);
}

// True if some semi-directed path from `from` to `to` avoids `blocked`.
inline bool semi_directed_path_avoiding(const Graph& g, int from, int to, NodeMask blocked) {
  const int p = g.p();
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  std::vector<int> stack{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < p; ++w) {
      if (seen[static_cast<std::size_t>(w)]) continue;
      if (!g.has_directed(v, w) && !g.has_undirected(v, w)) continue;
      if (w == to) return true;
      if (blocked >> w & 1) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      stack.push_back(w);
    }
  }
  return false;
}

inline Graph recomplete(const Graph& pdag) {
  Graph dag;
  if (!consistent_extension(pdag, dag)) throw ContractError("ges: operator produced a PDAG without extension");
  return cpdag_of(dag);
}

}  // namespace detail

struct GesResult {
  Graph graph;
  int inserts = 0;
  int deletes = 0;
  int score_evaluations = 0;
};

/// Greedy equivalence search over CPDAGs with the Gaussian BIC. Forward
/// phase applies the best valid Insert(x, y, T) while the gain is positive;
/// backward phase does the same with Delete(x, y, H).
inline GesResult ges_search(const Dataset& ds, double penalty_discount) {
  const int p = ds.p();
  if (p > 64) throw ContractError("ges: at most 64 variables");
  if (ds.n() <= p) throw ContractError("ges: need n > p");
  detail::CachedBic score(ds, penalty_discount);
  score.resize(p);
  GesResult res;
  Graph g(p, GraphKind::CPDAG);

  while (true) {
    double best = 0.0;
    int bx = -1, by = -1;
    std::vector<int> bt;
    for (int y = 0; y < p; ++y) {
      const auto nb_y = g.neighbors(y);
      const detail::NodeMask pa_y = detail::mask_of(g.parents(y));
      for (int x = 0; x < p; ++x) {
        if (x == y || g.adjacent(x, y)) continue;
        std::vector<int> na, t0;
        for (int v : nb_y) (g.adjacent(v, x) ? na : t0).push_back(v);
        if (!detail::is_clique(g, na)) continue;
        const detail::NodeMask na_mask = detail::mask_of(na);
        detail::for_each_clique_extension(g, na, t0, [&](const std::vector<int>& t) {
          const detail::NodeMask cond = na_mask | detail::mask_of(t) | pa_y;
          const double gain = score(y, cond | detail::NodeMask{1} << x) - score(y, cond);
          if (!(gain > best)) return;
          if (detail::semi_directed_path_avoiding(g, y, x, na_mask | detail::mask_of(t))) return;
          best = gain;
          bx = x;
          by = y;
          bt = t;
        });
      }
    }
    if (bx < 0) break;
    g.add_directed(bx, by);
    for (int t : bt) g.orient(t, by);
    g = detail::recomplete(g);
    ++res.inserts;
  }

  while (true) {
    double best = 0.0;
    int bx = -1, by = -1;
    std::vector<int> bh;
    for (int y = 0; y < p; ++y) {
      const auto nb_y = g.neighbors(y);
      const detail::NodeMask pa_y = detail::mask_of(g.parents(y));
      for (int x = 0; x < p; ++x) {
        if (x == y) continue;
        if (!g.has_directed(x, y) && !g.has_undirected(x, y)) continue;
        std::vector<int> na;
        for (int v : nb_y)
          if (v != x && g.adjacent(v, x)) na.push_back(v);
        const detail::NodeMask x_bit = detail::NodeMask{1} << x;
        // Remaining C = NA \ H must be a clique.
        detail::for_each_clique_extension(g, {}, na, [&](const std::vector<int>& c) {
          const detail::NodeMask cond = (detail::mask_of(c) | pa_y) & ~x_bit;
          const double gain = score(y, cond) - score(y, cond | x_bit);
          if (!(gain > best)) return;
          best = gain;
          bx = x;
          by = y;
          bh.clear();
          for (int v : na)
            if (std::find(c.begin(), c.end(), v) == c.end()) bh.push_back(v);
        });
      }
    }
    if (bx < 0) break;
    g.remove_edge(bx, by);
    for (int h : bh) {
      if (g.has_undirected(by, h)) g.orient(by, h);
      if (g.has_undirected(bx, h)) g.orient(bx, h);
    }
    g = detail::recomplete(g);
    ++res.deletes;
  }

  g.set_kind(GraphKind::CPDAG);
  res.graph = std::move(g);
  res.score_evaluations = score.evaluations();
  return res;
}

class GesLearner final : public Learner {
 public:
  GesLearner() {
    space_.algorithm = "fges";
    space_.fixed = {{"score", "sem-bic"}};
    ParamSpec pd;
    pd.name = "penaltyDiscount";
    pd.min = 0.0;
    pd.min_exclusive = true;
    pd.default_value = 2.0;
    pd.grid = {0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5};
    pd.sim_mean = 1.5;
    pd.description = "multiplier on the BIC complexity penalty";
    space_.params = {pd};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const override {
    auto state = std::make_shared<OutcomeState>();
    auto res = ges_search(ds, h.get("penaltyDiscount"));
    state->outcome.graph = std::move(res.graph);
    state->diagnostics["inserts"] = res.inserts;
    state->diagnostics["deletes"] = res.deletes;
    state->diagnostics["score_evaluations"] = res.score_evaluations;
    return state;
  }

  LearnOutcome finalize(const FitState& state, const Dataset&, const HyperparameterAssignment&) const override {
    return static_cast<const OutcomeState&>(state).outcome;
  }

 private:
  HyperparameterSpace space_;
};

}  // namespace causalbench
