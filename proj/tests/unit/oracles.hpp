#pragma once

// Brute-force reference implementations used only by the tests.

#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "causalbench/graph.hpp"
#include "causalbench/rng.hpp"

namespace oracle {

using causalbench::Graph;
using causalbench::GraphKind;

/// Every DAG on p labelled nodes (p <= 4 keeps this at 543 graphs).
inline std::vector<Graph> all_dags(int p) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) pairs.emplace_back(a, b);
  std::vector<Graph> out;
  int total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    Graph g(p, GraphKind::DAG);
    int c = code;
    for (const auto& [a, b] : pairs) {
      if (c % 3 == 1) g.add_directed(a, b);
      if (c % 3 == 2) g.add_directed(b, a);
      c /= 3;
    }
    if (causalbench::is_acyclic(g)) out.push_back(g);
  }
  return out;
}

inline std::set<std::tuple<int, int, int>> v_structures(const Graph& g) {
  std::set<std::tuple<int, int, int>> out;
  for (int c = 0; c < g.p(); ++c) {
    const auto pa = g.parents(c);
    for (std::size_t x = 0; x < pa.size(); ++x)
      for (std::size_t y = x + 1; y < pa.size(); ++y)
        if (!g.adjacent(pa[x], pa[y])) out.insert({std::min(pa[x], pa[y]), c, std::max(pa[x], pa[y])});
  }
  return out;
}

/// Markov equivalence by the skeleton + v-structure characterisation.
inline bool equivalent(const Graph& a, const Graph& b) {
  return a.skeleton() == b.skeleton() && v_structures(a) == v_structures(b);
}

/// CPDAG as the union over the class: an edge stays directed iff every member agrees.
inline Graph cpdag_by_enumeration(const Graph& dag, const std::vector<Graph>& universe) {
  std::vector<const Graph*> cls;
  for (const auto& g : universe)
    if (equivalent(g, dag)) cls.push_back(&g);
  Graph out(dag.p(), GraphKind::CPDAG);
  for (const auto& e : dag.edges()) {
    bool same = true;
    for (const auto* g : cls) same = same && g->has_directed(e.from, e.to);
    if (same) out.add_directed(e.from, e.to);
    else out.add_undirected(std::min(e.from, e.to), std::max(e.from, e.to));
  }
  return out;
}

inline bool is_descendant_or_self(const Graph& g, int u, int target) {
  return causalbench::has_directed_path(g, u, target);
}

/// d-separation by enumerating every simple path of the skeleton and checking
/// the blocking rule node by node.
inline bool d_separated_by_paths(const Graph& g, int j, int k, const std::vector<int>& z) {
  const int p = g.p();
  std::vector<char> in_z(static_cast<std::size_t>(p), 0);
  for (int v : z) in_z[static_cast<std::size_t>(v)] = 1;
  auto collider_open = [&](int m) {
    for (int v : z)
      if (is_descendant_or_self(g, m, v)) return true;
    return false;
  };
  std::vector<int> path{j};
  std::vector<char> on(static_cast<std::size_t>(p), 0);
  on[static_cast<std::size_t>(j)] = 1;
  bool open_found = false;
  std::function<void()> dfs = [&] {
    if (open_found) return;
    const int u = path.back();
    if (u == k) {
      bool blocked = false;
      for (std::size_t i = 1; i + 1 < path.size() && !blocked; ++i) {
        const int a = path[i - 1], m = path[i], b = path[i + 1];
        const bool collider = g.has_directed(a, m) && g.has_directed(b, m);
        blocked = collider ? !collider_open(m) : in_z[static_cast<std::size_t>(m)] != 0;
      }
      if (!blocked) open_found = true;
      return;
    }
    for (int v : g.adjacents(u)) {
      if (on[static_cast<std::size_t>(v)]) continue;
      on[static_cast<std::size_t>(v)] = 1;
      path.push_back(v);
      dfs();
      path.pop_back();
      on[static_cast<std::size_t>(v)] = 0;
    }
  };
  dfs();
  return !open_found;
}

/// SHD as the number of unordered pairs whose marks differ between truth and
/// prediction (absent / one direction / the other / undirected).
inline int shd_by_pairs(const Graph& truth, const Graph& pred) {
  auto state = [](const Graph& g, int a, int b) {
    if (g.has_directed(a, b)) return 1;
    if (g.has_directed(b, a)) return 2;
    if (g.has_undirected(a, b)) return 3;
    return 0;
  };
  int d = 0;
  for (int a = 0; a < truth.p(); ++a)
    for (int b = a + 1; b < truth.p(); ++b) d += state(truth, a, b) != state(pred, a, b);
  return d;
}

/// Random DAG by random order and independent edge coins.
inline Graph random_dag(int p, double density, causalbench::SplitMix64& rng) {
  const auto order = rng.permutation(p);
  Graph g(p, GraphKind::DAG);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (rng.uniform() < density) g.add_directed(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
  return g;
}

/// Random mixed graph: each pair absent, either direction, or undirected.
inline Graph random_mixed(int p, causalbench::SplitMix64& rng) {
  Graph g(p, GraphKind::MIXED);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b) {
      const auto s = rng.below(4);
      if (s == 1) g.add_directed(a, b);
      if (s == 2) g.add_directed(b, a);
      if (s == 3) g.add_undirected(a, b);
    }
  return g;
}

}  // namespace oracle
