#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "causalbench/errors.hpp"

namespace causalbench {

enum class GraphKind { DAG, CPDAG, PDAG, MIXED };

inline const char* to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::DAG: return "DAG";
    case GraphKind::CPDAG: return "CPDAG";
    case GraphKind::PDAG: return "PDAG";
    case GraphKind::MIXED: return "MIXED";
  }
  return "?";
}

struct Edge {
  int from;
  int to;
  bool directed;  // false: undirected, and from < to

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Graph over nodes 0..p-1 with at most one mark per unordered pair: absent,
/// directed one way, or a single symmetric undirected mark.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int p, GraphKind kind = GraphKind::MIXED) : p_(p), kind_(kind) {
    if (p < 0) throw ContractError("Graph: negative node count");
    cells_.assign(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), kNone);
  }

  int p() const noexcept { return p_; }
  GraphKind kind() const noexcept { return kind_; }
  void set_kind(GraphKind kind) noexcept { kind_ = kind; }

  /// j -> k
  bool has_directed(int j, int k) const { return cell(j, k) == kOut; }
  bool has_undirected(int j, int k) const { return cell(j, k) == kUndirected; }
  bool adjacent(int j, int k) const { return cell(j, k) != kNone; }

  void add_directed(int j, int k) {
    check_pair(j, k);
    if (adjacent(j, k)) throw ContractError("Graph: pair already adjacent");
    set(j, k, kOut, kIn);
  }
  void add_undirected(int j, int k) {
    check_pair(j, k);
    if (adjacent(j, k)) throw ContractError("Graph: pair already adjacent");
    set(j, k, kUndirected, kUndirected);
  }
  /// Replaces whatever mark the pair carries by j -> k.
  void orient(int j, int k) {
    check_pair(j, k);
    set(j, k, kOut, kIn);
  }
  void make_undirected(int j, int k) {
    check_pair(j, k);
    set(j, k, kUndirected, kUndirected);
  }
  void remove_edge(int j, int k) {
    check_pair(j, k);
    set(j, k, kNone, kNone);
  }

  std::vector<int> parents(int j) const { return collect(j, kIn); }
  std::vector<int> children(int j) const { return collect(j, kOut); }
  /// Undirected neighbours.
  std::vector<int> neighbors(int j) const { return collect(j, kUndirected); }
  std::vector<int> adjacents(int j) const {
    std::vector<int> out;
    for (int k = 0; k < p_; ++k)
      if (k != j && adjacent(j, k)) out.push_back(k);
    return out;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (int j = 0; j < p_; ++j)
      for (int k = 0; k < p_; ++k) {
        const auto c = cell(j, k);
        if (c == kOut) out.push_back({j, k, true});
        else if (c == kUndirected && j < k) out.push_back({j, k, false});
      }
    return out;
  }

  int edge_count() const { return static_cast<int>(edges().size()); }
  int undirected_count() const {
    int count = 0;
    for (const auto& e : edges()) count += e.directed ? 0 : 1;
    return count;
  }
  bool all_directed() const { return undirected_count() == 0; }

  /// 0/1 matrix, a(j,k) = 1 for j -> k; undirected edges set both cells.
  Eigen::MatrixXi to_adjacency() const {
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(p_, p_);
    for (int j = 0; j < p_; ++j)
      for (int k = 0; k < p_; ++k) {
        const auto c = cell(j, k);
        if (c == kOut || c == kUndirected) a(j, k) = 1;
      }
    return a;
  }

  /// Same structure with node i renamed to perm[i].
  Graph relabeled(const std::vector<int>& perm) const {
    if (static_cast<int>(perm.size()) != p_) throw ContractError("relabeled: size mismatch");
    Graph out(p_, kind_);
    for (const auto& e : edges()) {
      if (e.directed) out.add_directed(perm[e.from], perm[e.to]);
      else out.add_undirected(perm[e.from], perm[e.to]);
    }
    return out;
  }

  /// All marks dropped to undirected.
  Graph skeleton() const {
    Graph out(p_, GraphKind::MIXED);
    for (const auto& e : edges()) out.add_undirected(e.from, e.to);
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.p_ == b.p_ && a.cells_ == b.cells_;
  }

 private:
  static constexpr std::int8_t kNone = 0;
  static constexpr std::int8_t kOut = 1;   // row -> column
  static constexpr std::int8_t kIn = 2;    // column -> row
  static constexpr std::int8_t kUndirected = 3;

  std::int8_t cell(int j, int k) const {
    return cells_[static_cast<std::size_t>(j) * static_cast<std::size_t>(p_) +
                  static_cast<std::size_t>(k)];
  }
  void set(int j, int k, std::int8_t jk, std::int8_t kj) {
    cells_[static_cast<std::size_t>(j) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(k)] = jk;
    cells_[static_cast<std::size_t>(k) * static_cast<std::size_t>(p_) + static_cast<std::size_t>(j)] = kj;
  }
  void check_pair(int j, int k) const {
    if (j < 0 || k < 0 || j >= p_ || k >= p_) throw ContractError("Graph: node out of range");
    if (j == k) throw ContractError("Graph: self-loops are not allowed");
  }
  std::vector<int> collect(int j, std::int8_t mark) const {
    std::vector<int> out;
    for (int k = 0; k < p_; ++k)
      if (k != j && cell(j, k) == mark) out.push_back(k);
    return out;
  }

  int p_ = 0;
  GraphKind kind_ = GraphKind::MIXED;
  std::vector<std::int8_t> cells_;
};

/// Is there a directed path from `from` to `to` using directed edges only?
inline bool has_directed_path(const Graph& g, int from, int to) {
  if (from == to) return true;
  std::vector<char> seen(static_cast<std::size_t>(g.p()), 0);
  std::vector<int> stack{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : g.children(u)) {
      if (v == to) return true;
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return false;
}

namespace detail {

// Three-colour DFS over directed edges; undirected marks are ignored.
inline bool directed_part_acyclic(const Graph& g) {
  const int p = g.p();
  std::vector<int> colour(static_cast<std::size_t>(p), 0);
  std::vector<std::pair<int, std::size_t>> stack;
  std::vector<std::vector<int>> kids(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) kids[static_cast<std::size_t>(j)] = g.children(j);
  for (int root = 0; root < p; ++root) {
    if (colour[static_cast<std::size_t>(root)] != 0) continue;
    stack.emplace_back(root, 0);
    colour[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      const auto& ch = kids[static_cast<std::size_t>(u)];
      if (next < ch.size()) {
        const int v = ch[next++];
        if (colour[static_cast<std::size_t>(v)] == 1) return false;
        if (colour[static_cast<std::size_t>(v)] == 0) {
          colour[static_cast<std::size_t>(v)] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        colour[static_cast<std::size_t>(u)] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

}  // namespace detail

inline bool is_acyclic(const Graph& g) {
  if (!g.all_directed()) throw ContractError("is_acyclic: graph has undirected edges");
  return detail::directed_part_acyclic(g);
}

/// Kahn's algorithm; ties go to the smallest index.
inline std::vector<int> topological_order(const Graph& g) {
  if (!g.all_directed()) throw ContractError("topological_order: graph has undirected edges");
  const int p = g.p();
  std::vector<int> indegree(static_cast<std::size_t>(p), 0);
  for (const auto& e : g.edges()) ++indegree[static_cast<std::size_t>(e.to)];
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int j = 0; j < p; ++j)
    if (indegree[static_cast<std::size_t>(j)] == 0) ready.push(j);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(p));
  while (!ready.empty()) {
    const int u = ready.top();
    ready.pop();
    order.push_back(u);
    for (int v : g.children(u))
      if (--indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  if (static_cast<int>(order.size()) != p) throw ContractError("topological_order: graph has a cycle");
  return order;
}

/// Structural checks for the declared kind.
inline bool satisfies_kind(const Graph& g) {
  switch (g.kind()) {
    case GraphKind::DAG: return g.all_directed() && detail::directed_part_acyclic(g);
    case GraphKind::CPDAG:
    case GraphKind::PDAG: return detail::directed_part_acyclic(g);
    case GraphKind::MIXED: return true;
  }
  return false;
}

/// d-separation of j and k given Z via reachability over active trails
/// (the "Bayes ball" traversal).
inline bool d_separated(const Graph& g, int j, int k, const std::vector<int>& z) {
  if (!g.all_directed()) throw ContractError("d_separated: graph must be a DAG");
  const int p = g.p();
  if (j == k) throw ContractError("d_separated: j == k");
  std::vector<char> in_z(static_cast<std::size_t>(p), 0);
  for (int v : z) {
    if (v == j || v == k) throw ContractError("d_separated: endpoint in conditioning set");
    in_z[static_cast<std::size_t>(v)] = 1;
  }
  // Nodes that are in Z or have a descendant in Z.
  std::vector<char> anc_z(in_z);
  {
    std::vector<int> stack(z.begin(), z.end());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int pa : g.parents(u))
        if (!anc_z[static_cast<std::size_t>(pa)]) {
          anc_z[static_cast<std::size_t>(pa)] = 1;
          stack.push_back(pa);
        }
    }
  }
  // State: (node, arrived_from_child). from_child=true means we travel up.
  std::vector<char> visited(static_cast<std::size_t>(2 * p), 0);
  std::vector<std::pair<int, bool>> stack{{j, true}};
  while (!stack.empty()) {
    const auto [u, up] = stack.back();
    stack.pop_back();
    const std::size_t key = static_cast<std::size_t>(2 * u + (up ? 1 : 0));
    if (visited[key]) continue;
    visited[key] = 1;
    if (u == k) return false;
    const bool observed = in_z[static_cast<std::size_t>(u)] != 0;
    if (up) {
      if (!observed) {
        for (int pa : g.parents(u)) stack.emplace_back(pa, true);
        for (int ch : g.children(u)) stack.emplace_back(ch, false);
      }
    } else {
      if (!observed)
        for (int ch : g.children(u)) stack.emplace_back(ch, false);
      if (anc_z[static_cast<std::size_t>(u)])
        for (int pa : g.parents(u)) stack.emplace_back(pa, true);
    }
  }
  return true;
}

/// Orients every wanted a -> b at once. Pairs wanted both ways, and new
/// arrows that end up on a directed cycle, stay undirected and go into
/// `blocked`. Nothing depends on the order of `wanted`. Returns the number of
/// edges oriented.
inline int orient_simultaneously(Graph& g, const std::vector<std::pair<int, int>>& wanted,
                                 std::set<std::pair<int, int>>& blocked) {
  std::set<std::pair<int, int>> want(wanted.begin(), wanted.end());
  std::vector<std::pair<int, int>> fresh;
  for (const auto& [a, b] : want) {
    if (!g.has_undirected(a, b) || blocked.count({std::min(a, b), std::max(a, b)})) continue;
    if (want.count({b, a})) {
      blocked.insert({std::min(a, b), std::max(a, b)});
      continue;
    }
    fresh.emplace_back(a, b);
  }
  for (const auto& [a, b] : fresh) g.orient(a, b);
  std::vector<std::pair<int, int>> cyclic;
  for (const auto& [a, b] : fresh)
    if (has_directed_path(g, b, a)) cyclic.emplace_back(a, b);
  for (const auto& [a, b] : cyclic) {
    g.remove_edge(a, b);
    g.add_undirected(a, b);
    blocked.insert({std::min(a, b), std::max(a, b)});
  }
  return static_cast<int>(fresh.size() - cyclic.size());
}

/// Closes a PDAG under Meek's rules R1-R4, one simultaneous round at a time.
/// On a consistent PDAG this is the usual unique closure; on the inconsistent
/// patterns finite-sample tests can produce, conflicting or cycle-closing
/// orientations are left undirected, so the result is a PDAG and does not
/// depend on node labels.
inline void apply_meek_rules(Graph& g) {
  const int p = g.p();
  std::set<std::pair<int, int>> blocked;
  while (true) {
    std::vector<std::pair<int, int>> wanted;
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) {
        if (a == b || !g.has_undirected(a, b)) continue;
        bool orient = false;
        // R1: c -> a - b, c and b non-adjacent.
        for (int c : g.parents(a))
          if (c != b && !g.adjacent(c, b)) { orient = true; break; }
        // R2: a -> c -> b.
        if (!orient)
          for (int c : g.children(a))
            if (g.has_directed(c, b)) { orient = true; break; }
        // R3: a - c -> b, a - d -> b, c and d non-adjacent.
        if (!orient) {
          std::vector<int> cands;
          for (int c : g.neighbors(a))
            if (c != b && g.has_directed(c, b)) cands.push_back(c);
          for (std::size_t x = 0; x < cands.size() && !orient; ++x)
            for (std::size_t y = x + 1; y < cands.size(); ++y)
              if (!g.adjacent(cands[x], cands[y])) { orient = true; break; }
        }
        // R4: a - d, d -> c -> b, a adjacent to c, d and b non-adjacent.
        if (!orient) {
          for (int c : g.parents(b)) {
            if (c == a || !g.adjacent(a, c)) continue;
            for (int d : g.parents(c))
              if (d != a && d != b && g.has_undirected(a, d) && !g.adjacent(d, b)) {
                orient = true;
                break;
              }
            if (orient) break;
          }
        }
        if (orient) wanted.emplace_back(a, b);
      }
    }
    if (orient_simultaneously(g, wanted, blocked) == 0) return;
  }
}

/// CPDAG of the Markov equivalence class of a DAG: skeleton, v-structure
/// orientations, Meek closure.
inline Graph cpdag_of(const Graph& dag) {
  if (!dag.all_directed() || !detail::directed_part_acyclic(dag))
    throw ContractError("cpdag_of: input must be a DAG");
  const int p = dag.p();
  Graph out(p, GraphKind::CPDAG);
  for (const auto& e : dag.edges()) out.add_undirected(e.from, e.to);
  for (int c = 0; c < p; ++c) {
    const auto pa = dag.parents(c);
    for (std::size_t x = 0; x < pa.size(); ++x)
      for (std::size_t y = x + 1; y < pa.size(); ++y)
        if (!dag.adjacent(pa[x], pa[y])) {
          out.orient(pa[x], c);
          out.orient(pa[y], c);
        }
  }
  apply_meek_rules(out);
  return out;
}

/// A DAG in the class of a PDAG (Dor & Tarsi 1992). Returns false if the
/// PDAG admits no consistent extension.
inline bool consistent_extension(const Graph& pdag, Graph& dag_out) {
  const int p = pdag.p();
  Graph work = pdag;
  Graph dag(p, GraphKind::DAG);
  for (const auto& e : pdag.edges())
    if (e.directed) dag.add_directed(e.from, e.to);
  std::vector<char> alive(static_cast<std::size_t>(p), 1);
  for (int removed = 0; removed < p; ++removed) {
    int pick = -1;
    for (int x = 0; x < p && pick < 0; ++x) {
      if (!alive[static_cast<std::size_t>(x)]) continue;
      // x must be a sink among remaining nodes.
      if (!work.children(x).empty()) continue;
      const auto nb = work.neighbors(x);
      const auto adj = work.adjacents(x);
      bool ok = true;
      for (int y : nb) {
        for (int z : adj)
          if (z != y && !work.adjacent(y, z)) { ok = false; break; }
        if (!ok) break;
      }
      if (ok) pick = x;
    }
    if (pick < 0) return false;
    for (int y : work.neighbors(pick)) dag.add_directed(y, pick);
    for (int y : work.adjacents(pick)) work.remove_edge(pick, y);
    alive[static_cast<std::size_t>(pick)] = 0;
  }
  dag_out = std::move(dag);
  return true;
}

/// Real-valued p x p weights with w(j, k) != 0 meaning j -> k.
struct WeightedAdjacency {
  Eigen::MatrixXd w;

  WeightedAdjacency() = default;
  explicit WeightedAdjacency(Eigen::MatrixXd weights) : w(std::move(weights)) {
    if (w.rows() != w.cols()) throw ContractError("WeightedAdjacency: matrix must be square");
    w.diagonal().setZero();
  }

  int p() const { return static_cast<int>(w.rows()); }

  /// j -> k iff |w(j,k)| > threshold. When both directions of a pair pass, the
  /// larger magnitude is kept (ties: lower source index). Kind is DAG when the
  /// result is acyclic, MIXED otherwise.
  Graph to_binary(double threshold) const {
    const int p = this->p();
    Graph g(p, GraphKind::MIXED);
    for (int j = 0; j < p; ++j)
      for (int k = j + 1; k < p; ++k) {
        const double fwd = std::abs(w(j, k));
        const double bwd = std::abs(w(k, j));
        const bool f = fwd > threshold;
        const bool b = bwd > threshold;
        if (f && (!b || fwd >= bwd)) g.add_directed(j, k);
        else if (b) g.add_directed(k, j);
      }
    g.set_kind(detail::directed_part_acyclic(g) ? GraphKind::DAG : GraphKind::MIXED);
    return g;
  }
};

}  // namespace causalbench
