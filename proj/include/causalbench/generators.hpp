#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "causalbench/errors.hpp"
#include "causalbench/graph.hpp"
#include "causalbench/rng.hpp"

namespace causalbench {

/// Erdos-Renyi DAG with exactly round(d * p) edges. A random permutation fixes
/// the causal order; edges go from the earlier to the later node.
inline Graph random_dag_er(int p, double d, SplitMix64& rng) {
  if (p < 2) throw ConfigError("random_dag_er: need p >= 2");
  if (!(d >= 0.0)) throw ConfigError("random_dag_er: d must be non-negative");
  const auto max_edges = static_cast<std::int64_t>(p) * (p - 1) / 2;
  const auto edges = static_cast<std::int64_t>(std::llround(d * p));
  if (edges > max_edges)
    throw ConfigError("random_dag_er: " + std::to_string(edges) + " edges exceed the maximum " +
                      std::to_string(max_edges) + " for p=" + std::to_string(p));

  const auto order = rng.permutation(p);
  // Partial Fisher-Yates over the pair indices (a < b, row-major).
  std::vector<std::int64_t> pairs(static_cast<std::size_t>(max_edges));
  for (std::int64_t i = 0; i < max_edges; ++i) pairs[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = 0; i < edges; ++i) {
    const auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_edges - i)));
    std::swap(pairs[static_cast<std::size_t>(i)], pairs[static_cast<std::size_t>(j)]);
  }
  Graph g(p, GraphKind::DAG);
  for (std::int64_t i = 0; i < edges; ++i) {
    // Decode pair index -> (a, b) with a < b, positions in the causal order.
    std::int64_t idx = pairs[static_cast<std::size_t>(i)];
    int a = 0;
    while (idx >= p - 1 - a) {
      idx -= p - 1 - a;
      ++a;
    }
    const int b = a + 1 + static_cast<int>(idx);
    g.add_directed(order[static_cast<std::size_t>(a)], order[static_cast<std::size_t>(b)]);
  }
  return g;
}

/// Barabasi-Albert DAG. Nodes arrive in a random order; the first d are seeds,
/// every later arrival attaches to d distinct existing nodes drawn with
/// probability proportional to degree, each edge pointing new -> existing.
/// Gives d * (p - d) edges.
inline Graph random_dag_sf(int p, int d, SplitMix64& rng) {
  if (d < 1) throw ConfigError("random_dag_sf: attachment count must be >= 1");
  if (d >= p) throw ConfigError("random_dag_sf: need d < p (got d=" + std::to_string(d) +
                                ", p=" + std::to_string(p) + ")");
  const auto label = rng.permutation(p);
  Graph g(p, GraphKind::DAG);
  // Each endpoint appears once per incident edge.
  std::vector<int> repeated;
  repeated.reserve(static_cast<std::size_t>(2 * d * p));
  for (int t = d; t < p; ++t) {
    std::vector<int> targets;
    if (t == d) {
      for (int s = 0; s < d; ++s) targets.push_back(s);
    } else {
      while (static_cast<int>(targets.size()) < d) {
        const int cand = repeated[static_cast<std::size_t>(rng.below(repeated.size()))];
        if (std::find(targets.begin(), targets.end(), cand) == targets.end()) targets.push_back(cand);
      }
    }
    for (int s : targets) {
      g.add_directed(label[static_cast<std::size_t>(t)], label[static_cast<std::size_t>(s)]);
      repeated.push_back(s);
      repeated.push_back(t);
    }
  }
  return g;
}

}  // namespace causalbench
