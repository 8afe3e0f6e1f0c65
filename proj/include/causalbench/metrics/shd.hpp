#pragma once

#include <cmath>

#include "causalbench/errors.hpp"
#include "causalbench/graph.hpp"

namespace causalbench {

struct EdgeAccounting {
  double tp = 0.0;
  double fp = 0.0;
  int true_edge_count = 0;
};

/// Per predicted edge: matching adjacency and orientation is TP 1; matching
/// adjacency with any other orientation (reversed, or undirected against a
/// directed truth) is TP 0.5 and FP 0.5; no true adjacency is FP 1.
inline EdgeAccounting edge_accounting(const Graph& truth, const Graph& predicted) {
  if (truth.p() != predicted.p()) throw ContractError("shd: graphs differ in node count");
  if (!truth.all_directed()) throw ContractError("shd: truth must be a DAG");
  EdgeAccounting acc;
  acc.true_edge_count = truth.edge_count();
  for (const auto& e : predicted.edges()) {
    if (!truth.adjacent(e.from, e.to)) {
      acc.fp += 1.0;
    } else if (e.directed && truth.has_directed(e.from, e.to)) {
      acc.tp += 1.0;
    } else {
      acc.tp += 0.5;
      acc.fp += 0.5;
    }
  }
  return acc;
}

/// SHD = |E| - TP + FP.
inline double shd(const Graph& truth, const Graph& predicted) {
  const auto acc = edge_accounting(truth, predicted);
  const double v = acc.true_edge_count - acc.tp + acc.fp;
  if (v < 0.0 || v != std::floor(v)) throw ContractError("shd: non-integral or negative result");
  return v;
}

}  // namespace causalbench
