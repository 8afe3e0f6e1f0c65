#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "causalbench/algorithms/learner.hpp"
#include "causalbench/numerics/fast_ica.hpp"

namespace causalbench {

namespace detail {

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials). Returns assignment[row] = column.
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(n + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      if (!std::isfinite(delta)) throw NumericalError("hungarian: no finite assignment");
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

}  // namespace detail

struct LingamFit {
  WeightedAdjacency weights;  // w(k, i): effect of k on i, already triangular in `order`
  std::vector<int> order;     // causal order, sources first
  IcaResult ica;
};

/// ICA-LiNGAM: unmixing rows are permuted so the diagonal dominates (min
/// sum of 1/|w_ii|), scaled to unit diagonal, giving B = I - W'. The causal
/// order is built greedily by repeatedly taking the node whose row of B over
/// the remaining nodes has the smallest squared norm.
inline LingamFit lingam_fit(const Dataset& ds, int max_iter) {
  const int p = ds.p();
  LingamFit out;
  out.ica = fast_ica(ds.x, max_iter, 1e-4, 0);
  const Eigen::MatrixXd& w = out.ica.unmixing;

  Eigen::MatrixXd cost(p, p);
  for (int r = 0; r < p; ++r)
    for (int c = 0; c < p; ++c) {
      const double a = std::abs(w(r, c));
      cost(r, c) = a > 0.0 ? 1.0 / a : std::numeric_limits<double>::infinity();
    }
  const auto assign = detail::hungarian(cost);
  Eigen::MatrixXd wp(p, p);
  for (int r = 0; r < p; ++r) {
    const int c = assign[static_cast<std::size_t>(r)];
    const double diag = w(r, c);
    if (!(std::abs(diag) > 0.0)) throw NumericalError("lingam: zero diagonal after row assignment");
    wp.row(c) = w.row(r) / diag;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Identity(p, p) - wp;
  b.diagonal().setZero();

  std::vector<char> remaining(static_cast<std::size_t>(p), 1);
  for (int step = 0; step < p; ++step) {
    int pick = -1;
    double pick_norm = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i) {
      if (!remaining[static_cast<std::size_t>(i)]) continue;
      double s = 0.0;
      for (int j = 0; j < p; ++j)
        if (remaining[static_cast<std::size_t>(j)] && j != i) s += b(i, j) * b(i, j);
      if (s < pick_norm) {
        pick_norm = s;
        pick = i;
      }
    }
    out.order.push_back(pick);
    remaining[static_cast<std::size_t>(pick)] = 0;
    // Anything later in the order may not cause `pick`.
    for (int j = 0; j < p; ++j)
      if (remaining[static_cast<std::size_t>(j)]) b(pick, j) = 0.0;
  }
  out.weights = WeightedAdjacency(b.transpose());
  return out;
}

class LingamLearner final : public Learner {
 public:
  LingamLearner() {
    space_.algorithm = "lingam";
    space_.fixed = {{"ica_tol", "1e-4"}, {"ica_seed", "0"}};
    ParamSpec thresh;
    thresh.name = "thresh";
    thresh.min = 0.0;
    thresh.default_value = 0.3;
    thresh.grid = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
    thresh.sim_mean = 0.5;
    thresh.post_fit = true;
    thresh.description = "edges with |b| at or below this are pruned";
    ParamSpec iters;
    iters.name = "max_iter";
    iters.type = ParamType::Integer;
    iters.min = 1.0;
    iters.default_value = 1000;
    iters.grid = {100, 1000};
    iters.sim_mean = 100;
    iters.description = "FastICA iteration cap";
    space_.params = {thresh, iters};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const override {
    if (ds.n() <= ds.p()) throw ContractError("lingam: need n > p");
    auto state = std::make_shared<State>();
    state->fit = lingam_fit(ds, h.get_int("max_iter"));
    state->diagnostics["converged"] = state->fit.ica.converged ? 1.0 : 0.0;
    state->diagnostics["ica_iterations"] = state->fit.ica.iterations_used;
    return state;
  }

  LearnOutcome finalize(const FitState& state, const Dataset&, const HyperparameterAssignment& h) const override {
    const auto& s = static_cast<const State&>(state);
    LearnOutcome out;
    out.weights = s.fit.weights;
    out.graph = s.fit.weights.to_binary(h.get("thresh"));
    out.graph.set_kind(GraphKind::DAG);
    return out;
  }

 private:
  struct State : FitState {
    LingamFit fit;
  };
  HyperparameterSpace space_;
};

}  // namespace causalbench
