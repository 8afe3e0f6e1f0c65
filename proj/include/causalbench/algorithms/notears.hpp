#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "causalbench/algorithms/learner.hpp"
#include "causalbench/numerics/acyclicity.hpp"
#include "causalbench/numerics/augmented_lagrangian.hpp"

namespace causalbench {

namespace detail {

// Directed cycle as a node sequence, or empty if none.
inline std::vector<int> find_cycle(const Graph& g) {
  const int p = g.p();
  std::vector<int> color(static_cast<std::size_t>(p), 0), parent(static_cast<std::size_t>(p), -1);
  for (int root = 0; root < p; ++root) {
    if (color[static_cast<std::size_t>(root)]) continue;
    std::vector<std::pair<int, int>> stack{{root, 0}};
    color[static_cast<std::size_t>(root)] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == p) {
        color[static_cast<std::size_t>(v)] = 2;
        stack.pop_back();
        continue;
      }
      const int w = next++;
      if (!g.has_directed(v, w)) continue;
      if (color[static_cast<std::size_t>(w)] == 1) {
        std::vector<int> cycle{w};
        for (int u = v; u != w; u = parent[static_cast<std::size_t>(u)]) cycle.push_back(u);
        return {cycle.rbegin(), cycle.rend()};
      }
      if (color[static_cast<std::size_t>(w)] == 0) {
        color[static_cast<std::size_t>(w)] = 1;
        parent[static_cast<std::size_t>(w)] = v;
        stack.emplace_back(w, 0);
      }
    }
  }
  return {};
}

}  // namespace detail

/// Removes the smallest-|w| edge of each directed cycle until none is left.
/// Returns the number of edges removed.
inline int break_cycles(Graph& g, const Eigen::MatrixXd& w) {
  int removed = 0;
  for (auto cycle = detail::find_cycle(g); !cycle.empty(); cycle = detail::find_cycle(g)) {
    int from = -1, to = -1;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const int a = cycle[i];
      const int b = cycle[(i + 1) % cycle.size()];
      if (std::abs(w(a, b)) < smallest) {
        smallest = std::abs(w(a, b));
        from = a;
        to = b;
      }
    }
    g.remove_edge(from, to);
    ++removed;
  }
  g.set_kind(GraphKind::DAG);
  return removed;
}

struct NotearsFit {
  WeightedAdjacency weights;
  AugLagResult solver;
};

/// Linear NOTEARS with least-squares loss 1/(2n)||X - XW||^2 on centred
/// data, an L1 penalty through W = W+ - W- with both parts >= 0, and the
/// trace-exponential acyclicity constraint. `max_iter` caps each inner solve.
inline NotearsFit notears_linear_fit(const Dataset& ds, double lambda1, int max_iter) {
  const int p = ds.p();
  const Eigen::Index pp = static_cast<Eigen::Index>(p) * p;
  const Eigen::MatrixXd xc = ds.x.rowwise() - ds.x.colwise().mean();
  const Eigen::MatrixXd s = xc.transpose() * xc / static_cast<double>(ds.n());

  auto unpack = [&](const Eigen::VectorXd& th) {
    return Eigen::Map<const Eigen::MatrixXd>(th.data(), p, p) - Eigen::Map<const Eigen::MatrixXd>(th.data() + pp, p, p);
  };
  auto scatter = [&](const Eigen::MatrixXd& g, Eigen::VectorXd& grad, double l1) {
    grad.resize(2 * pp);
    Eigen::Map<Eigen::MatrixXd> gp(grad.data(), p, p), gn(grad.data() + pp, p, p);
    gp = g.array() + l1;
    gn = -g.array() + l1;
    gp.diagonal().setZero();
    gn.diagonal().setZero();
  };

  const Objective loss = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const Eigen::MatrixXd w = unpack(th);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(p, p) - w;
    const Eigen::MatrixXd sr = s * r;
    scatter(-sr, grad, lambda1);
    return 0.5 * (r.transpose() * sr).trace() + lambda1 * th.sum();
  };
  const Objective constraint = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const auto h = acyclicity_h(unpack(th));
    scatter(h.gradient, grad, 0.0);
    return h.value;
  };

  AugLagConfig cfg;
  cfg.inner.max_iter = max_iter;
  NotearsFit out;
  out.solver = augmented_lagrangian_minimize(loss, constraint, Eigen::VectorXd::Zero(2 * pp), cfg,
                                             Eigen::VectorXd::Zero(2 * pp));
  out.weights = WeightedAdjacency(unpack(out.solver.theta));
  return out;
}

inline void record_solver(std::map<std::string, double>& d, const AugLagResult& r) {
  d["h"] = r.h;
  d["rho"] = r.rho;
  d["outer_iterations"] = r.outer_iterations;
  d["inner_iterations"] = r.inner_iterations;
  d["hit_rho_max"] = r.hit_rho_max ? 1.0 : 0.0;
  d["converged"] = r.converged ? 1.0 : 0.0;
}

/// Thresholded graph of a weighted fit with any leftover cycles broken.
inline LearnOutcome threshold_outcome(const WeightedAdjacency& w, double threshold) {
  LearnOutcome out;
  out.weights = w;
  out.graph = w.to_binary(threshold);
  out.diagnostics["cycles_broken"] = break_cycles(out.graph, w.w);
  return out;
}

class NotearsLearner final : public Learner {
 public:
  NotearsLearner() {
    space_.algorithm = "notears";
    space_.fixed = {{"h_tol", "1e-8"}, {"rho_max", "1e+16"}, {"loss_type", "l2"}};
    const std::vector<double> grid{0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
    ParamSpec l1;
    l1.name = "lambda1";
    l1.min = 0.0;
    l1.default_value = 0.1;
    l1.grid = grid;
    l1.sim_mean = 0.2;
    l1.description = "L1 penalty on W";
    ParamSpec iters;
    iters.name = "max_iter";
    iters.type = ParamType::Integer;
    iters.min = 1.0;
    iters.default_value = 100;
    iters.grid = {100, 1000};
    iters.sim_mean = 100;
    iters.description = "quasi-Newton step cap per inner solve";
    ParamSpec wt;
    wt.name = "w_threshold";
    wt.min = 0.0;
    wt.default_value = 0.3;
    wt.grid = grid;
    wt.sim_mean = 0.2;
    wt.post_fit = true;
    wt.description = "edges with |w| at or below this are pruned";
    space_.params = {l1, iters, wt};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const override {
    auto state = std::make_shared<State>();
    state->fit = notears_linear_fit(ds, h.get("lambda1"), h.get_int("max_iter"));
    record_solver(state->diagnostics, state->fit.solver);
    return state;
  }

  LearnOutcome finalize(const FitState& state, const Dataset&, const HyperparameterAssignment& h) const override {
    return threshold_outcome(static_cast<const State&>(state).fit.weights, h.get("w_threshold"));
  }

 private:
  struct State : FitState {
    NotearsFit fit;
  };
  HyperparameterSpace space_;
};

}  // namespace causalbench
