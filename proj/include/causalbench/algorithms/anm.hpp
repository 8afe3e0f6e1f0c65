#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "causalbench/algorithms/learner.hpp"
#include "causalbench/stats/ci_tests.hpp"
#include "causalbench/stats/regression.hpp"

namespace causalbench {

struct AnmPairTest {
  int j = 0;
  int k = 0;         // j < k
  double p_forward;  // residual of k ~ f(j) independent of j
  double p_backward; // residual of j ~ g(k) independent of k
};

/// Fits both directions for every unordered pair. Each variable's kernel
/// system and HSIC kernel are built once and reused across its pairs.
inline std::vector<AnmPairTest> anm_pair_tests(const Dataset& ds) {
  const int p = ds.p();
  if (ds.n() < 50) throw ContractError("anm: need n >= 50");
  const double ridge = default_ridge(ds.n());
  std::vector<KernelBasis> bases;
  std::vector<HsicKernel> kernels;
  bases.reserve(static_cast<std::size_t>(p));
  kernels.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd col = ds.x.col(j);
    try {
      bases.emplace_back(Eigen::MatrixXd(col), ridge);
      kernels.emplace_back(col, "input");
    } catch (const std::exception& e) {
      throw NumericalError("anm: variable " + std::to_string(j) + ": " + e.what());
    }
  }
  std::vector<AnmPairTest> out;
  for (int j = 0; j < p; ++j)
    for (int k = j + 1; k < p; ++k) {
      AnmPairTest t{j, k, 1.0, 1.0};
      try {
        const HsicKernel r_fwd(bases[static_cast<std::size_t>(j)].residuals(ds.x.col(k)), "residual");
        t.p_forward = hsic_gamma(r_fwd, kernels[static_cast<std::size_t>(j)]).p_value;
        const HsicKernel r_bwd(bases[static_cast<std::size_t>(k)].residuals(ds.x.col(j)), "residual");
        t.p_backward = hsic_gamma(r_bwd, kernels[static_cast<std::size_t>(k)]).p_value;
      } catch (const std::exception& e) {
        throw NumericalError("anm: pair (" + std::to_string(j) + "," + std::to_string(k) + "): " + e.what());
      }
      out.push_back(t);
    }
  return out;
}

/// j -> k when the forward residuals look independent at `alpha` and the
/// backward ones do not, and symmetrically; otherwise no edge.
inline Graph anm_decide(int p, const std::vector<AnmPairTest>& tests, double alpha) {
  Graph g(p, GraphKind::MIXED);
  for (const auto& t : tests) {
    const bool fwd = t.p_forward >= alpha;
    const bool bwd = t.p_backward >= alpha;
    if (fwd && !bwd) g.add_directed(t.j, t.k);
    else if (bwd && !fwd) g.add_directed(t.k, t.j);
  }
  return g;
}

class AnmLearner final : public Learner {
 public:
  AnmLearner() {
    space_.algorithm = "anm";
    space_.fixed = {{"regressor", "kernel ridge, rbf, median bandwidth, ridge 1e-3*n"},
                    {"independence_test", "hsic gamma"}};
    ParamSpec alpha;
    alpha.name = "alpha";
    alpha.min = 0.0;
    alpha.max = 1.0;
    alpha.min_exclusive = true;
    alpha.default_value = 0.05;
    alpha.grid = {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5};
    alpha.sim_mean = 0.001;
    alpha.post_fit = true;
    alpha.description = "significance level of the residual independence tests";
    space_.params = {alpha};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment&) const override {
    auto state = std::make_shared<State>();
    state->tests = anm_pair_tests(ds);
    state->diagnostics["pairs"] = static_cast<double>(state->tests.size());
    return state;
  }

  LearnOutcome finalize(const FitState& state, const Dataset& ds, const HyperparameterAssignment& h) const override {
    LearnOutcome out;
    out.graph = anm_decide(ds.p(), static_cast<const State&>(state).tests, h.get("alpha"));
    return out;
  }

 private:
  struct State : FitState {
    std::vector<AnmPairTest> tests;
  };
  HyperparameterSpace space_;
};

}  // namespace causalbench
