#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <memory>

#include "causalbench/algorithms/learner.hpp"

namespace causalbench {

/// Mean squared residual of a degree-`degree` polynomial least-squares fit
/// of y on x. The input is mapped onto [-1, 1] and expanded in Legendre
/// polynomials for conditioning; the fitted function space is unchanged.
inline double polynomial_mse(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int degree) {
  const Eigen::Index n = x.size();
  if (degree < 0) throw ContractError("polynomial_mse: negative degree");
  if (n <= degree + 1) throw ContractError("polynomial_mse: need n > degree + 1");
  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  if (!(hi > lo)) throw ContractError("bivariate: constant variable");
  const Eigen::ArrayXd t = (2.0 * (x.array() - lo) / (hi - lo)) - 1.0;
  Eigen::MatrixXd v(n, degree + 1);
  v.col(0).setOnes();
  if (degree >= 1) v.col(1) = t.matrix();
  for (int k = 2; k <= degree; ++k)
    v.col(k) = (((2.0 * k - 1.0) * t * v.col(k - 1).array() - (k - 1.0) * v.col(k - 2).array()) / k).matrix();
  const Eigen::VectorXd coef = v.colPivHouseholderQr().solve(y);
  return (y - v * coef).squaredNorm() / static_cast<double>(n);
}

struct BivariateFit {
  double eps_f = 0.0;  // error of y = f(x)
  double eps_g = 0.0;  // error of x = g(y)
};

inline BivariateFit bivariate_fit(const Dataset& ds, int capacity) {
  if (ds.p() != 2) throw ContractError("bivariate: dataset must have exactly two columns");
  const Eigen::VectorXd x = ds.x.col(0);
  const Eigen::VectorXd y = ds.x.col(1);
  return {polynomial_mse(x, y, capacity), polynomial_mse(y, x, capacity)};
}

/// X -> Y if eps_f < eps_g - threshold, X <- Y if eps_g < eps_f - threshold,
/// otherwise no edge.
inline Graph bivariate_decide(const BivariateFit& fit, double threshold) {
  Graph g(2, GraphKind::DAG);
  if (fit.eps_f < fit.eps_g - threshold) g.add_directed(0, 1);
  else if (fit.eps_g < fit.eps_f - threshold) g.add_directed(1, 0);
  return g;
}

class BivariateLearner final : public Learner {
 public:
  BivariateLearner() {
    space_.algorithm = "bivariate";
    space_.fixed = {{"regressor", "polynomial least squares"}};
    ParamSpec cap;
    cap.name = "capacity";
    cap.type = ParamType::Integer;
    cap.min = 1.0;
    cap.max = 30.0;
    cap.default_value = 3;
    cap.grid = {1, 2, 3, 4, 5, 6, 7, 8, 9};
    cap.description = "polynomial degree of both regressors";
    ParamSpec thr;
    thr.name = "decision_threshold";
    thr.min = 0.0;
    thr.default_value = 0.0;
    thr.grid = {0.0};
    thr.post_fit = true;
    thr.description = "error difference below which no link is predicted";
    space_.params = {cap, thr};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const override {
    auto state = std::make_shared<State>();
    state->fit = bivariate_fit(ds, h.get_int("capacity"));
    state->diagnostics["eps_f"] = state->fit.eps_f;
    state->diagnostics["eps_g"] = state->fit.eps_g;
    return state;
  }

  LearnOutcome finalize(const FitState& state, const Dataset&, const HyperparameterAssignment& h) const override {
    LearnOutcome out;
    out.graph = bivariate_decide(static_cast<const State&>(state).fit, h.get("decision_threshold"));
    return out;
  }

 private:
  struct State : FitState {
    BivariateFit fit;
  };
  HyperparameterSpace space_;
};

}  // namespace causalbench
