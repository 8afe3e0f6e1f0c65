#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>

#include "causalbench/algorithms/notears.hpp"
#include "causalbench/numerics/mlp.hpp"
#include "causalbench/rng.hpp"

namespace causalbench {

/// Seed of the uniform(-0.1, 0.1) parameter initialisation.
inline constexpr std::uint64_t kMlpInitSeed = 0x6E6F7465617273ULL;

/// Parameter vector layout: [W1+, W1-, b1, W2, b2], where W1 = W1+ - W1- is
/// the p x (p*h) first layer (both parts bounded below by 0), b1 and W2 are
/// h x p and b2 has p entries. Inputs from a node to its own network are
/// held at zero.
class NotearsMlpProblem {
 public:
  NotearsMlpProblem(const Eigen::MatrixXd& x, int hidden, double lambda1, double lambda2)
      : x_(x), p_(static_cast<int>(x.cols())), h_(hidden), lambda1_(lambda1), lambda2_(lambda2) {
    if (hidden < 1) throw ContractError("notears_mlp: hidden_units must be >= 1");
    w1_size_ = static_cast<Eigen::Index>(p_) * p_ * h_;
    size_ = 2 * w1_size_ + 2 * static_cast<Eigen::Index>(h_) * p_ + p_;
  }
  // Keeps a reference to x.
  NotearsMlpProblem(Eigen::MatrixXd&&, int, double, double) = delete;

  Eigen::Index size() const { return size_; }
  int p() const { return p_; }
  int hidden() const { return h_; }

  Eigen::VectorXd lower_bounds() const {
    Eigen::VectorXd lb = Eigen::VectorXd::Constant(size_, -std::numeric_limits<double>::infinity());
    lb.head(2 * w1_size_).setZero();
    return lb;
  }

  Eigen::VectorXd initial(std::uint64_t seed = kMlpInitSeed) const {
    SplitMix64 rng(seed);
    Eigen::VectorXd th(size_);
    for (Eigen::Index i = 0; i < size_; ++i) th(i) = rng.uniform(-0.1, 0.1);
    for (Eigen::Index i = 0; i < w1_size_; ++i) {
      const double w = th(i);
      th(i) = std::max(w, 0.0);
      th(w1_size_ + i) = std::max(-w, 0.0);
    }
    mask_self(th);
    return th;
  }

  MlpModel model(const Eigen::VectorXd& th) const {
    MlpModel m = MlpModel::zeros(p_, h_);
    m.w1 = pos(th) - neg(th);
    Eigen::Index off = 2 * w1_size_;
    m.b1 = Eigen::Map<const Eigen::MatrixXd>(th.data() + off, h_, p_);
    off += static_cast<Eigen::Index>(h_) * p_;
    m.w2 = Eigen::Map<const Eigen::MatrixXd>(th.data() + off, h_, p_);
    off += static_cast<Eigen::Index>(h_) * p_;
    m.b2 = th.segment(off, p_);
    return m;
  }

  /// M(k, j) = sum over hidden units of W1 entries from input k into net j.
  Eigen::MatrixXd squared_norms(const MlpModel& m) const {
    Eigen::MatrixXd sq(p_, p_);
    for (int j = 0; j < p_; ++j) sq.col(j) = m.w1.middleCols(j * h_, h_).rowwise().squaredNorm();
    return sq;
  }

  /// sum_j 1/(2n)||x_j - f_j(x)||^2 + lambda1 sum(W1+ + W1-) + lambda2/2 (||W1||^2 + ||W2||^2)
  double loss(const Eigen::VectorXd& th, Eigen::VectorXd& grad) const {
    const MlpModel m = model(th);
    const auto fb = mlp_forward_backward_all(m, x_);
    grad.setZero(size_);
    const Eigen::MatrixXd gw1 = fb.gradient.w1 + lambda2_ * m.w1;
    write_w1(gw1, grad, lambda1_);
    Eigen::Index off = 2 * w1_size_;
    const Eigen::Index hp = static_cast<Eigen::Index>(h_) * p_;
    Eigen::Map<Eigen::MatrixXd>(grad.data() + off, h_, p_) = fb.gradient.b1;
    off += hp;
    Eigen::Map<Eigen::MatrixXd>(grad.data() + off, h_, p_) = fb.gradient.w2 + lambda2_ * m.w2;
    off += hp;
    grad.segment(off, p_) = fb.gradient.b2;
    return fb.loss + lambda1_ * th.head(2 * w1_size_).sum() +
           0.5 * lambda2_ * (m.w1.squaredNorm() + m.w2.squaredNorm());
  }

  /// tr exp(M) - p with the chain rule through the squared norms.
  double constraint(const Eigen::VectorXd& th, Eigen::VectorXd& grad) const {
    const MlpModel m = model(th);
    const auto h = acyclicity_of_squares(squared_norms(m));
    Eigen::MatrixXd gw1(p_, static_cast<Eigen::Index>(p_) * h_);
    for (int j = 0; j < p_; ++j)
      gw1.middleCols(j * h_, h_) = (2.0 * m.w1.middleCols(j * h_, h_)).array().colwise() * h.gradient.col(j).array();
    grad.setZero(size_);
    write_w1(gw1, grad, 0.0);
    return h.value;
  }

  WeightedAdjacency adjacency(const Eigen::VectorXd& th) const {
    return WeightedAdjacency(squared_norms(model(th)).cwiseSqrt());
  }

 private:
  Eigen::Map<const Eigen::MatrixXd> pos(const Eigen::VectorXd& th) const {
    return {th.data(), p_, static_cast<Eigen::Index>(p_) * h_};
  }
  Eigen::Map<const Eigen::MatrixXd> neg(const Eigen::VectorXd& th) const {
    return {th.data() + w1_size_, p_, static_cast<Eigen::Index>(p_) * h_};
  }

  void write_w1(const Eigen::MatrixXd& g, Eigen::VectorXd& grad, double l1) const {
    const Eigen::Index cols = static_cast<Eigen::Index>(p_) * h_;
    Eigen::Map<Eigen::MatrixXd> gp(grad.data(), p_, cols), gn(grad.data() + w1_size_, p_, cols);
    gp = g.array() + l1;
    gn = -g.array() + l1;
    for (int j = 0; j < p_; ++j) {
      gp.block(j, j * h_, 1, h_).setZero();
      gn.block(j, j * h_, 1, h_).setZero();
    }
  }

  void mask_self(Eigen::VectorXd& th) const {
    const Eigen::Index cols = static_cast<Eigen::Index>(p_) * h_;
    Eigen::Map<Eigen::MatrixXd> wp(th.data(), p_, cols), wn(th.data() + w1_size_, p_, cols);
    for (int j = 0; j < p_; ++j) {
      wp.block(j, j * h_, 1, h_).setZero();
      wn.block(j, j * h_, 1, h_).setZero();
    }
  }

  const Eigen::MatrixXd& x_;
  int p_;
  int h_;
  double lambda1_;
  double lambda2_;
  Eigen::Index w1_size_ = 0;
  Eigen::Index size_ = 0;
};

/// NOTEARS with one sigmoid hidden layer per target. The induced weight of
/// k -> j is the L2 norm of the first-layer weights leaving input k in
/// network j.
inline NotearsFit notears_mlp_fit(const Dataset& ds, int hidden, double lambda1, double lambda2, int max_iter) {
  const NotearsMlpProblem prob(ds.x, hidden, lambda1, lambda2);
  const Objective loss = [&](const Eigen::VectorXd& th, Eigen::VectorXd& g) { return prob.loss(th, g); };
  const Objective constraint = [&](const Eigen::VectorXd& th, Eigen::VectorXd& g) { return prob.constraint(th, g); };
  AugLagConfig cfg;
  cfg.inner.max_iter = max_iter;
  NotearsFit out;
  out.solver = augmented_lagrangian_minimize(loss, constraint, prob.initial(), cfg, prob.lower_bounds());
  out.weights = prob.adjacency(out.solver.theta);
  return out;
}

class NotearsMlpLearner final : public Learner {
 public:
  NotearsMlpLearner() {
    space_.algorithm = "notears_mlp";
    space_.fixed = {{"hidden_layers", "1"}, {"max_iter", "100"}, {"h_tol", "1e-8"}, {"rho_max", "1e+16"},
                    {"activation", "sigmoid"}};
    ParamSpec l1;
    l1.name = "lambda1";
    l1.min = 0.0;
    l1.default_value = 0.01;
    l1.grid = {0.001, 0.01, 0.1};
    l1.sim_mean = 0.01;
    l1.description = "L1 penalty on first-layer weights";
    ParamSpec l2 = l1;
    l2.name = "lambda2";
    l2.default_value = 0.01;
    l2.sim_mean = 0.1;
    l2.description = "L2 penalty on all weights";
    ParamSpec wt;
    wt.name = "w_threshold";
    wt.min = 0.0;
    wt.default_value = 0.3;
    wt.grid = {0.1, 0.3, 0.5};
    wt.sim_mean = 0.5;
    wt.post_fit = true;
    wt.description = "edges with induced weight at or below this are pruned";
    ParamSpec hu;
    hu.name = "hidden_units";
    hu.type = ParamType::Integer;
    hu.min = 1.0;
    hu.default_value = 10;
    hu.grid = {8, 16, 32};
    hu.sim_mean = 16;
    hu.description = "units in the hidden layer";
    space_.params = {l1, l2, wt, hu};
  }

  const HyperparameterSpace& space() const override { return space_; }

  std::shared_ptr<const FitState> fit(const Dataset& ds, const HyperparameterAssignment& h) const override {
    auto state = std::make_shared<State>();
    state->fit = notears_mlp_fit(ds, h.get_int("hidden_units"), h.get("lambda1"), h.get("lambda2"), 100);
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
