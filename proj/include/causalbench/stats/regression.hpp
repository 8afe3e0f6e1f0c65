#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "causalbench/dataset.hpp"
#include "causalbench/errors.hpp"
#include "causalbench/stats/ci_tests.hpp"

namespace causalbench {

/// RBF Gram matrix at the median-distance bandwidth over fixed inputs, with
/// the ridge system factorized once so many targets can be fitted cheaply.
class KernelBasis {
 public:
  KernelBasis(Eigen::MatrixXd x, double ridge) : train_x_(std::move(x)) {
    const Eigen::Index n = train_x_.rows();
    if (n < 10) throw ContractError("kernel_regress: need n >= 10");
    if (!(ridge > 0.0)) throw ContractError("kernel_regress: ridge must be positive");
    const Eigen::MatrixXd d2 = squared_distances(train_x_);
    bandwidth_ = median_distance(d2);
    if (!(bandwidth_ > 0.0)) throw NumericalError("kernel_regress: zero median distance (constant input)");
    gram_ = rbf_from_squared(d2, bandwidth_);
    for (double extra : {0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
      Eigen::MatrixXd a = gram_;
      a.diagonal().array() += ridge + extra;
      llt_.compute(a);
      if (llt_.info() == Eigen::Success) return;
    }
    throw NumericalError("kernel_regress: Gram factorization failed");
  }

  /// Dual coefficients for a centred target.
  Eigen::VectorXd solve(const Eigen::VectorXd& yc) const {
    if (yc.size() != train_x_.rows()) throw ContractError("kernel_regress: length mismatch");
    Eigen::VectorXd coef = llt_.solve(yc);
    if (!coef.allFinite()) throw NumericalError("kernel_regress: non-finite solution");
    return coef;
  }

  /// In-sample residuals y - yhat.
  Eigen::VectorXd residuals(const Eigen::VectorXd& y) const {
    const double mean = y.mean();
    const Eigen::VectorXd yc = y.array() - mean;
    return yc - gram_ * solve(yc);
  }

  const Eigen::MatrixXd& inputs() const { return train_x_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double bandwidth() const { return bandwidth_; }

 private:
  Eigen::MatrixXd train_x_;
  Eigen::MatrixXd gram_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double bandwidth_ = 1.0;
};

/// Kernel ridge regression with an RBF kernel at the median-distance
/// bandwidth. Targets are centred; the mean is added back as intercept.
class KernelRegressor {
 public:
  KernelRegressor(Eigen::MatrixXd x, const Eigen::VectorXd& y, double ridge) : basis_(std::move(x), ridge) {
    intercept_ = y.mean();
    coef_ = basis_.solve(y.array() - intercept_);
    fitted_ = (basis_.gram() * coef_).array() + intercept_;
    residuals_ = y - fitted_;
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const {
    const auto& train = basis_.inputs();
    if (x.cols() != train.cols()) throw ContractError("kernel_regress: predict dimension mismatch");
    Eigen::MatrixXd d2(x.rows(), train.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      d2.row(i) = (train.rowwise() - x.row(i)).rowwise().squaredNorm().transpose();
    return (rbf_from_squared(d2, basis_.bandwidth()) * coef_).array() + intercept_;
  }

  const Eigen::VectorXd& residuals() const { return residuals_; }
  const Eigen::VectorXd& fitted() const { return fitted_; }
  double bandwidth() const { return basis_.bandwidth(); }

 private:
  KernelBasis basis_;
  Eigen::VectorXd coef_;
  Eigen::VectorXd fitted_;
  Eigen::VectorXd residuals_;
  double intercept_ = 0.0;
};

inline double default_ridge(Eigen::Index n) { return 1e-3 * static_cast<double>(n); }

inline KernelRegressor kernel_regress(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      std::optional<double> ridge = std::nullopt) {
  return KernelRegressor(x, y, ridge.value_or(default_ridge(x.rows())));
}

// ---------------------------------------------------------------------------
// Gaussian BIC

struct ScoreValue {
  double value = 0.0;  // higher is better
  double penalty_discount = 1.0;
  int dof = 0;
};

/// Local Gaussian BIC from a cached covariance matrix:
///   -n ln(RSS/n) - penalty_discount * (|parents| + 1) * ln n
/// where RSS is from least squares of the target on its parents plus intercept.
class BicScorer {
 public:
  BicScorer(const Dataset& ds, double penalty_discount) : n_(ds.n()), penalty_discount_(penalty_discount) {
    if (!(penalty_discount > 0.0)) throw ContractError("bic: penalty_discount must be positive");
    const Eigen::MatrixXd xc = ds.x.rowwise() - ds.x.colwise().mean();
    cov_ = xc.transpose() * xc / static_cast<double>(n_);
  }

  int n() const { return n_; }
  int p() const { return static_cast<int>(cov_.rows()); }
  double penalty_discount() const { return penalty_discount_; }

  /// RSS / n of the target regressed on `parents`.
  double residual_variance(int j, const std::vector<int>& parents) const {
    const double vjj = cov_(j, j);
    if (parents.empty()) return vjj;
    const auto m = static_cast<Eigen::Index>(parents.size());
    Eigen::MatrixXd spp(m, m);
    Eigen::VectorXd spj(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      spj(a) = cov_(parents[static_cast<std::size_t>(a)], j);
      for (Eigen::Index b = 0; b < m; ++b)
        spp(a, b) = cov_(parents[static_cast<std::size_t>(a)], parents[static_cast<std::size_t>(b)]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(spp);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * std::max(spp.diagonal().maxCoeff(), 1e-300)))
      throw NumericalError("bic_score: singular design for node " + std::to_string(j));
    return std::max(vjj - spj.dot(ldlt.solve(spj)), 1e-300);
  }

  ScoreValue score(int j, const std::vector<int>& parents) const {
    if (n_ <= static_cast<int>(parents.size()) + 1) throw ContractError("bic_score: need n > |parents| + 1");
    const double n = static_cast<double>(n_);
    const int dof = static_cast<int>(parents.size()) + 1;
    const double value = -n * std::log(residual_variance(j, parents)) - penalty_discount_ * dof * std::log(n);
    return {value, penalty_discount_, dof};
  }

 private:
  int n_;
  double penalty_discount_;
  Eigen::MatrixXd cov_;
};

inline ScoreValue bic_score(const Dataset& ds, int j, const std::vector<int>& parents, double penalty_discount) {
  return BicScorer(ds, penalty_discount).score(j, parents);
}

}  // namespace causalbench
