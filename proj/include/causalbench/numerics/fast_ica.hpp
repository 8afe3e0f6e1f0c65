#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

#include "causalbench/errors.hpp"
#include "causalbench/rng.hpp"

namespace causalbench {

struct IcaResult {
  Eigen::MatrixXd unmixing;   // sources = unmixing * (x - mean)
  Eigen::MatrixXd whitened_unmixing;  // orthonormal rows
  int iterations_used = 0;
  bool converged = false;
};

namespace detail {

// W <- (W W^T)^{-1/2} W
inline Eigen::MatrixXd symmetric_decorrelation(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

}  // namespace detail

/// Symmetric (parallel) FastICA with the log-cosh contrast, g(u) = tanh(u).
/// Whitening uses the eigendecomposition of the sample covariance; the
/// starting rotation is drawn from `seed`.
inline IcaResult fast_ica(const Eigen::MatrixXd& x, int max_iter, double tol, std::uint64_t seed = 0) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n <= p) throw ContractError("fast_ica: need more samples than variables");
  if (max_iter < 1) throw ContractError("fast_ica: max_iter must be >= 1");

  const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = xc.transpose() * xc / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * std::max(ev.maxCoeff(), 1e-300)))
    throw NumericalError("fast_ica: covariance is rank deficient");
  // whitening: z = K x, K = D^{-1/2} E^T
  const Eigen::MatrixXd k = ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd z = xc * k.transpose();  // n x p

  SplitMix64 rng(seed);
  Eigen::MatrixXd w(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) w(i, j) = rng.normal();
  w = detail::symmetric_decorrelation(w);

  IcaResult res;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd wx = z * w.transpose();  // n x p
    const Eigen::MatrixXd g = wx.array().tanh().matrix();
    const Eigen::VectorXd g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    Eigen::MatrixXd w_new = inv_n * (g.transpose() * z) - g_prime_mean.asDiagonal() * w;
    w_new = detail::symmetric_decorrelation(w_new);
    const double lim = ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = std::move(w_new);
    res.iterations_used = it + 1;
    if (lim < tol) {
      res.converged = true;
      break;
    }
  }
  res.whitened_unmixing = w;
  res.unmixing = w * k;
  return res;
}

}  // namespace causalbench
