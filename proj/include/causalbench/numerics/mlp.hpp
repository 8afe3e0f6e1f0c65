#pragma once

#include <Eigen/Dense>

#include "causalbench/errors.hpp"

namespace causalbench {

/// One-hidden-layer sigmoid network predicting a scalar from p inputs.
struct MlpNode {
  Eigen::MatrixXd w1;  // p x h
  Eigen::VectorXd b1;  // h
  Eigen::VectorXd w2;  // h
  double b2 = 0.0;

  static MlpNode zeros(int p, int h) {
    return {Eigen::MatrixXd::Zero(p, h), Eigen::VectorXd::Zero(h), Eigen::VectorXd::Zero(h), 0.0};
  }
};

struct MlpNodeLoss {
  double loss = 0.0;
  MlpNode gradient;
};

namespace detail {
inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }
}  // namespace detail

/// loss = 1/(2n) ||target - mlp(x)||^2 with exact backprop gradients.
inline MlpNodeLoss mlp_forward_backward(const MlpNode& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& target) {
  const Eigen::Index n = x.rows();
  const Eigen::Index h = m.w1.cols();
  if (m.w1.rows() != x.cols() || m.b1.size() != h || m.w2.size() != h || target.size() != n)
    throw ContractError("mlp_forward_backward: shape mismatch");
  const Eigen::ArrayXXd act = detail::sigmoid(((x * m.w1).rowwise() + m.b1.transpose()).array());
  const Eigen::VectorXd pred = (act.matrix() * m.w2).array() + m.b2;
  const Eigen::VectorXd resid = pred - target;
  const double inv_n = 1.0 / static_cast<double>(n);

  MlpNodeLoss out;
  out.loss = 0.5 * inv_n * resid.squaredNorm();
  const Eigen::VectorXd r = inv_n * resid;
  out.gradient.w2 = act.matrix().transpose() * r;
  out.gradient.b2 = r.sum();
  const Eigen::MatrixXd dpre = ((r * m.w2.transpose()).array() * act * (1.0 - act)).matrix();
  out.gradient.w1 = x.transpose() * dpre;
  out.gradient.b1 = dpre.colwise().sum().transpose();
  return out;
}

/// p per-target networks stored side by side so one GEMM serves all targets.
/// Column block [j*h, (j+1)*h) of w1 belongs to target j.
struct MlpModel {
  int p = 0;
  int h = 0;
  Eigen::MatrixXd w1;  // p x (p*h)
  Eigen::MatrixXd b1;  // h x p
  Eigen::MatrixXd w2;  // h x p
  Eigen::VectorXd b2;  // p

  static MlpModel zeros(int p, int h) {
    return {p, h, Eigen::MatrixXd::Zero(p, p * h), Eigen::MatrixXd::Zero(h, p), Eigen::MatrixXd::Zero(h, p),
            Eigen::VectorXd::Zero(p)};
  }

  MlpNode node(int j) const {
    return {w1.middleCols(j * h, h), b1.col(j), w2.col(j), b2(j)};
  }
};

struct MlpModelLoss {
  double loss = 0.0;
  MlpModel gradient;
};

/// Sum over targets j of 1/(2n) ||x_j - mlp_j(x)||^2.
inline MlpModelLoss mlp_forward_backward_all(const MlpModel& m, const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const int p = m.p;
  const int h = m.h;
  if (x.cols() != p) throw ContractError("mlp_forward_backward_all: shape mismatch");
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::MatrixXd act = x * m.w1;  // n x (p*h)
  for (int j = 0; j < p; ++j) act.middleCols(j * h, h).rowwise() += m.b1.col(j).transpose();
  act = (1.0 / (1.0 + (-act.array()).exp())).matrix();

  MlpModelLoss out;
  out.gradient = MlpModel::zeros(p, h);
  Eigen::MatrixXd dpre(n, static_cast<Eigen::Index>(p) * h);
  double loss = 0.0;
  for (int j = 0; j < p; ++j) {
    const auto block = act.middleCols(j * h, h);
    Eigen::VectorXd resid = block * m.w2.col(j);
    resid.array() += m.b2(j) - x.col(j).array();
    loss += 0.5 * inv_n * resid.squaredNorm();
    const Eigen::VectorXd r = inv_n * resid;
    out.gradient.w2.col(j) = block.transpose() * r;
    out.gradient.b2(j) = r.sum();
    dpre.middleCols(j * h, h) =
        ((r * m.w2.col(j).transpose()).array() * block.array() * (1.0 - block.array())).matrix();
    out.gradient.b1.col(j) = dpre.middleCols(j * h, h).colwise().sum().transpose();
  }
  out.gradient.w1.noalias() = x.transpose() * dpre;
  out.loss = loss;
  return out;
}

}  // namespace causalbench
