#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "causalbench/errors.hpp"

namespace causalbench {

/// exp(A) by scaling and squaring: scale so ||A/2^s||_1 <= 1/2, sum the Taylor
/// series for up to 30 terms (18 suffice at that norm for double precision),
/// then square s times.
inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ContractError("matrix_exponential: matrix must be square");
  if (!a.allFinite()) throw NumericalError("matrix_exponential: non-finite input");
  const Eigen::Index p = a.rows();
  if (p == 0) return a;
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd b = a / std::ldexp(1.0, squarings);

  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(p, p);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(p, p);
  for (int k = 1; k <= 30; ++k) {
    term = term * b / static_cast<double>(k);
    result += term;
    if (k >= 6 && term.cwiseAbs().maxCoeff() <= 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  if (!result.allFinite())
    throw NumericalError("matrix_exponential: overflow (||A||_1 = " + std::to_string(norm) +
                         "); clip or rescale the weights");
  return result;
}

struct AcyclicityValue {
  double value = 0.0;
  Eigen::MatrixXd gradient;  // with respect to the input matrix
};

/// h = tr(exp(M)) - p for an entrywise non-negative M; gradient exp(M)^T.
/// Shared by the linear (M = W o W) and MLP (M = squared first-layer norms) forms.
inline AcyclicityValue acyclicity_of_squares(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd e = matrix_exponential(m);
  return {e.trace() - static_cast<double>(m.rows()), e.transpose()};
}

/// h(W) = tr(exp(W o W)) - p and its gradient exp(W o W)^T o 2W. Zero exactly
/// when the support of W is acyclic.
inline AcyclicityValue acyclicity_h(const Eigen::MatrixXd& w) {
  if (!w.allFinite()) throw NumericalError("acyclicity_h: non-finite weights");
  auto sq = acyclicity_of_squares(w.cwiseProduct(w));
  sq.gradient = sq.gradient.cwiseProduct(2.0 * w);
  return sq;
}

}  // namespace causalbench
