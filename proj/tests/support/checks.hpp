#pragma once

// Helpers shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "causalbench/algorithms/notears_mlp.hpp"
#include "causalbench/numerics/acyclicity.hpp"
#include "causalbench/rng.hpp"

namespace checks {

/// ||analytic - central difference|| / max(||analytic||, ||central difference||)
/// over the listed coordinates.
inline double fd_relative_error(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& grad, const std::vector<Eigen::Index>& coords,
                                double step = 1e-6) {
  double num = 0.0, da = 0.0, dn = 0.0;
  for (auto i : coords) {
    Eigen::VectorXd a = x, b = x;
    a(i) += step;
    b(i) -= step;
    const double fd = (f(a) - f(b)) / (2.0 * step);
    num += (fd - grad(i)) * (fd - grad(i));
    da += grad(i) * grad(i);
    dn += fd * fd;
  }
  const double scale = std::max({std::sqrt(da), std::sqrt(dn), 1e-300});
  return std::sqrt(num) / scale;
}

inline Eigen::MatrixXd uniform_matrix(int rows, int cols, double lo, double hi, causalbench::SplitMix64& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

/// Relative error of acyclicity_h's gradient at W (flattened column-major).
inline double acyclicity_gradient_error(const Eigen::MatrixXd& w) {
  const int p = static_cast<int>(w.rows());
  const auto h = causalbench::acyclicity_h(w);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(h.gradient.data(), h.gradient.size());
  std::vector<Eigen::Index> coords;
  for (Eigen::Index i = 0; i < x.size(); ++i) coords.push_back(i);
  auto f = [p](const Eigen::VectorXd& v) {
    return causalbench::acyclicity_h(Eigen::Map<const Eigen::MatrixXd>(v.data(), p, p)).value;
  };
  return fd_relative_error(f, x, g, coords);
}

/// Coordinates of an MLP problem's parameter vector that are free (everything
/// except the first-layer inputs a node feeds into its own network).
inline std::vector<Eigen::Index> mlp_free_coords(const causalbench::NotearsMlpProblem& prob) {
  const int p = prob.p(), h = prob.hidden();
  const Eigen::Index w1 = static_cast<Eigen::Index>(p) * p * h;
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < prob.size(); ++i) {
    if (i < 2 * w1) {
      const Eigen::Index local = i % w1;
      const Eigen::Index row = local % p, col = local / p;
      if (row == col / h) continue;
    }
    out.push_back(i);
  }
  return out;
}

/// Relative error of the augmented-Lagrangian objective
/// loss + rho/2 h^2 + alpha h of an MLP problem.
inline double mlp_objective_gradient_error(const causalbench::NotearsMlpProblem& prob, const Eigen::VectorXd& th,
                                           double rho, double alpha) {
  auto full = [&](const Eigen::VectorXd& t, Eigen::VectorXd& g) {
    Eigen::VectorXd gl, gh;
    const double l = prob.loss(t, gl);
    const double h = prob.constraint(t, gh);
    g = gl + (rho * h + alpha) * gh;
    return l + 0.5 * rho * h * h + alpha * h;
  };
  Eigen::VectorXd g;
  full(th, g);
  auto f = [&](const Eigen::VectorXd& t) {
    Eigen::VectorXd scratch;
    return full(t, scratch);
  };
  return fd_relative_error(f, th, g, mlp_free_coords(prob), 1e-5);
}

}  // namespace checks
