#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "causalbench/errors.hpp"

namespace causalbench {

/// f(x), writing the gradient into the second argument.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsConfig {
  int max_iter = 100;
  int memory = 10;
  double armijo_c = 1e-4;
  int max_backtracks = 40;
  double pg_tol = 1e-5;    // infinity norm of the projected gradient
  double f_rel_tol = 2.220446049250313e-09;  // relative decrease per step
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Limited-memory quasi-Newton with two-loop recursion and backtracking
/// Armijo line search. With `lower` set, iterates are projected onto
/// x >= lower and the quasi-Newton direction only moves free coordinates
/// (those not pinned at the bound by an outward gradient).
inline LbfgsResult lbfgs_minimize(const Objective& f, Eigen::VectorXd x, const LbfgsConfig& cfg,
                                  const std::optional<Eigen::VectorXd>& lower = std::nullopt) {
  const Eigen::Index n = x.size();
  const double inf = std::numeric_limits<double>::infinity();
  if (lower && lower->size() != n) throw ContractError("lbfgs: bound size mismatch");
  auto project = [&](Eigen::VectorXd& v) {
    if (lower) v = v.cwiseMax(*lower);
  };
  project(x);

  LbfgsResult res;
  Eigen::VectorXd g(n);
  double fx = f(x, g);
  ++res.evaluations;
  if (!std::isfinite(fx) || !g.allFinite()) throw NumericalError("lbfgs: non-finite objective at start");

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd free_mask(n);
  Eigen::VectorXd d(n);
  Eigen::VectorXd x_new(n);
  Eigen::VectorXd g_new(n);

  auto projected_grad_norm = [&]() {
    if (!lower) return g.cwiseAbs().maxCoeff();
    Eigen::VectorXd step = x - g;
    project(step);
    return (step - x).cwiseAbs().maxCoeff();
  };

  for (int it = 0; it < cfg.max_iter; ++it) {
    if (n == 0 || projected_grad_norm() <= cfg.pg_tol) {
      res.converged = true;
      break;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool pinned = lower && (*lower)(i) > -inf && x(i) <= (*lower)(i) && g(i) > 0.0;
      free_mask(i) = pinned ? 0.0 : 1.0;
    }

    // Two-loop recursion on the free subspace.
    Eigen::VectorXd q = g.cwiseProduct(free_mask);
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].cwiseProduct(free_mask).dot(q);
      q -= alpha[i] * y_hist[i].cwiseProduct(free_mask);
    }
    if (m > 0) {
      const double yy = y_hist.back().squaredNorm();
      q *= yy > 0 ? 1.0 / (rho_hist.back() * yy) : 1.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].cwiseProduct(free_mask).dot(q);
      q += (alpha[i] - beta) * s_hist[i].cwiseProduct(free_mask);
    }
    d = -q.cwiseProduct(free_mask);
    if (!(g.dot(d) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -g.cwiseProduct(free_mask);
    }

    double t = 1.0;
    if (s_hist.empty()) t = std::min(1.0, 1.0 / std::max(d.cwiseAbs().maxCoeff(), 1e-300));
    double f_new = inf;
    bool accepted = false;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      x_new = x + t * d;
      project(x_new);
      f_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && g_new.allFinite() && f_new <= fx + cfg.armijo_c * g.dot(x_new - x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++res.iterations;
    if (!accepted) {
      // No descent along d; converged to working precision.
      res.converged = true;
      break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double f_old = fx;
    x = x_new;
    g = g_new;
    fx = f_new;
    if (sy > 1e-10 * y.squaredNorm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if ((f_old - fx) <= cfg.f_rel_tol * std::max({std::abs(f_old), std::abs(fx), 1.0})) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  res.f = fx;
  return res;
}

}  // namespace causalbench
