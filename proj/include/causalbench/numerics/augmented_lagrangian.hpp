#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "causalbench/errors.hpp"
#include "causalbench/numerics/lbfgs.hpp"

namespace causalbench {

struct AugLagConfig {
  double h_tol = 1e-8;
  double rho_max = 1e16;
  double rho_init = 1.0;
  double alpha_init = 0.0;
  double rho_factor = 10.0;
  double progress_ratio = 0.25;
  int max_outer = 100;
  LbfgsConfig inner;
};

struct AugLagResult {
  Eigen::VectorXd theta;
  double h = std::numeric_limits<double>::infinity();
  double rho = 0.0;
  double alpha = 0.0;
  int outer_iterations = 0;
  int inner_solves = 0;
  int inner_iterations = 0;
  bool hit_rho_max = false;
  bool converged = false;  // h <= h_tol
};

/// Equality-constrained minimisation of loss(theta) s.t. h(theta) = 0.
///
/// Each inner solve minimises loss + rho/2 h^2 + alpha h from the last outer
/// iterate. If h did not shrink below progress_ratio times its previous value
/// the penalty rho grows by rho_factor and the solve repeats; otherwise the
/// dual alpha moves by rho * h. Stops once h <= h_tol or rho >= rho_max.
inline AugLagResult augmented_lagrangian_minimize(const Objective& loss, const Objective& constraint,
                                                  Eigen::VectorXd theta0, const AugLagConfig& cfg,
                                                  const std::optional<Eigen::VectorXd>& lower = std::nullopt) {
  AugLagResult res;
  double rho = cfg.rho_init;
  double alpha = cfg.alpha_init;
  double h = std::numeric_limits<double>::infinity();
  Eigen::VectorXd theta = std::move(theta0);
  std::ostringstream trace;

  Eigen::VectorXd gh;
  auto lagrangian = [&](const Eigen::VectorXd& th, Eigen::VectorXd& grad) {
    const double l = loss(th, grad);
    gh.resize(th.size());
    const double hv = constraint(th, gh);
    grad += (rho * hv + alpha) * gh;
    return l + 0.5 * rho * hv * hv + alpha * hv;
  };

  Eigen::VectorXd scratch(theta.size());
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    Eigen::VectorXd theta_new;
    double h_new = h;
    while (true) {
      const auto inner = lbfgs_minimize(lagrangian, theta, cfg.inner, lower);
      ++res.inner_solves;
      res.inner_iterations += inner.iterations;
      theta_new = inner.x;
      h_new = constraint(theta_new, scratch);
      const double l = loss(theta_new, scratch);
      trace << "outer=" << outer << " rho=" << rho << " h=" << h_new << " loss=" << l << '\n';
      if (!std::isfinite(l) || !std::isfinite(h_new))
        throw NumericalError("augmented_lagrangian: divergence\n" + trace.str());
      if (h_new > cfg.progress_ratio * h && rho < cfg.rho_max) rho *= cfg.rho_factor;
      else break;
      if (rho >= cfg.rho_max) break;
    }
    theta = std::move(theta_new);
    h = h_new;
    alpha += rho * h;
    res.outer_iterations = outer + 1;
    if (h <= cfg.h_tol) break;
    if (rho >= cfg.rho_max) {
      res.hit_rho_max = true;
      break;
    }
  }
  res.theta = std::move(theta);
  res.h = h;
  res.rho = rho;
  res.alpha = alpha;
  res.converged = h <= cfg.h_tol;
  return res;
}

}  // namespace causalbench
