#pragma once

#include <Eigen/Dense>

#include <string>

#include "causalbench/dataset.hpp"
#include "causalbench/errors.hpp"
#include "causalbench/graph.hpp"
#include "causalbench/rng.hpp"

namespace causalbench {

enum class SemKind { LinearGumbel, NonlinearGp };

struct SemSpec {
  SemKind kind = SemKind::LinearGumbel;
  double weight_lo = 0.5;
  double weight_hi = 2.0;
  double noise_scale = 1.0;
  double rbf_bandwidth = 1.0;

  void validate() const {
    if (!(weight_lo > 0.0 && weight_lo < weight_hi)) throw ConfigError("SemSpec: need 0 < weight_lo < weight_hi");
    if (!(noise_scale > 0.0)) throw ConfigError("SemSpec: noise_scale must be positive");
    if (!(rbf_bandwidth > 0.0)) throw ConfigError("SemSpec: rbf_bandwidth must be positive");
  }
};

inline constexpr int kMaxGpSamples = 20000;

/// Independent weights on [-hi, -lo] U [lo, hi] for every edge of g.
inline WeightedAdjacency draw_edge_weights(const Graph& g, const SemSpec& spec, SplitMix64& rng) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(g.p(), g.p());
  for (const auto& e : g.edges()) {
    const double mag = rng.uniform(spec.weight_lo, spec.weight_hi);
    w(e.from, e.to) = rng.uniform() < 0.5 ? -mag : mag;
  }
  return WeightedAdjacency(std::move(w));
}

/// X_j = sum_k w(k, j) X_k + z_j, z_j ~ Gumbel(0, noise_scale), with given weights.
inline Dataset sample_linear_gumbel(const Graph& g, const WeightedAdjacency& weights, int n,
                                    const SemSpec& spec, SplitMix64& rng) {
  spec.validate();
  if (n < 1) throw ContractError("sample_linear_gumbel: n must be >= 1");
  if (weights.p() != g.p()) throw ContractError("sample_linear_gumbel: weight/graph size mismatch");
  if (!g.all_directed() || !detail::directed_part_acyclic(g))
    throw ContractError("sample_linear_gumbel: graph must be acyclic");
  const int p = g.p();
  Eigen::MatrixXd x(n, p);
  for (int j : topological_order(g)) {
    auto col = x.col(j);
    for (int r = 0; r < n; ++r) col(r) = rng.gumbel(0.0, spec.noise_scale);
    for (int k : g.parents(j)) col += weights.w(k, j) * x.col(k);
  }
  Dataset ds = make_dataset(std::move(x), g);
  ds.truth_weights = weights;
  ds.meta["sem"] = "gumbel";
  return ds;
}

inline Dataset sample_linear_gumbel(const Graph& g, int n, const SemSpec& spec, SplitMix64& rng) {
  spec.validate();
  const auto weights = draw_edge_weights(g, spec, rng);
  return sample_linear_gumbel(g, weights, n, spec, rng);
}

namespace detail {

/// Lower Cholesky factor of k + jitter*I, escalating jitter 1e-8 -> 1e-4.
inline Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& k, const char* what) {
  for (double jitter = 1e-8; jitter <= 1e-4 * 1.0001; jitter *= 10.0) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if (l.allFinite()) return l;
    }
  }
  throw NumericalError(std::string(what) + ": kernel matrix not positive definite after jitter 1e-4");
}

inline Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& u, double bandwidth) {
  const Eigen::Index n = u.rows();
  const Eigen::VectorXd sq = u.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * u * u.transpose()).colwise() + sq;
  d2.rowwise() += sq.transpose();
  d2 = d2.cwiseMax(0.0);
  Eigen::MatrixXd k = (-d2 / (2.0 * bandwidth * bandwidth)).array().exp();
  for (Eigen::Index i = 0; i < n; ++i) k(i, i) = 1.0;
  return k;
}

}  // namespace detail

/// X_j = f_j(X_PA(j)) + z_j with z_j ~ N(0, noise_scale^2) and f_j an exact
/// GP(0, RBF) draw at the observed parent values. Root nodes are pure noise.
inline Dataset sample_nonlinear_gp(const Graph& g, int n, const SemSpec& spec, SplitMix64& rng) {
  spec.validate();
  if (n < 1) throw ContractError("sample_nonlinear_gp: n must be >= 1");
  if (n > kMaxGpSamples)
    throw ContractError("sample_nonlinear_gp: n=" + std::to_string(n) + " exceeds " +
                        std::to_string(kMaxGpSamples));
  if (!g.all_directed() || !detail::directed_part_acyclic(g))
    throw ContractError("sample_nonlinear_gp: graph must be acyclic");
  const int p = g.p();
  Eigen::MatrixXd x(n, p);
  for (int j : topological_order(g)) {
    const auto parents = g.parents(j);
    Eigen::VectorXd col(n);
    if (!parents.empty()) {
      Eigen::MatrixXd u(n, static_cast<Eigen::Index>(parents.size()));
      for (std::size_t c = 0; c < parents.size(); ++c) u.col(static_cast<Eigen::Index>(c)) = x.col(parents[c]);
      const Eigen::MatrixXd l = detail::jittered_cholesky(detail::rbf_gram(u, spec.rbf_bandwidth), "sample_nonlinear_gp");
      Eigen::VectorXd z(n);
      for (int r = 0; r < n; ++r) z(r) = rng.normal();
      col = l * z;
    } else {
      col.setZero();
    }
    for (int r = 0; r < n; ++r) col(r) += spec.noise_scale * rng.normal();
    x.col(j) = col;
  }
  Dataset ds = make_dataset(std::move(x), g);
  ds.meta["sem"] = "gp";
  return ds;
}

inline Dataset sample_sem(const Graph& g, int n, const SemSpec& spec, SplitMix64& rng) {
  return spec.kind == SemKind::LinearGumbel ? sample_linear_gumbel(g, n, spec, rng)
                                            : sample_nonlinear_gp(g, n, spec, rng);
}

}  // namespace causalbench
