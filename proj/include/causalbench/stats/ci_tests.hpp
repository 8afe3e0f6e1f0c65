#pragma once

#include <Eigen/Dense>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "causalbench/dataset.hpp"
#include "causalbench/errors.hpp"
#include "causalbench/rng.hpp"

namespace causalbench {

struct CiTestResult {
  double statistic = 0.0;
  double p_value = 1.0;

  bool independent_at(double alpha) const { return p_value >= alpha; }
};

/// Two-sided standard-normal tail, P(|Z| >= z).
inline double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

/// Fisher-z partial-correlation test over a precomputed correlation matrix.
class FisherZTest {
 public:
  explicit FisherZTest(const Dataset& ds) : n_(ds.n()) {
    const Eigen::MatrixXd xc = ds.x.rowwise() - ds.x.colwise().mean();
    Eigen::MatrixXd cov = xc.transpose() * xc / static_cast<double>(ds.n());
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j)
      if (!(sd(j) > 0.0)) throw NumericalError("fisher_z: column " + std::to_string(j) + " has zero variance");
    corr_ = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  }

  int n() const { return n_; }

  double partial_correlation(int j, int k, const std::vector<int>& z) const {
    if (z.empty()) return corr_(j, k);
    const auto m = static_cast<Eigen::Index>(z.size());
    Eigen::MatrixXd szz(m, m);
    Eigen::VectorXd sjz(m), skz(m);
    for (Eigen::Index a = 0; a < m; ++a) {
      sjz(a) = corr_(j, z[static_cast<std::size_t>(a)]);
      skz(a) = corr_(k, z[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < m; ++b) szz(a, b) = corr_(z[static_cast<std::size_t>(a)], z[static_cast<std::size_t>(b)]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(szz);
    const double min_pivot = ldlt.vectorD().minCoeff();
    if (ldlt.info() != Eigen::Success || !(min_pivot > 1e-10))
      throw NumericalError("fisher_z: conditioning set is collinear");
    const Eigen::VectorXd aj = ldlt.solve(sjz);
    const Eigen::VectorXd ak = ldlt.solve(skz);
    const double num = corr_(j, k) - sjz.dot(ak);
    const double dj = 1.0 - sjz.dot(aj);
    const double dk = 1.0 - skz.dot(ak);
    if (!(dj > 0.0 && dk > 0.0)) return num >= 0 ? 1.0 : -1.0;
    return num / std::sqrt(dj * dk);
  }

  CiTestResult test(int j, int k, const std::vector<int>& z) const {
    if (j == k) throw ContractError("fisher_z: j == k");
    const int dof = n_ - static_cast<int>(z.size()) - 3;
    if (dof <= 0) throw ContractError("fisher_z: need n > |Z| + 3");
    // Ordered indices make the test exactly symmetric in (j, k).
    const double r = std::clamp(partial_correlation(std::min(j, k), std::max(j, k), z), -1.0 + 1e-15, 1.0 - 1e-15);
    const double fz = 0.5 * std::log((1.0 + r) / (1.0 - r));
    CiTestResult out;
    out.statistic = std::sqrt(static_cast<double>(dof)) * std::abs(fz);
    out.p_value = std::clamp(normal_two_sided_p(out.statistic), 0.0, 1.0);
    return out;
  }

 private:
  int n_;
  Eigen::MatrixXd corr_;
};

inline CiTestResult fisher_z_test(const Dataset& ds, int j, int k, const std::vector<int>& z) {
  return FisherZTest(ds).test(j, k, z);
}

// ---------------------------------------------------------------------------
// Kernels

/// Pairwise squared Euclidean distances between rows.
inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& u) {
  const Eigen::VectorXd sq = u.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * u * u.transpose()).colwise() + sq;
  d2.rowwise() += sq.transpose();
  d2 = d2.cwiseMax(0.0);
  d2.diagonal().setZero();
  return d2;
}

/// Median of pairwise distances (i < j).
inline double median_distance(const Eigen::MatrixXd& d2) {
  const Eigen::Index n = d2.rows();
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) vals.push_back(d2(i, j));
  if (vals.empty()) return 0.0;
  auto mid = vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  return std::sqrt(*mid);
}

/// exp(-d^2 / (2 sigma^2))
inline Eigen::MatrixXd rbf_from_squared(const Eigen::MatrixXd& d2, double sigma) {
  return (-d2.array() / (2.0 * sigma * sigma)).exp().matrix();
}

// ---------------------------------------------------------------------------
// HSIC

enum class HsicNull { Gamma, Permutation };

struct HsicOptions {
  HsicNull null = HsicNull::Gamma;
  int permutations = 500;
  std::uint64_t seed = 0;
};

namespace detail {

inline Eigen::MatrixXd center_gram(const Eigen::MatrixXd& k) {
  const Eigen::VectorXd row_mean = k.rowwise().mean();
  const double grand = row_mean.mean();
  Eigen::MatrixXd kc = k;
  kc.colwise() -= row_mean;
  kc.rowwise() -= row_mean.transpose();
  kc.array() += grand;
  return kc;
}

inline Eigen::MatrixXd hsic_gram(const Eigen::VectorXd& v, const char* which) {
  const Eigen::MatrixXd d2 = squared_distances(v);
  const double sigma = median_distance(d2);
  if (!(sigma > 0.0)) throw NumericalError(std::string("hsic_test: zero median distance for ") + which);
  return rbf_from_squared(d2, sigma);
}

}  // namespace detail

/// Kernel matrix of one HSIC input plus its doubly centred form.
struct HsicKernel {
  Eigen::MatrixXd k;
  Eigen::MatrixXd kc;

  HsicKernel(const Eigen::VectorXd& v, const char* which = "input")
      : k(detail::hsic_gram(v, which)), kc(detail::center_gram(k)) {}
};

/// Gamma-approximation HSIC test between two prepared kernels.
inline CiTestResult hsic_gamma(const HsicKernel& a, const HsicKernel& b) {
  const Eigen::Index n = a.k.rows();
  if (b.k.rows() != n) throw ContractError("hsic_test: length mismatch");
  const double nd = static_cast<double>(n);
  CiTestResult out;
  out.statistic = a.kc.cwiseProduct(b.kc).sum() / nd;
  const Eigen::MatrixXd v = (a.kc.cwiseProduct(b.kc) / 6.0).array().square().matrix();
  double var = (v.sum() - v.trace()) / nd / (nd - 1.0);
  var *= 72.0 * (nd - 4.0) * (nd - 5.0) / nd / (nd - 1.0) / (nd - 2.0) / (nd - 3.0);
  const double mu_x = (a.k.sum() - a.k.trace()) / nd / (nd - 1.0);
  const double mu_y = (b.k.sum() - b.k.trace()) / nd / (nd - 1.0);
  const double mean = (1.0 + mu_x * mu_y - mu_x - mu_y) / nd;
  if (!(var > 0.0) || !(mean > 0.0)) return out;
  const double shape = mean * mean / var;
  const double scale = var * nd / mean;
  out.p_value = std::clamp(boost::math::gamma_q(shape, out.statistic / scale), 0.0, 1.0);
  return out;
}

/// Biased HSIC statistic n * HSIC_b with RBF kernels at the median-distance
/// bandwidth; p-value from the gamma approximation of the null (Gretton et
/// al. 2008) or from permutations.
inline CiTestResult hsic_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const HsicOptions& opt = {}) {
  const Eigen::Index n = x.size();
  if (y.size() != n) throw ContractError("hsic_test: length mismatch");
  if (n < 20) throw ContractError("hsic_test: need n >= 20");
  const HsicKernel kx(x, "x");
  const HsicKernel ky(y, "y");
  if (opt.null == HsicNull::Gamma) return hsic_gamma(kx, ky);

  const double nd = static_cast<double>(n);
  CiTestResult out;
  out.statistic = kx.kc.cwiseProduct(ky.kc).sum() / nd;
  SplitMix64 rng(opt.seed);
  int exceed = 0;
  Eigen::MatrixXd lp(n, n);
  for (int b = 0; b < opt.permutations; ++b) {
    const auto perm = rng.permutation(static_cast<int>(n));
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = 0; r < n; ++r)
        lp(r, c) = ky.kc(perm[static_cast<std::size_t>(r)], perm[static_cast<std::size_t>(c)]);
    if (kx.kc.cwiseProduct(lp).sum() / nd >= out.statistic) ++exceed;
  }
  out.p_value = (1.0 + exceed) / (1.0 + opt.permutations);
  return out;
}

}  // namespace causalbench
