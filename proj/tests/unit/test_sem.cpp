#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "causalbench/generators.hpp"
#include "causalbench/sem.hpp"

using namespace causalbench;

namespace {

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> v, Cdf cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::vector<double> column(const Dataset& ds, int j) {
  return std::vector<double>(ds.x.col(j).data(), ds.x.col(j).data() + ds.n());
}

}  // namespace

TEST(LinearGumbel, RootNoiseIsStandardGumbel) {
  Graph g(2, GraphKind::DAG);
  g.add_directed(0, 1);
  SplitMix64 rng(1);
  const Dataset ds = sample_linear_gumbel(g, 5000, SemSpec{}, rng);
  const double d = ks_distance(column(ds, 0), [](double x) { return std::exp(-std::exp(-x)); });
  EXPECT_LT(d, 1.36 / std::sqrt(5000.0));  // 5% KS critical value
  EXPECT_NEAR(ds.x.col(0).mean(), std::numbers::egamma, 0.05);
}

TEST(LinearGumbel, RegressionRecoversWeights) {
  SplitMix64 grng(4);
  const Graph g = random_dag_er(6, 1.5, grng);
  SplitMix64 rng(9);
  const Dataset ds = sample_linear_gumbel(g, 20000, SemSpec{}, rng);
  ASSERT_TRUE(ds.truth_weights);
  for (int j = 0; j < 6; ++j) {
    const auto pa = g.parents(j);
    if (pa.empty()) continue;
    Eigen::MatrixXd a(ds.n(), static_cast<Eigen::Index>(pa.size()) + 1);
    a.col(0).setOnes();
    for (std::size_t c = 0; c < pa.size(); ++c) a.col(static_cast<Eigen::Index>(c) + 1) = ds.x.col(pa[c]);
    const Eigen::VectorXd beta = a.colPivHouseholderQr().solve(ds.x.col(j));
    for (std::size_t c = 0; c < pa.size(); ++c) {
      const double w = ds.truth_weights->w(pa[c], j);
      EXPECT_NEAR(beta(static_cast<Eigen::Index>(c) + 1), w, 0.05);
      EXPECT_GE(std::abs(w), 0.5);
      EXPECT_LE(std::abs(w), 2.0);
    }
  }
}

TEST(LinearGumbel, ChainEndsIndependentGivenMiddle) {
  Graph g(3, GraphKind::DAG);
  g.add_directed(0, 1);
  g.add_directed(1, 2);
  SplitMix64 rng(2);
  const Dataset ds = sample_linear_gumbel(g, 20000, SemSpec{}, rng);
  Eigen::MatrixXd xc = ds.x.rowwise() - ds.x.colwise().mean();
  const Eigen::MatrixXd prec = (xc.transpose() * xc).inverse();
  const double pcor = -prec(0, 2) / std::sqrt(prec(0, 0) * prec(2, 2));
  EXPECT_LT(std::abs(pcor), 0.03);
}

TEST(NonlinearGp, RootIsStandardNormalAndChildIsNonlinear) {
  Graph g(2, GraphKind::DAG);
  g.add_directed(0, 1);
  SplitMix64 rng(3);
  const Dataset ds = sample_nonlinear_gp(g, 1000, SemSpec{SemKind::NonlinearGp}, rng);
  const double d = ks_distance(column(ds, 0), [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  EXPECT_LT(d, 1.36 / std::sqrt(1000.0));
  // The child depends on its parent: binned means vary far beyond noise.
  std::vector<double> sum(4, 0.0), cnt(4, 0.0);
  for (int r = 0; r < ds.n(); ++r) {
    const int bin = std::clamp(static_cast<int>((ds.x(r, 0) + 2.0)), 0, 3);
    sum[bin] += ds.x(r, 1);
    cnt[bin] += 1;
  }
  double lo = INFINITY, hi = -INFINITY;
  for (int b = 0; b < 4; ++b) {
    lo = std::min(lo, sum[b] / cnt[b]);
    hi = std::max(hi, sum[b] / cnt[b]);
  }
  EXPECT_GT(hi - lo, 0.3);
}

TEST(Sem, SeededDeterminism) {
  SplitMix64 grng(8);
  const Graph g = random_dag_er(5, 1.0, grng);
  for (auto kind : {SemKind::LinearGumbel, SemKind::NonlinearGp}) {
    SplitMix64 a(17), b(17);
    const Dataset x = sample_sem(g, 200, SemSpec{kind}, a);
    const Dataset y = sample_sem(g, 200, SemSpec{kind}, b);
    EXPECT_TRUE(x.x == y.x);
    EXPECT_EQ(*x.truth, g);
  }
}

TEST(Sem, Errors) {
  Graph cyc(2, GraphKind::MIXED);
  cyc.add_directed(0, 1);
  Graph cyc3(3, GraphKind::MIXED);
  cyc3.add_directed(0, 1);
  cyc3.add_directed(1, 2);
  cyc3.add_directed(2, 0);
  SplitMix64 rng(0);
  EXPECT_THROW(sample_linear_gumbel(cyc3, 10, SemSpec{}, rng), ContractError);
  EXPECT_THROW(sample_nonlinear_gp(cyc3, 10, SemSpec{SemKind::NonlinearGp}, rng), ContractError);
  EXPECT_THROW(sample_nonlinear_gp(cyc, kMaxGpSamples + 1, SemSpec{SemKind::NonlinearGp}, rng), ContractError);
  SemSpec bad;
  bad.weight_lo = 3.0;
  EXPECT_THROW(sample_linear_gumbel(cyc, 10, bad, rng), ConfigError);
}
