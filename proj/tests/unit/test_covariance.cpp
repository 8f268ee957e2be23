#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "volrank/covariance.hpp"
#include "volrank/errors.hpp"

using namespace volrank;

namespace {

Eigen::MatrixXd random_returns(Eigen::Index n, Eigen::Index t, std::mt19937_64& rng, double missing = 0.0) {
  std::normal_distribution<double> z(0.0, 0.01);
  std::bernoulli_distribution drop(missing);
  Eigen::MatrixXd x(n, t);
  Eigen::VectorXd common(t);
  for (Eigen::Index d = 0; d < t; ++d) common(d) = z(rng);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < t; ++d) x(i, d) = drop(rng) ? kMissing : 0.5 * common(d) + z(rng);
  }
  return x;
}

Eigen::MatrixXd random_correlation(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd g(n, n + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n + 2; ++j) g(i, j) = z(rng);
  }
  Eigen::MatrixXd s = g * g.transpose();
  const Eigen::VectorXd d = s.diagonal().cwiseSqrt().cwiseInverse();
  s = d.asDiagonal() * s * d.asDiagonal();
  s.diagonal().setOnes();
  return s;
}

// Random symmetric unit-diagonal matrix with off-diagonal entries in (-1, 1)
// that is indefinite.
Eigen::MatrixXd indefinite_unit_diagonal(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      a(i, i) = 1.0;
      for (Eigen::Index j = 0; j < i; ++j) a(i, j) = a(j, i) = u(rng);
    }
    if (min_eigenvalue(a) < -1e-3) return a;
  }
}

}  // namespace

TEST(SampleVariance, SkipsMissingAndNeedsTwo) {
  Eigen::RowVectorXd x(4);
  x << 1.0, kMissing, 3.0, 5.0;
  EXPECT_DOUBLE_EQ(sample_variance(x), 4.0);
  Eigen::RowVectorXd one(2);
  one << kMissing, 2.0;
  EXPECT_EQ(sample_variance(one), 0.0);
}

TEST(PairwiseCov, FullyObservedEqualsSampleCovariance) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = random_returns(2 + trial, 30 + trial, rng);
    const CovEstimate est = pairwise_cov(x);
    EXPECT_LT((est.cov - oracle::sample_cov(x)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(est.estimable.all());
    EXPECT_FALSE(est.repaired);
  }
}

TEST(PairwiseCov, MissingDataMatchesLoopOracle) {
  std::mt19937_64 rng(2);
  for (double missing : {0.1, 0.4, 0.8}) {
    const Eigen::MatrixXd x = random_returns(12, 25, rng, missing);
    const CovEstimate est = pairwise_cov(x);
    const Eigen::MatrixXd expected = oracle::pairwise_cov(x);
    EXPECT_LT((est.cov - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE((est.cov - est.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST(PairwiseCov, ZeroOverlapIsZeroAndNotEstimable) {
  Eigen::MatrixXd x(2, 6);
  x << 0.01, 0.02, -0.01, kMissing, kMissing, kMissing,  //
      kMissing, kMissing, kMissing, 0.03, 0.01, -0.02;
  const CovEstimate est = pairwise_cov(x);
  EXPECT_EQ(est.cov(0, 1), 0.0);
  EXPECT_EQ(est.cov(1, 0), 0.0);
  EXPECT_FALSE(est.estimable(0, 1));
  EXPECT_TRUE(est.estimable(0, 0));
  EXPECT_GT(est.cov(0, 0), 0.0);
}

TEST(PairwiseCov, OneCommonDayIsNotEnough) {
  Eigen::MatrixXd x(2, 3);
  x << 0.01, 0.02, kMissing,  //
      kMissing, 0.03, 0.01;
  const CovEstimate est = pairwise_cov(x);
  EXPECT_EQ(est.cov(0, 1), 0.0);
  EXPECT_FALSE(est.estimable(0, 1));
}

TEST(PairwiseCov, CopyHasUnitCorrelation) {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x = random_returns(2, 40, rng);
  x.row(1) = x.row(0);
  const CovEstimate est = pairwise_cov(x);
  EXPECT_NEAR(est.corr(0, 1), 1.0, 1e-14);
}

TEST(PairwiseCov, PanelRowsOverload) {
  std::mt19937_64 rng(4);
  ReturnPanel p;
  p.companies = {"a", "b", "c", "d"};
  p.values = random_returns(4, 20, rng, 0.2);
  const std::size_t rows[] = {3, 1};
  const CovEstimate est = pairwise_cov(p, rows);
  Eigen::MatrixXd sub(2, 20);
  sub.row(0) = p.values.row(3);
  sub.row(1) = p.values.row(1);
  EXPECT_LT((est.cov - oracle::pairwise_cov(sub)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Decompose, Examples) {
  const Decomposition d = decompose(Eigen::Vector2d(4.0, 9.0).asDiagonal());
  EXPECT_DOUBLE_EQ(d.stdevs(0), 2.0);
  EXPECT_DOUBLE_EQ(d.stdevs(1), 3.0);
  EXPECT_TRUE(d.corr.isIdentity());

  Eigen::Matrix2d c;
  c << 1.0, 0.5, 0.5, 1.0;
  EXPECT_TRUE(decompose(c).corr.isApprox(c));

  Eigen::Matrix2d zero;
  zero << 0.0, 0.0, 0.0, 2.0;
  const Decomposition z = decompose(zero);
  EXPECT_EQ(z.corr(0, 0), 0.0);
  EXPECT_EQ(z.corr(1, 1), 1.0);

  Eigen::Matrix2d neg;
  neg << -1.0, 0.0, 0.0, 1.0;
  EXPECT_THROW(decompose(neg), std::invalid_argument);
}

TEST(Decompose, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = random_returns(6, 50, rng, 0.1);
    const CovEstimate est = pairwise_cov(x);
    const Decomposition d = decompose(est.cov);
    EXPECT_LT((recompose(d.stdevs, d.corr) - est.cov).cwiseAbs().maxCoeff(), 1e-16);
    EXPECT_LT((recompose(est.stdevs, est.corr) - est.cov).cwiseAbs().maxCoeff(), 1e-16);
  }
}

TEST(NearestPd, IdentityAndPdMatricesUnchanged) {
  const NearestPdResult id = nearest_pd(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_FALSE(id.repaired);
  EXPECT_TRUE(id.matrix == Eigen::MatrixXd::Identity(4, 4));
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd c = random_correlation(8, rng);
    const NearestPdResult r = nearest_pd(c);
    EXPECT_FALSE(r.repaired);
    EXPECT_TRUE(r.matrix == c);
  }
}

TEST(NearestPd, TwoByTwoMatchesAlternatingProjectionOracle) {
  Eigen::Matrix2d a;
  a << 1.0, 1.2, 1.2, 1.0;
  const NearestPdResult r = nearest_pd(a);
  EXPECT_TRUE(r.repaired);
  EXPECT_GE(min_eigenvalue(r.matrix), -1e-8);
  EXPECT_EQ(r.matrix(0, 0), 1.0);
  EXPECT_EQ(r.matrix(1, 1), 1.0);
  const Eigen::MatrixXd expected = oracle::nearest_correlation(a, 1e-13);
  EXPECT_LT((r.matrix - expected).cwiseAbs().maxCoeff(), 1e-8);
  // The nearest correlation matrix here is the all-ones matrix.
  EXPECT_NEAR(r.matrix(0, 1), 1.0, 1e-8);
}

TEST(NearestPd, RandomIndefiniteMatchesOracle) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::MatrixXd a = indefinite_unit_diagonal(6, rng);
    const NearestPdResult r = nearest_pd(a);
    const Eigen::MatrixXd expected = oracle::nearest_correlation(a, 1e-13);
    EXPECT_LT((r.matrix - expected).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_GE(min_eigenvalue(r.matrix), -1e-8);
    EXPECT_TRUE((r.matrix.diagonal().array() == 1.0).all());
  }
}

TEST(NearestPd, IdempotentAndUnitDiagonal) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd a = indefinite_unit_diagonal(10, rng);
    const NearestPdResult once = nearest_pd(a);
    EXPECT_GE(min_eigenvalue(once.matrix), -1e-8);
    EXPECT_TRUE((once.matrix.diagonal().array() == 1.0).all());
    EXPECT_TRUE(once.matrix.isApprox(once.matrix.transpose(), 0.0) || (once.matrix - once.matrix.transpose()).norm() == 0.0);
    const NearestPdResult twice = nearest_pd(once.matrix);
    EXPECT_FALSE(twice.repaired);
    EXPECT_LT((twice.matrix - once.matrix).norm(), 1e-8);
  }
}

TEST(NearestPd, FrobeniusOptimalAgainstRandomCorrelationMatrices) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = indefinite_unit_diagonal(3, rng);
    const NearestPdResult r = nearest_pd(a);
    const double best = (a - r.matrix).norm();
    for (int b = 0; b < 1000; ++b) {
      const Eigen::MatrixXd candidate = random_correlation(3, rng);
      EXPECT_LE(best, (a - candidate).norm() + 1e-9);
    }
  }
}

TEST(NearestPd, ClippingModeForGeneralMatrices) {
  std::mt19937_64 rng(10);
  NearestPdOptions o;
  o.unit_diagonal = false;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a = oracle::random_symmetric(7, rng);
    if (min_eigenvalue(a) >= 0) a.diagonal().array() -= 5.0;
    const NearestPdResult r = nearest_pd(a, o);
    EXPECT_TRUE(r.repaired);
    EXPECT_LT((r.matrix - oracle::clip_psd(a)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(NearestPd, NonConvergenceReportsIterations) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd a = indefinite_unit_diagonal(10, rng);
  NearestPdOptions o;
  o.max_iterations = 2;
  try {
    nearest_pd(a, o);
    FAIL() << "expected NearestPdError";
  } catch (const NearestPdError& e) {
    EXPECT_EQ(e.iterations(), 2);
  }
}

TEST(NearestPd, RepairInPlaceKeepsStdevsAndZeroRows) {
  std::mt19937_64 rng(12);
  Eigen::MatrixXd x = random_returns(30, 8, rng, 0.3);
  x.row(4).setConstant(kMissing);
  CovEstimate est = pairwise_cov(x);
  ASSERT_LT(min_eigenvalue(est.corr.bottomRightCorner(25, 25)), -1e-8);
  const Eigen::VectorXd stdevs = est.stdevs;
  repair_in_place(est);
  EXPECT_TRUE(est.repaired);
  EXPECT_TRUE(est.stdevs == stdevs);
  EXPECT_EQ(est.cov.row(4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(est.corr(4, 4), 0.0);
  EXPECT_GE(min_eigenvalue(est.corr), -1e-8);
  EXPECT_LT((recompose(est.stdevs, est.corr) - est.cov).cwiseAbs().maxCoeff(), 1e-18);
}
