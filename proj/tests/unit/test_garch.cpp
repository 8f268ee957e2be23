#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "volrank/garch.hpp"

using namespace volrank;

namespace {

double sample_var(const std::vector<double>& r) {
  const double m = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
  double s = 0;
  for (double v : r) s += (v - m) * (v - m);
  return s / static_cast<double>(r.size() - 1);
}

void expect_feasible(const GarchFit& f) {
  if (!f.converged()) return;
  EXPECT_GT(f.omega, 0.0);
  EXPECT_GE(f.alpha, 0.0);
  EXPECT_GE(f.beta, 0.0);
  EXPECT_LT(f.alpha + f.beta, 1.0);
  EXPECT_GT(f.latest_var, 0.0);
}

}  // namespace

TEST(Garch, ShortHistoryFallsBack) {
  const std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 50, 1);
  const GarchFit f = fit_garch(r);
  EXPECT_EQ(f.status, GarchStatus::fallback_short_history);
  EXPECT_NEAR(f.latest_var, sample_var(r), 1e-18);
}

TEST(Garch, MissingEntriesAreDropped) {
  std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 99, 2);
  std::vector<double> padded = r;
  padded.insert(padded.begin() + 10, 5, std::nan(""));
  const GarchFit f = fit_garch(padded);
  EXPECT_EQ(f.status, GarchStatus::fallback_short_history);
  EXPECT_NEAR(f.latest_var, sample_var(r), 1e-18);
}

TEST(Garch, ConstantSeriesFallsBackToZero) {
  const std::vector<double> r(300, 0.001);
  const GarchFit f = fit_garch(r);
  EXPECT_FALSE(f.converged());
  EXPECT_EQ(f.latest_var, 0.0);
}

TEST(Garch, LikelihoodMatchesOracle) {
  const std::vector<double> r = oracle::simulate_garch(2e-4, 2e-6, 0.1, 0.85, 400, 3);
  const double h1 = sample_var(r);
  for (const auto& [a, b] : {std::pair{0.1, 0.85}, std::pair{0.0, 0.0}, std::pair{0.3, 0.2}}) {
    const double omega = 1e-6 + 1e-5 * (1 - a - b);
    const double expected = oracle::garch_loglik(r, 1e-4, omega, a, b);
    EXPECT_NEAR(garch_log_likelihood(r, 1e-4, omega, a, b, h1), expected, 1e-9 * std::abs(expected));
  }
}

TEST(Garch, VariancePathFollowsRecursion) {
  const std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 200, 4);
  const std::vector<double> h = garch_variance_path(r, 1e-4, 2e-6, 0.07, 0.9, 3e-5);
  ASSERT_EQ(h.size(), r.size());
  EXPECT_EQ(h[0], 3e-5);
  double prev = 3e-5;
  for (std::size_t t = 1; t < r.size(); ++t) {
    const double e = r[t - 1] - 1e-4;
    const double next = 2e-6 + 0.07 * e * e + 0.9 * prev;
    EXPECT_NEAR(h[t], next, 1e-12 * next);
    prev = next;
  }
}

TEST(Garch, FitIsFeasibleAndBeatsNaivePoint) {
  for (std::uint64_t seed = 10; seed < 16; ++seed) {
    const std::vector<double> r = oracle::simulate_garch(1e-4, 1e-6, 0.08, 0.9, 750, seed);
    const GarchFit f = fit_garch(r);
    ASSERT_TRUE(f.converged()) << to_string(f.status);
    expect_feasible(f);
    const double m = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    const double v = sample_var(r);
    EXPECT_GE(f.log_likelihood, oracle::garch_loglik(r, m, v, 0.0, 0.0) - 1e-9);
    EXPECT_NEAR(f.log_likelihood, oracle::garch_loglik(r, f.mu, f.omega, f.alpha, f.beta), 1e-8);
    EXPECT_EQ(f.observations, r.size());
  }
}

TEST(Garch, LatestVarReproducedByForwardRecursion) {
  const std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 750, 30);
  const GarchFit f = fit_garch(r);
  ASSERT_TRUE(f.converged());
  double h = sample_var(r);
  for (std::size_t t = 1; t < r.size(); ++t) {
    const double e = r[t - 1] - f.mu;
    h = f.omega + f.alpha * e * e + f.beta * h;
  }
  EXPECT_NEAR(f.latest_var, h, 1e-10 * h);
}

TEST(Garch, RecoversPersistence) {
  double err = 0.0;
  const int seeds = 4;
  for (int s = 0; s < seeds; ++s) {
    const std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 2500, 100 + s);
    const GarchFit f = fit_garch(r);
    ASSERT_TRUE(f.converged());
    err += std::abs(f.alpha + f.beta - 0.98);
  }
  EXPECT_LT(err / seeds, 0.03);
}

TEST(Garch, MatchesReferenceOptimum) {
  const std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 750, 40);
  const GarchFit f = fit_garch(r);
  const oracle::GarchEstimate ref = oracle::fit_garch_reference(r);
  const double ref_ll = oracle::garch_loglik(r, ref.mu, ref.omega, ref.alpha, ref.beta);
  // Both are maximisers of the same likelihood; ours must be at least as good
  // up to optimiser tolerance.
  EXPECT_GE(f.log_likelihood, ref_ll - 1e-4);
  EXPECT_NEAR(f.alpha + f.beta, ref.alpha + ref.beta, 0.01);
}

TEST(Garch, ScaleEquivariant) {
  const std::vector<double> r = oracle::simulate_garch(1e-4, 1e-6, 0.1, 0.85, 750, 50);
  std::vector<double> scaled(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) scaled[i] = 10.0 * r[i];
  const GarchFit a = fit_garch(r);
  const GarchFit b = fit_garch(scaled);
  ASSERT_TRUE(a.converged());
  ASSERT_TRUE(b.converged());
  EXPECT_NEAR(b.alpha, a.alpha, 1e-9);
  EXPECT_NEAR(b.beta, a.beta, 1e-9);
  EXPECT_NEAR(b.omega, 100.0 * a.omega, 1e-9 * b.omega);
  EXPECT_NEAR(b.latest_var, 100.0 * a.latest_var, 1e-9 * b.latest_var);
}

TEST(Garch, ConstantVarianceMatchesClosedForm) {
  std::mt19937_64 rng(60);
  std::normal_distribution<double> z(3e-4, 0.01);
  std::vector<double> r(500);
  for (double& v : r) v = z(rng);
  GarchOptions o;
  o.constant_variance = true;
  const GarchFit f = fit_garch(r, o);
  ASSERT_TRUE(f.converged());
  EXPECT_EQ(f.alpha, 0.0);
  EXPECT_EQ(f.beta, 0.0);
  // h_1 is pinned to the sample variance, so the first day only enters the
  // mean, with weight 1/h_1; omega is the mean square deviation of the rest.
  const double n = static_cast<double>(r.size());
  const double h1 = sample_var(r);
  double mu = std::accumulate(r.begin(), r.end(), 0.0) / n;
  double omega = h1;
  for (int it = 0; it < 200; ++it) {
    double num = r[0] / h1, den = 1.0 / h1;
    for (std::size_t t = 1; t < r.size(); ++t) {
      num += r[t] / omega;
      den += 1.0 / omega;
    }
    mu = num / den;
    omega = 0;
    for (std::size_t t = 1; t < r.size(); ++t) omega += (r[t] - mu) * (r[t] - mu);
    omega /= n - 1;
  }
  EXPECT_NEAR(f.mu, mu, 1e-6 * 0.01);
  EXPECT_NEAR(f.omega, omega, 1e-5 * omega);
}

TEST(Garch, IidSeriesLatestVarNearTruth) {
  const double var = 1e-4;
  int within = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(200 + s);
    std::normal_distribution<double> z(0.0, std::sqrt(var));
    std::vector<double> r(750);
    for (double& v : r) v = z(rng);
    const GarchFit f = fit_garch(r);
    expect_feasible(f);
    if (std::abs(f.latest_var / var - 1.0) <= 0.25) ++within;
  }
  EXPECT_GE(within, 18);
}

TEST(GarchDiagonal, FallbacksUseNaiveVariances) {
  Eigen::MatrixXd history(3, 80);
  std::mt19937_64 rng(70);
  std::normal_distribution<double> z(0.0, 0.01);
  for (Eigen::Index i = 0; i < history.size(); ++i) history(i) = z(rng);
  history.row(2).setConstant(std::nan(""));
  const Eigen::Vector3d naive(4e-4, 9e-4, 0.0);
  const GarchDiagonal d = garch_stdev_diagonal(history, naive);
  ASSERT_EQ(d.fits.size(), 3u);
  for (const auto& f : d.fits) EXPECT_EQ(f.status, GarchStatus::fallback_short_history);
  EXPECT_DOUBLE_EQ(d.stdevs(0), 0.02);
  EXPECT_DOUBLE_EQ(d.stdevs(1), 0.03);
  EXPECT_EQ(d.stdevs(2), 0.0);
}

TEST(GarchDiagonal, ConvergedRowsUseLatestVariance) {
  Eigen::MatrixXd history(2, 600);
  for (int k = 0; k < 2; ++k) {
    const std::vector<double> r = oracle::simulate_garch(0.0, 1e-6, 0.08, 0.9, 600, 80 + k);
    for (int t = 0; t < 600; ++t) history(k, t) = r[t];
  }
  const GarchDiagonal d = garch_stdev_diagonal(history, Eigen::Vector2d(1.0, 1.0), {}, 2);
  for (int k = 0; k < 2; ++k) {
    ASSERT_TRUE(d.fits[k].converged());
    EXPECT_DOUBLE_EQ(d.stdevs(k), std::sqrt(d.fits[k].latest_var));
  }
}
