#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "loopsoup/partitions.hpp"

using namespace loopsoup;

TEST(BetaTheta, MomentIdentities) {
  for (double theta : {0.5, 1.0, 2.0, 5.0}) {
    Rng rng(41);
    const int n = 200000;
    double s2 = 0.0, c1 = 0.0, c2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_beta_theta(theta, rng);
      ASSERT_GE(x, 0.0);
      ASSERT_LT(x, 1.0 + 1e-15);
      s2 += x * x;
      s4 += x * x * x * x;
      c1 += 1.0 - x;
      c2 += (1.0 - x) * (1.0 - x);
    }
    const double m2 = s2 / n;
    const double se2 = std::sqrt((s4 / n - m2 * m2) / n);
    EXPECT_LE(z_score(m2, beta_second_moment(theta), se2), 3.0) << theta;
    EXPECT_NEAR(c1 / n, beta_complement_mean(theta), 0.005) << theta;
    EXPECT_NEAR(c2 / n, beta_complement_second_moment(theta), 0.005) << theta;
  }
  Rng rng(1);
  EXPECT_THROW(sample_beta_theta(0.0, rng), std::invalid_argument);
}

// Kolmogorov-Smirnov against P(X <= s) = 1 - (1-s)^theta at theta = 1.
TEST(BetaTheta, UniformAtThetaOne) {
  Rng rng(42);
  std::vector<double> xs(20000);
  for (double& x : xs) x = sample_beta_theta(1.0, rng);
  std::sort(xs.begin(), xs.end());
  double d = 0.0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    d = std::max({d, std::abs((i + 1) / n - xs[i]), std::abs(xs[i] - i / n)});
  EXPECT_LT(d, 1.63 / std::sqrt(n));  // 1% critical value
}

TEST(Gem, ResidualMeanDecaysGeometrically) {
  const double theta = 2.0;
  for (std::size_t k : {1u, 3u, 6u}) {
    Rng rng(43);
    double sum = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) sum += sample_gem(theta, k, rng).residual;
    EXPECT_NEAR(sum / n, std::pow(theta / (theta + 1.0), static_cast<double>(k)), 0.01) << k;
  }
}

TEST(Gem, WeightsAndResidualSumToOne) {
  Rng rng(44);
  for (int i = 0; i < 100; ++i) {
    const auto p = sample_gem(1.5, 50, rng);
    double s = p.residual;
    for (double w : p.weights) s += w;
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_FALSE(p.sorted);
  }
  EXPECT_THROW(sample_gem(1.0, 0, rng), std::invalid_argument);
}

TEST(Pd, SortedDescending) {
  Rng rng(45);
  const auto p = sample_pd(1.0, 100, rng);
  EXPECT_TRUE(p.sorted);
  EXPECT_TRUE(std::is_sorted(p.weights.begin(), p.weights.end(), std::greater<>()));
}

TEST(SameElement, SeriesAndClosedForm) {
  for (double theta : {0.5, 1.0, 2.0, 5.0})
    EXPECT_NEAR(same_element_series(theta, 2000), analytic_same_element(theta), 1e-12) << theta;
  EXPECT_DOUBLE_EQ(analytic_same_element(1.0), 0.5);
  EXPECT_NEAR(analytic_same_element(2.0), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(analytic_same_element(-1.0), std::invalid_argument);
}

TEST(SameElement, MonteCarloOnGem) {
  for (double theta : {1.0, 2.0}) {
    Rng rng(46);
    BatchMeans acc;
    for (int i = 0; i < 100000; ++i) {
      const auto p = sample_gem(theta, 4000, rng);
      EXPECT_LE(same_element_residual_bound(p), 1e-12);
      acc.add(same_element_probability(p));
    }
    EXPECT_NEAR(acc.mean(), analytic_same_element(theta), 0.01) << theta;
  }
}

TEST(SplitMerge, InvariantSameElement) {
  for (double theta : {1.0, 2.0}) {
    Rng rng(47);
    const auto r = split_merge_same_element(SplitMergeRates{theta, 1.0}, 20000, 400000, 10, rng);
    EXPECT_NEAR(r.mean, 1.0 / (theta + 1.0), 0.02) << theta;
  }
}

TEST(SplitMerge, ZeroStepsAndValidation) {
  Rng rng(48);
  const std::vector<double> start{0.5, 0.3, 0.2};
  EXPECT_EQ(split_merge_reference_chain(start, {1.0, 1.0}, 0, rng), start);
  EXPECT_THROW(split_merge_reference_chain(start, {0.0, 1.0}, 1, rng), std::invalid_argument);
  EXPECT_THROW(split_merge_reference_chain({0.5, 0.4}, {1.0, 1.0}, 1, rng), std::invalid_argument);
  EXPECT_THROW(split_merge_reference_chain({}, {1.0, 1.0}, 1, rng), std::invalid_argument);
}

TEST(SplitMerge, MassIsConserved) {
  Rng rng(49);
  split_merge_reference_chain({1.0}, {2.0, 1.0}, 10000, rng, [](std::span<const double> parts) {
    double s = 0.0;
    for (double w : parts) s += w;
    ASSERT_NEAR(s, 1.0, 1e-9);
  });
}
