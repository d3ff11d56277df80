#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "augmentor/distances.hpp"
#include "oracles.hpp"

using namespace augmentor;

namespace {

SampleSet gaussian_cloud(Rng& rng, int n, int q, double shift = 0.0) {
  Matrix m(n, q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < q; ++j) m(i, j) = rng.normal() + (j == 0 ? shift : 0.0);
  return SampleSet(m);
}

SampleSet points_1d(std::initializer_list<double> v) { return SampleSet::from_values(std::vector<double>(v)); }

}  // namespace

TEST(W1, WorkedExamples) {
  EXPECT_DOUBLE_EQ(w1_1d(std::vector<double>{0}, std::vector<double>{1}), 1.0);
  EXPECT_DOUBLE_EQ(w1_1d(std::vector<double>{1, 2, 3}, std::vector<double>{2, 3, 4}), 1.0);
  const std::vector<double> a{0, 0, 10}, b{0, 5, 5};
  EXPECT_NEAR(w1_1d(a, b), 10.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle::w1_all_assignments(a, b), 10.0 / 3.0, 1e-12);
}

TEST(W1, MatchesAssignmentOracle) {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const int m = 1 + static_cast<int>(rng.below(8));
    const auto a = oracle::uniform_values(rng, m, -5, 5);
    const auto b = oracle::uniform_values(rng, m, -5, 5);
    EXPECT_NEAR(w1_1d(a, b), oracle::w1_all_assignments(a, b), 1e-9);
  }
}

TEST(W1, UnequalSizesMatchReplicatedOracle) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + static_cast<int>(rng.below(3));
    const int n = 1 + static_cast<int>(rng.below(3));
    const auto a = oracle::uniform_values(rng, m, -3, 3);
    const auto b = oracle::uniform_values(rng, n, -3, 3);
    // Each point of a repeated n times and of b repeated m times gives the
    // same two measures with m*n equal atoms.
    std::vector<double> ra, rb;
    for (const double x : a) ra.insert(ra.end(), static_cast<std::size_t>(n), x);
    for (const double y : b) rb.insert(rb.end(), static_cast<std::size_t>(m), y);
    EXPECT_NEAR(w1_1d(a, b), oracle::w1_all_assignments(ra, rb), 1e-9);
  }
}

TEST(W1, WeightedUniformEqualsUnweighted) {
  Rng rng(3);
  const auto a = oracle::uniform_values(rng, 7, 0, 1);
  const auto b = oracle::uniform_values(rng, 4, 0, 1);
  const std::vector<double> ma(7, 1.0 / 7), mb(4, 0.25);
  EXPECT_NEAR(w1_1d_weighted(a, ma, b, mb), w1_1d(a, b), 1e-12);
  const std::vector<double> x{0.0, 1.0}, mx{0.25, 0.75}, y{0.0}, my{1.0};
  EXPECT_NEAR(w1_1d_weighted(x, mx, y, my), 0.75, 1e-12);
}

TEST(W1, MetricProperties) {
  Rng rng(4);
  for (int t = 0; t < 500; ++t) {
    const auto a = oracle::uniform_values(rng, 1 + static_cast<int>(rng.below(9)), -2, 2);
    const auto b = oracle::uniform_values(rng, 1 + static_cast<int>(rng.below(9)), -2, 2);
    const auto c = oracle::uniform_values(rng, 1 + static_cast<int>(rng.below(9)), -2, 2);
    EXPECT_EQ(w1_1d(a, a), 0.0);
    EXPECT_NEAR(w1_1d(a, b), w1_1d(b, a), 1e-12);
    EXPECT_LE(w1_1d(a, c), w1_1d(a, b) + w1_1d(b, c) + 1e-9);
    auto sa = a, sb = b;
    for (auto& x : sa) x += 3.7;
    for (auto& x : sb) x += 3.7;
    EXPECT_NEAR(w1_1d(sa, sb), w1_1d(a, b), 1e-12);
  }
}

TEST(W1, RejectsNonFiniteAndEmpty) {
  EXPECT_THROW(w1_1d(std::vector<double>{}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(w1_1d(std::vector<double>{NAN}, std::vector<double>{1}), std::invalid_argument);
}

TEST(SlicedW1, IdentityAndSymmetry) {
  Rng rng(5);
  const auto a = gaussian_cloud(rng, 20, 3);
  const auto b = gaussian_cloud(rng, 15, 3);
  EXPECT_EQ(sliced_w1(a, a, 64, 1), 0.0);
  EXPECT_NEAR(sliced_w1(a, b, 64, 9), sliced_w1(b, a, 64, 9), 1e-12);
  EXPECT_EQ(sliced_w1(a, b, 64, 9), sliced_w1(a, b, 64, 9));
}

TEST(SlicedW1, OneDimensionIsExact) {
  const auto a = points_1d({0, 0, 10});
  const auto b = points_1d({0, 5, 5});
  EXPECT_EQ(sliced_w1(a, b, 64, 3), w1_1d(std::vector<double>{0, 0, 10}, std::vector<double>{0, 5, 5}));
}

TEST(SlicedW1, ShiftIsContracted) {
  Rng rng(6);
  const auto a = gaussian_cloud(rng, 30, 4);
  Vector c(4);
  c << 1.0, -2.0, 0.5, 0.0;
  const SampleSet b(a.points().rowwise() + c.transpose());
  const double d = sliced_w1(a, b, 128, 2);
  EXPECT_GE(d, 0.0);
  EXPECT_LE(d, c.norm() + 1e-12);

  const auto a1 = points_1d({0.5, 1.5, -2.0});
  const auto b1 = points_1d({2.0, 3.0, -0.5});
  EXPECT_NEAR(sliced_w1(a1, b1, 8, 0), 1.5, 1e-12);
}

TEST(SlicedW1, NeverExceedsExactW1) {
  Rng rng(7);
  for (int t = 0; t < 30; ++t) {
    const auto a = gaussian_cloud(rng, 10, 2);
    const auto b = gaussian_cloud(rng, 10, 2, 1.0);
    const double exact = oracle::w1_exact_points(a.points(), b.points());
    const double sliced = sliced_w1(a, b, 256, static_cast<std::uint64_t>(t));
    EXPECT_LE(sliced, exact + 1e-12);
    // Averaging |u.v| over the circle gives 2/pi of |v|.
    EXPECT_LE(sliced, 2.0 / std::numbers::pi * exact * 1.05);
  }
}

TEST(SlicedW1, DirectionsAreStablePrefixes) {
  const Matrix few = projection_directions(3, 4, 11);
  const Matrix many = projection_directions(3, 64, 11);
  EXPECT_EQ(few, many.leftCols(4));
  for (Index l = 0; l < many.cols(); ++l) EXPECT_NEAR(many.col(l).norm(), 1.0, 1e-12);
}

TEST(SlicedW1, RejectsDimensionMismatch) {
  Rng rng(8);
  EXPECT_THROW(sliced_w1(gaussian_cloud(rng, 3, 2), gaussian_cloud(rng, 3, 3)), std::invalid_argument);
}

TEST(Mmd, IdenticalSamplesBiasedIsZero) {
  Rng rng(9);
  const auto a = gaussian_cloud(rng, 25, 3);
  EXPECT_NEAR(mmd(a, a, 1.0, MmdEstimator::biased), 0.0, 1e-12);
  EXPECT_NEAR(mmd(a, a, 0.0, MmdEstimator::biased), 0.0, 1e-12);
}

TEST(Mmd, UnbiasedWorkedExample) {
  const auto a = points_1d({0, 1});
  const double expected = 2.0 * (std::exp(-0.5) - 1.0) / 2.0;
  EXPECT_NEAR(mmd(a, a, 1.0, MmdEstimator::unbiased), expected, 1e-12);
  EXPECT_NEAR(expected, -0.39347, 1e-5);
}

TEST(Mmd, MatchesDirectDoubleSum) {
  Rng rng(10);
  for (int t = 0; t < 100; ++t) {
    const int q = 1 + static_cast<int>(rng.below(4));
    const auto a = gaussian_cloud(rng, 2 + static_cast<int>(rng.below(10)), q);
    const auto b = gaussian_cloud(rng, 2 + static_cast<int>(rng.below(10)), q, 0.5);
    const double sigma = 0.3 + 2.0 * rng.uniform();
    EXPECT_NEAR(mmd(a, b, sigma, MmdEstimator::unbiased), oracle::mmd_direct(a.points(), b.points(), sigma, true), 1e-12);
    const double biased = mmd(a, b, sigma, MmdEstimator::biased);
    EXPECT_NEAR(biased, std::max(0.0, oracle::mmd_direct(a.points(), b.points(), sigma, false)), 1e-12);
    EXPECT_GE(biased, 0.0);
  }
}

TEST(Mmd, SeparatedClusters) {
  Rng rng(11);
  const auto a = gaussian_cloud(rng, 8, 2);
  const auto b = gaussian_cloud(rng, 12, 2, 1000.0);
  const double direct = oracle::mmd_direct(a.points(), b.points(), 1.0, false);
  const double got = mmd(a, b, 1.0, MmdEstimator::biased);
  EXPECT_NEAR(got, direct, 1e-12);
  EXPECT_GE(got, 0.9 * direct);
}

TEST(Mmd, MedianBandwidth) {
  const auto a = points_1d({0, 1});
  const auto b = points_1d({3});
  // pooled distances {1, 3, 2}: median 2
  EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(a, b), 2.0);
  EXPECT_DOUBLE_EQ(median_heuristic_bandwidth(points_1d({4, 4}), points_1d({4})), 1.0);
}

TEST(Mmd, RejectsBadInputs) {
  Rng rng(12);
  EXPECT_THROW(mmd(gaussian_cloud(rng, 3, 2), gaussian_cloud(rng, 3, 1)), std::invalid_argument);
  EXPECT_THROW(mmd(points_1d({1}), points_1d({1, 2}), 1.0, MmdEstimator::unbiased), std::invalid_argument);
}

TEST(Tv, HandHistogram) {
  EXPECT_DOUBLE_EQ(tv_hist(points_1d({0, 0, 1, 1}), points_1d({0, 1, 1, 1}), 2, 64, 0), 0.25);
}

TEST(Tv, IdentityDisjointAndSymmetry) {
  Rng rng(13);
  const auto a = gaussian_cloud(rng, 40, 2);
  const auto b = gaussian_cloud(rng, 30, 2, 0.7);
  EXPECT_NEAR(tv_hist(a, a, 32, 16, 1), 0.0, 1e-12);
  EXPECT_NEAR(tv_hist(a, b, 32, 16, 1), tv_hist(b, a, 32, 16, 1), 1e-12);
  EXPECT_DOUBLE_EQ(tv_hist(points_1d({0, 0.1, 0.2}), points_1d({5, 6}), 4, 1, 0), 1.0);
  const double d = tv_hist(a, b, 32, 16, 1);
  EXPECT_GE(d, 0.0);
  EXPECT_LE(d, 1.0);
}
