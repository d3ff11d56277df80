#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augmentor/data_matrix.hpp"

namespace augmentor {

/// Empirical distribution: m points in q dimensions with optional weights.
/// Without weights every point carries mass 1/m.
class SampleSet {
 public:
  SampleSet() = default;
  explicit SampleSet(Matrix points, std::optional<Vector> weights = std::nullopt);

  /// One-dimensional sample (q = 1).
  static SampleSet from_values(std::span<const double> values);

  [[nodiscard]] const Matrix& points() const { return points_; }
  [[nodiscard]] const std::optional<Vector>& weights() const { return weights_; }
  [[nodiscard]] Index size() const { return points_.rows(); }
  [[nodiscard]] Index dims() const { return points_.cols(); }
  /// Mass of point i (1/m when unweighted).
  [[nodiscard]] double mass(Index i) const;

 private:
  Matrix points_;
  std::optional<Vector> weights_;
};

enum class MmdEstimator { biased, unbiased };

/// Exact Wasserstein-1 between two uniform empirical measures on the line.
double w1_1d(std::span<const double> a, std::span<const double> b);

/// Weighted variant: integral of |F_a^-1 - F_b^-1| over merged quantile breakpoints.
double w1_1d_weighted(std::span<const double> a, std::span<const double> a_mass,
                      std::span<const double> b, std::span<const double> b_mass);

/// Unit directions in R^q, one independent seeded stream per direction, so
/// direction l is the same no matter how many directions are requested.
Matrix projection_directions(Index q, int n_projections, std::uint64_t seed);

/// Sliced Wasserstein-1: mean of w1_1d over seeded random projections.
/// For q = 1 the projection is skipped and the result is w1_1d exactly.
double sliced_w1(const SampleSet& a, const SampleSet& b, int n_projections = 64,
                 std::uint64_t seed = 0);

/// Median pairwise Euclidean distance over the pooled points; 1.0 when the
/// median is 0.
double median_heuristic_bandwidth(const SampleSet& a, const SampleSet& b);

/// Squared MMD with Gaussian kernel exp(-|x-y|^2 / (2 sigma^2)). A bandwidth
/// <= 0 selects the median heuristic. The biased estimator is clamped at 0.
double mmd(const SampleSet& a, const SampleSet& b, double bandwidth = 0.0,
           MmdEstimator estimator = MmdEstimator::biased);

/// Total variation between equal-width histograms over the pooled range,
/// averaged over seeded projections (raw coordinate when q = 1).
double tv_hist(const SampleSet& a, const SampleSet& b, int bins = 32, int n_projections = 64,
               std::uint64_t seed = 0);

}  // namespace augmentor
