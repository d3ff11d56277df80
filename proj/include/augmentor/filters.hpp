#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augmentor/data_matrix.hpp"
#include "augmentor/distances.hpp"
#include "augmentor/models.hpp"
#include "augmentor/tabular_codec.hpp"

namespace augmentor {

// ---------------------------------------------------------------------------
// Transfer-learning selection
// ---------------------------------------------------------------------------

struct TransferConfig {
  std::vector<double> ratio_set{0.5};
  int batch_size = 50;
  int iterations = 100;
  double detection_c0 = 2.0;
  /// Kept for parity with high-dimensional runs; plays the same thresholding
  /// role as detection_c0 (see detect_transferable).
  double detection_delta0 = 2.0;
  double validation_factor = 1.25;
  std::uint64_t seed = 0;
  Family family = Family::linear;
  CvOptions cv;

  void validate() const;
};

struct DetectionResult {
  std::vector<bool> mask;
  double baseline_loss = 0.0;
  double baseline_sd = 0.0;
  std::vector<double> source_loss;
};

/// Cross-validated negative-transfer guard. With the target split into
/// cv.folds folds, L0 is the mean held-out loss of a target-only CV lasso
/// and sd0 its fold standard deviation; source k is transferable when the
/// held-out loss of the pooled (transferring-step) CV lasso on training folds
/// plus source k satisfies Lk <= L0 + c0 * sd0.
DetectionResult detect_transferable(const DataMatrix& target, const std::vector<DataMatrix>& sources,
                                    Family family, double c0, const CvOptions& cv = {});

/// Step 1: CV lasso on target + sources pooled gives w. Step 2: CV lasso on
/// the target alone with offset X w fits a correction d. Returns w + d.
/// With no sources this is exactly fit_cv(target).fit.
FitResult two_step_transfer_fit(const DataMatrix& target, const std::vector<DataMatrix>& sources,
                                Family family, const CvOptions& cv = {});

/// Normalized coefficient distance |b1 - b2| / (1 + min(|b1|, |b2|)).
double adaptability(const FitResult& a, const FitResult& b);

struct RhoSummary {
  double rho = 0.0;
  double mean_error = 0.0;
  double mean_adaptability = 0.0;
  int n_valid_iterations = 0;
};

struct IterationRecord {
  double rho = 0.0;
  int iteration = 0;
  bool valid = false;
  double error = 0.0;
  double adaptability = 0.0;
};

struct SelectReport {
  double rho_star = 0.0;
  std::vector<RhoSummary> per_rho;
  double baseline_error = 0.0;
  std::vector<IterationRecord> trace;
};

/// Thrown when no ratio produced a single valid iteration.
class SelectionFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dual-source selection of the source sampling ratio. Each iteration draws
/// ratio-rho subsets of both sources, splits them into batches of
/// batch_size, adapts a model to each target with the opposite source's
/// batches, validates each on a held-out fifth of its own target against
/// validation_factor * baseline, and scores the averaged prediction on
/// d_test. Iteration streams derive from (seed, ratio index, iteration).
SelectReport dual_source_select(const DataMatrix& s1, const DataMatrix& s2, const DataMatrix& t1,
                                const DataMatrix& t2, const DataMatrix& d_test,
                                const TransferConfig& config);

/// Splits rows into consecutive batches of `batch_size`, dropping an
/// incomplete tail unless it is the only batch.
std::vector<DataMatrix> batch_split(const DataMatrix& data, int batch_size);

// ---------------------------------------------------------------------------
// Distance filtering
// ---------------------------------------------------------------------------

enum class DistanceMetric { wasserstein, mmd, tv };

std::string to_string(DistanceMetric metric);
DistanceMetric metric_from_string(const std::string& name);

struct FilterPolicy {
  enum class Kind { quantile, threshold };
  Kind kind = Kind::quantile;
  /// Quantile q in (0, 1] or absolute threshold tau >= 0.
  double value = 0.8;

  void validate() const;
};

struct FilterOptions {
  /// Neighbours for set-mode Wasserstein scoring.
  int knn = 10;
  /// MMD bandwidth; <= 0 uses the median heuristic on the originals.
  double bandwidth = 0.0;
  int tv_bins = 32;
  int n_projections = 64;
  std::uint64_t seed = 0;
};

struct FilterReport {
  std::vector<Index> retained_indices;
  std::vector<double> distances;
  FilterPolicy policy;
  DistanceMetric metric = DistanceMetric::wasserstein;
};

/// Scores each candidate point against the originals and keeps the closest.
///   wasserstein, paired: w1_1d between the candidate's coordinates and its
///                        paired original's coordinates
///   wasserstein, set:    mean Euclidean distance to the knn nearest originals
///   mmd / tv:            distance between the originals and the originals
///                        with the candidate added
/// Quantile q keeps ceil(q N) candidates with the smallest distances (ties
/// to the lower index); a threshold keeps every distance <= tau.
/// retained_indices are ascending.
FilterReport filter_candidates(const SampleSet& originals, const SampleSet& candidates,
                               DistanceMetric metric, const FilterPolicy& policy,
                               const std::vector<Index>* pairing = nullptr,
                               const FilterOptions& options = {});

struct AugmentedTable {
  DataMatrix data;
  /// true for rows that came from the original table.
  std::vector<bool> is_original;
};

struct AugmentedImages {
  std::vector<GrayImage> images;
  std::vector<bool> is_original;
};

/// Originals first, then the retained candidates in ascending index order.
AugmentedTable augment(const DataMatrix& original, const DataMatrix& candidates,
                       const std::vector<Index>& retained_indices);
AugmentedImages augment(const std::vector<GrayImage>& original,
                        const std::vector<GrayImage>& candidates,
                        const std::vector<Index>& retained_indices);

}  // namespace augmentor
