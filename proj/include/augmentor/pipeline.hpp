#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "augmentor/bound_check.hpp"
#include "augmentor/features.hpp"
#include "augmentor/filters.hpp"
#include "augmentor/generators.hpp"
#include "augmentor/tabular_codec.hpp"

namespace augmentor {

struct DataSourceConfig {
  enum class Kind { simulate_linear, simulate_logistic, csv };
  Kind kind = Kind::simulate_linear;
  Index n = 100;
  Index p = 3;
  /// Leading coefficients; padded with zeros up to p.
  std::vector<double> beta{2.0, -1.0, 0.5};
  double noise_sd = 1.0;
  std::string path;
  int response_col = -1;
};

struct GeneratorConfig {
  Backend kind = Backend::surrogate;
  std::string endpoint;
  double timeout_seconds = 60.0;
  bool fallback_to_surrogate = false;
  int max_in_flight = 4;
};

struct GridConfig {
  double start = 0.001;
  double stop = 0.1;
  double step = 0.001;
};

struct FilterConfig {
  enum class Kind { transfer, distance, none };
  Kind kind = Kind::transfer;
  TransferConfig transfer;
  DistanceMetric metric = DistanceMetric::wasserstein;
  FilterPolicy policy;
  /// Image feature map; tabular rows are scored on standardized values.
  FeatureSpec feature;
  FilterOptions options;
};

enum class ModelKind { ols, lasso, logistic };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct RunConfig {
  DataSourceConfig data_source;
  EncodeOptions mapping;
  GeneratorConfig generator;
  std::string prompt =
      "Generate a grayscale image of tabular data. The last column is the response variable.";
  GridConfig strength_grid;
  double guidance_scale = 7.5;
  FilterConfig filter;
  ModelKind model = ModelKind::ols;
  int repetitions = 1;
  std::vector<Index> augmentation_sizes{0};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  double test_fraction = 0.2;
  /// Share of the training rows held out as the selection set for the
  /// transfer filter.
  double selection_fraction = 0.2;
  /// Worker threads for repetitions; 0 uses the hardware concurrency.
  int threads = 0;

  void validate() const;
};

struct CurvePoint {
  Index augmentation_size = 0;
  /// Empty when no repetition had a non-empty pool for this size.
  std::optional<double> mean_error;
  std::optional<double> std_error;
  int n_repetitions = 0;
};

struct RepetitionSummary {
  double baseline_error = 0.0;
  Index pool_size = 0;
  Index generated_rows = 0;
  std::size_t clamped_pixels = 0;
  std::size_t log_underflow_cells = 0;
  bool used_fallback = false;
};

struct RunManifest {
  RunConfig config_echo;
  std::vector<CurvePoint> per_size_curve;
  double baseline_error = 0.0;
  double baseline_std_error = 0.0;
  std::optional<SelectReport> select_report;
  std::optional<DetectionResult> detection_side1;
  std::optional<DetectionResult> detection_side2;
  std::optional<FilterReport> filter_report;
  std::optional<BoundReport> bound_report;
  std::vector<RepetitionSummary> repetitions;
  std::vector<std::string> warnings;
  double wall_clock_seconds = 0.0;
  std::string version;
};

/// True when the run asked for positive augmentation sizes and every one of
/// them came back empty.
bool all_pools_empty(const RunManifest& manifest);

struct PipelineHooks {
  /// Directory for intermediate PNGs of the first repetition; empty skips them.
  std::string artifact_dir;
  /// Receives every row handed to encode, generate, filter or fit, tagged
  /// with the stage name. Used to audit test-set isolation.
  std::function<void(const std::string& stage, const DataMatrix& rows)> audit;
};

/// load/simulate -> test split -> bisect -> encode -> generate over the
/// strength grid -> decode -> filter -> refit per augmentation size ->
/// aggregate over repetitions. Deterministic in (config, seed) apart from
/// wall_clock_seconds.
RunManifest run_pipeline(const RunConfig& config, const PipelineHooks& hooks = {});

/// Writes `size,mean_error,std_error,baseline` with 9 significant digits
/// and LF line endings; missing entries are written as NA.
void emit_curve(const RunManifest& manifest, const std::string& path);

std::string library_version();

}  // namespace augmentor
