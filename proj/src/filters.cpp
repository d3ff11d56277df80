#include "augmentor/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "augmentor/random.hpp"

namespace augmentor {

namespace {

constexpr std::uint64_t kDetectionStream = 0xdec7;

std::vector<Index> range_indices(Index n) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

DataMatrix pooled(const DataMatrix& target, const std::vector<DataMatrix>& sources) {
  std::vector<const DataMatrix*> parts{&target};
  for (const auto& s : sources) {
    if (s.n_predictors() != target.n_predictors()) {
      throw std::invalid_argument("source and target predictor dimensions differ");
    }
    parts.push_back(&s);
  }
  return DataMatrix::vstack(parts);
}

// Draws ceil(rho * n) rows without replacement, in draw order.
DataMatrix sample_ratio(const DataMatrix& data, double rho, Rng& rng) {
  auto idx = range_indices(data.rows());
  rng.shuffle(idx);
  const auto want = static_cast<Index>(std::ceil(rho * static_cast<double>(data.rows()) - 1e-9));
  idx.resize(static_cast<std::size_t>(std::clamp<Index>(want, 1, data.rows())));
  return data.select_rows(idx);
}

// Random split into (fit, holdout) with one fifth held out.
std::pair<DataMatrix, DataMatrix> holdout_split(const DataMatrix& data, Rng& rng) {
  auto idx = range_indices(data.rows());
  rng.shuffle(idx);
  const Index hold = std::max<Index>(1, data.rows() / 5);
  if (data.rows() - hold < 2) throw std::invalid_argument("target too small for a validation split");
  const std::vector<Index> fit_rows(idx.begin() + hold, idx.end());
  const std::vector<Index> hold_rows(idx.begin(), idx.begin() + hold);
  return {data.select_rows(fit_rows), data.select_rows(hold_rows)};
}

double mse_on(const FitResult& fit, const DataMatrix& data) {
  return evaluate(fit, data.predictors(), data.response()).mse;
}

std::vector<std::pair<double, Index>> ranked(const std::vector<double>& distances) {
  std::vector<std::pair<double, Index>> order;
  order.reserve(distances.size());
  for (std::size_t i = 0; i < distances.size(); ++i) order.emplace_back(distances[i], static_cast<Index>(i));
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<double> knn_scores(const SampleSet& originals, const SampleSet& candidates, int knn) {
  const Index m = originals.size();
  const auto k = static_cast<std::size_t>(std::min<Index>(std::max(knn, 1), m));
  std::vector<double> out(static_cast<std::size_t>(candidates.size()));
  std::vector<double> d(static_cast<std::size_t>(m));
  for (Index c = 0; c < candidates.size(); ++c) {
    for (Index i = 0; i < m; ++i) {
      d[static_cast<std::size_t>(i)] = (originals.points().row(i) - candidates.points().row(c)).norm();
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    out[static_cast<std::size_t>(c)] =
        std::accumulate(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), 0.0) / static_cast<double>(k);
  }
  return out;
}

std::vector<double> paired_scores(const SampleSet& originals, const SampleSet& candidates,
                                  const std::vector<Index>& pairing) {
  if (static_cast<Index>(pairing.size()) != candidates.size()) {
    throw std::invalid_argument("pairing must name one original per candidate");
  }
  std::vector<double> out(pairing.size());
  const Index q = candidates.dims();
  std::vector<double> a(static_cast<std::size_t>(q));
  std::vector<double> b(static_cast<std::size_t>(q));
  for (std::size_t c = 0; c < pairing.size(); ++c) {
    const Index o = pairing[c];
    if (o < 0 || o >= originals.size()) throw std::invalid_argument("pairing index out of range");
    for (Index k = 0; k < q; ++k) {
      a[static_cast<std::size_t>(k)] = candidates.points()(static_cast<Index>(c), k);
      b[static_cast<std::size_t>(k)] = originals.points()(o, k);
    }
    out[c] = w1_1d(a, b);
  }
  return out;
}

// Biased MMD^2 between O and O + {c}, from the kernel row sums of O.
std::vector<double> mmd_scores(const SampleSet& originals, const SampleSet& candidates, double bandwidth) {
  const double sigma = bandwidth > 0.0 ? bandwidth : median_heuristic_bandwidth(originals, originals);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const Matrix& o = originals.points();
  const Index m = o.rows();
  double s = 0.0;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) s += std::exp(-(o.row(i) - o.row(j)).squaredNorm() * inv);
  const auto md = static_cast<double>(m);
  std::vector<double> out(static_cast<std::size_t>(candidates.size()));
  for (Index c = 0; c < candidates.size(); ++c) {
    double kc = 0.0;
    for (Index i = 0; i < m; ++i) kc += std::exp(-(o.row(i) - candidates.points().row(c)).squaredNorm() * inv);
    const double kaa = s / (md * md);
    const double kbb = (s + 2.0 * kc + 1.0) / ((md + 1.0) * (md + 1.0));
    const double kab = (s + kc) / (md * (md + 1.0));
    out[static_cast<std::size_t>(c)] = std::max(0.0, kaa + kbb - 2.0 * kab);
  }
  return out;
}

std::vector<double> tv_scores(const SampleSet& originals, const SampleSet& candidates,
                              const FilterOptions& options) {
  const Index m = originals.size();
  Matrix with(m + 1, originals.dims());
  with.topRows(m) = originals.points();
  std::vector<double> out(static_cast<std::size_t>(candidates.size()));
  for (Index c = 0; c < candidates.size(); ++c) {
    with.row(m) = candidates.points().row(c);
    out[static_cast<std::size_t>(c)] =
        tv_hist(originals, SampleSet(with), options.tv_bins, options.n_projections, options.seed);
  }
  return out;
}

}  // namespace

void TransferConfig::validate() const {
  if (ratio_set.empty()) throw std::invalid_argument("ratio_set must not be empty");
  for (const double r : ratio_set) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("ratios must lie in (0, 1]");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(detection_c0 > 0.0)) throw std::invalid_argument("detection_c0 must be positive");
  if (!(validation_factor > 0.0)) throw std::invalid_argument("validation_factor must be positive");
}

DetectionResult detect_transferable(const DataMatrix& target, const std::vector<DataMatrix>& sources,
                                    Family family, double c0, const CvOptions& cv) {
  DetectionResult result;
  if (sources.empty()) return result;
  if (target.rows() < 2 * cv.folds) {
    throw std::invalid_argument("target needs at least 2 * folds rows for source detection");
  }
  const auto folds = fold_assignment(target.rows(), cv.folds, derive_seed(cv.seed, {kDetectionStream}));
  std::vector<double> base(static_cast<std::size_t>(cv.folds));
  std::vector<std::vector<double>> per_source(sources.size(), std::vector<double>(static_cast<std::size_t>(cv.folds)));
  for (int f = 0; f < cv.folds; ++f) {
    std::vector<Index> train;
    std::vector<Index> valid;
    for (Index i = 0; i < target.rows(); ++i) (folds[static_cast<std::size_t>(i)] == f ? valid : train).push_back(i);
    const DataMatrix t_train = target.select_rows(train);
    const DataMatrix t_valid = target.select_rows(valid);
    const Matrix xv = t_valid.predictors();
    const Vector yv = t_valid.response();
    base[static_cast<std::size_t>(f)] =
        prediction_loss(fit_cv(t_train.predictors(), t_train.response(), family, cv).fit, xv, yv);
    // Scored on the pooled transferring step: the correction step would absorb
    // the bias of any source and make the comparison vacuous.
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const DataMatrix all = pooled(t_train, {sources[k]});
      const FitResult fit = fit_cv(all.predictors(), all.response(), family, cv).fit;
      per_source[k][static_cast<std::size_t>(f)] = prediction_loss(fit, xv, yv);
    }
  }
  const auto n = static_cast<double>(cv.folds);
  result.baseline_loss = std::accumulate(base.begin(), base.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : base) ss += (v - result.baseline_loss) * (v - result.baseline_loss);
  result.baseline_sd = std::sqrt(ss / (n - 1.0));
  for (const auto& losses : per_source) {
    const double lk = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
    result.source_loss.push_back(lk);
    result.mask.push_back(lk <= result.baseline_loss + c0 * result.baseline_sd);
  }
  return result;
}

FitResult two_step_transfer_fit(const DataMatrix& target, const std::vector<DataMatrix>& sources,
                                Family family, const CvOptions& cv) {
  const Matrix x = target.predictors();
  const Vector y = target.response();
  if (sources.empty()) return fit_cv(x, y, family, cv).fit;

  const DataMatrix all = pooled(target, sources);
  const FitResult transfer = fit_cv(all.predictors(), all.response(), family, cv).fit;
  const Vector offset = transfer.linear_predictor(x);
  const FitResult correction = fit_cv(x, y, family, cv, &offset).fit;

  FitResult fit;
  fit.family = family;
  fit.coefficients = transfer.coefficients + correction.coefficients;
  fit.intercept = transfer.intercept + correction.intercept;
  fit.lambda = correction.lambda;
  fit.iterations = transfer.iterations + correction.iterations;
  fit.converged = transfer.converged && correction.converged;
  return fit;
}

double adaptability(const FitResult& a, const FitResult& b) {
  const double na = a.coefficients.norm();
  const double nb = b.coefficients.norm();
  return (a.coefficients - b.coefficients).norm() / (1.0 + std::min(na, nb));
}

std::vector<DataMatrix> batch_split(const DataMatrix& data, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  const Index b = batch_size;
  if (data.rows() <= b) return {data};
  std::vector<DataMatrix> out;
  for (Index start = 0; start + b <= data.rows(); start += b) {
    std::vector<Index> rows(static_cast<std::size_t>(b));
    std::iota(rows.begin(), rows.end(), start);
    out.push_back(data.select_rows(rows));
  }
  return out;
}

SelectReport dual_source_select(const DataMatrix& s1, const DataMatrix& s2, const DataMatrix& t1,
                                const DataMatrix& t2, const DataMatrix& d_test,
                                const TransferConfig& config) {
  config.validate();
  const Index d = t1.n_predictors();
  for (const auto* m : {&s1, &s2, &t2, &d_test}) {
    if (m->n_predictors() != d) throw std::invalid_argument("all inputs must share predictor dimension");
  }
  const Matrix x_test = d_test.predictors();
  const Vector y_test = d_test.response();

  SelectReport report;
  const DataMatrix targets = DataMatrix::vstack({&t1, &t2});
  const FitResult baseline = fit_cv(targets.predictors(), targets.response(), config.family, config.cv).fit;
  report.baseline_error = evaluate(baseline, x_test, y_test).mse;
  const double limit = config.validation_factor * report.baseline_error;

  for (std::size_t r = 0; r < config.ratio_set.size(); ++r) {
    const double rho = config.ratio_set[r];
    RhoSummary summary;
    summary.rho = rho;
    double error_sum = 0.0;
    double adapt_sum = 0.0;
    for (int k = 0; k < config.iterations; ++k) {
      Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(k)}));
      const DataMatrix sub1 = sample_ratio(s1, rho, rng);
      const DataMatrix sub2 = sample_ratio(s2, rho, rng);
      const auto batches1 = batch_split(sub1, config.batch_size);
      const auto batches2 = batch_split(sub2, config.batch_size);
      const auto [t2_fit, t2_hold] = holdout_split(t2, rng);
      const auto [t1_fit, t1_hold] = holdout_split(t1, rng);

      const FitResult f12 = two_step_transfer_fit(t2_fit, batches1, config.family, config.cv);
      const FitResult f21 = two_step_transfer_fit(t1_fit, batches2, config.family, config.cv);

      IterationRecord rec;
      rec.rho = rho;
      rec.iteration = k;
      rec.valid = mse_on(f12, t2_hold) <= limit && mse_on(f21, t1_hold) <= limit;
      if (rec.valid) {
        const Vector combined = 0.5 * (f12.predict(x_test) + f21.predict(x_test));
        rec.error = (combined - y_test).squaredNorm() / static_cast<double>(y_test.size());
        rec.adaptability = adaptability(f12, f21);
        error_sum += rec.error;
        adapt_sum += rec.adaptability;
        ++summary.n_valid_iterations;
      }
      report.trace.push_back(rec);
    }
    if (summary.n_valid_iterations > 0) {
      summary.mean_error = error_sum / summary.n_valid_iterations;
      summary.mean_adaptability = adapt_sum / summary.n_valid_iterations;
    } else {
      summary.mean_error = std::numeric_limits<double>::quiet_NaN();
      summary.mean_adaptability = std::numeric_limits<double>::quiet_NaN();
    }
    report.per_rho.push_back(summary);
  }

  const RhoSummary* best = nullptr;
  for (const auto& s : report.per_rho) {
    if (s.n_valid_iterations < 1) continue;
    if (!best || s.mean_error < best->mean_error) best = &s;
  }
  if (!best) throw SelectionFailed("no sampling ratio produced a valid iteration");
  report.rho_star = best->rho;
  return report;
}

std::string to_string(DistanceMetric metric) {
  switch (metric) {
    case DistanceMetric::wasserstein: return "wasserstein";
    case DistanceMetric::mmd: return "mmd";
    case DistanceMetric::tv: return "tv";
  }
  return "wasserstein";
}

DistanceMetric metric_from_string(const std::string& name) {
  if (name == "wasserstein") return DistanceMetric::wasserstein;
  if (name == "mmd") return DistanceMetric::mmd;
  if (name == "tv") return DistanceMetric::tv;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

void FilterPolicy::validate() const {
  if (kind == Kind::quantile && !(value > 0.0 && value <= 1.0)) {
    throw std::invalid_argument("quantile must lie in (0, 1]");
  }
  if (kind == Kind::threshold && !(value >= 0.0)) {
    throw std::invalid_argument("threshold must be >= 0");
  }
}

FilterReport filter_candidates(const SampleSet& originals, const SampleSet& candidates,
                               DistanceMetric metric, const FilterPolicy& policy,
                               const std::vector<Index>* pairing, const FilterOptions& options) {
  policy.validate();
  if (originals.dims() != candidates.dims()) {
    throw std::invalid_argument("originals and candidates differ in feature dimension");
  }
  FilterReport report;
  report.policy = policy;
  report.metric = metric;
  switch (metric) {
    case DistanceMetric::wasserstein:
      report.distances = pairing ? paired_scores(originals, candidates, *pairing)
                                 : knn_scores(originals, candidates, options.knn);
      break;
    case DistanceMetric::mmd:
      report.distances = mmd_scores(originals, candidates, options.bandwidth);
      break;
    case DistanceMetric::tv:
      report.distances = tv_scores(originals, candidates, options);
      break;
  }

  const auto order = ranked(report.distances);
  std::size_t keep = 0;
  if (policy.kind == FilterPolicy::Kind::quantile) {
    const double want = std::ceil(policy.value * static_cast<double>(order.size()) - 1e-9);
    keep = std::min(order.size(), static_cast<std::size_t>(std::max(0.0, want)));
  } else {
    while (keep < order.size() && order[keep].first <= policy.value) ++keep;
  }
  for (std::size_t i = 0; i < keep; ++i) report.retained_indices.push_back(order[i].second);
  std::sort(report.retained_indices.begin(), report.retained_indices.end());
  return report;
}

AugmentedTable augment(const DataMatrix& original, const DataMatrix& candidates,
                       const std::vector<Index>& retained_indices) {
  if (!original.same_schema(candidates)) throw std::invalid_argument("augment: schema mismatch");
  std::vector<bool> flags(static_cast<std::size_t>(original.rows()), true);
  if (retained_indices.empty()) return {original, flags};
  auto rows = retained_indices;
  std::sort(rows.begin(), rows.end());
  const DataMatrix kept = candidates.select_rows(rows);
  flags.resize(flags.size() + rows.size(), false);
  return {DataMatrix::vstack({&original, &kept}), std::move(flags)};
}

AugmentedImages augment(const std::vector<GrayImage>& original,
                        const std::vector<GrayImage>& candidates,
                        const std::vector<Index>& retained_indices) {
  AugmentedImages out{original, std::vector<bool>(original.size(), true)};
  auto rows = retained_indices;
  std::sort(rows.begin(), rows.end());
  for (const Index i : rows) {
    const auto& img = candidates.at(static_cast<std::size_t>(i));
    if (!original.empty() &&
        (img.height() != original.front().height() || img.width() != original.front().width())) {
      throw std::invalid_argument("augment: image dimensions differ");
    }
    out.images.push_back(img);
    out.is_original.push_back(false);
  }
  return out;
}

}  // namespace augmentor
