#include "augmentor/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "augmentor/png_io.hpp"
#include "augmentor/random.hpp"
#include "augmentor/remote_client.hpp"
#include "augmentor/serialization.hpp"
#include "augmentor/simulate.hpp"

namespace augmentor {

namespace {

// Stream tags for derive_seed; one per random consumer inside a repetition.
enum Stream : std::uint64_t {
  kData = 1,
  kTestSplit,
  kSelectionSplit,
  kGenerate,
  kTransferSelect,
  kTransferCv,
  kTransferSample,
  kBound,
  kDraw,
  kModelCv,
  kFilter,
};

struct Rep {
  RepetitionSummary summary;
  std::vector<std::optional<double>> errors;
  std::vector<std::string> warnings;
  std::optional<SelectReport> select;
  std::optional<DetectionResult> det1;
  std::optional<DetectionResult> det2;
  std::optional<FilterReport> filter;
  std::optional<BoundReport> bound;
};

Family family_of(ModelKind model) {
  return model == ModelKind::logistic ? Family::logistic : Family::linear;
}

FitResult fit_model(ModelKind model, const DataMatrix& train, std::uint64_t seed) {
  const Matrix x = train.predictors();
  const Vector y = train.response();
  if (model == ModelKind::ols) return fit_ols(x, y);
  CvOptions cv;
  cv.seed = seed;
  return fit_cv(x, y, family_of(model), cv).fit;
}

double test_error(const FitResult& fit, const DataMatrix& test) {
  return evaluate(fit, test.predictors(), test.response()).mse;
}

DataMatrix load_source(const RunConfig& config, const DataMatrix* csv, std::uint64_t seed) {
  const auto& d = config.data_source;
  if (d.kind == DataSourceConfig::Kind::csv) return *csv;
  Vector beta = Vector::Zero(d.p);
  for (std::size_t j = 0; j < d.beta.size(); ++j) beta(static_cast<Index>(j)) = d.beta[j];
  if (d.kind == DataSourceConfig::Kind::simulate_linear) return simulate_linear(d.n, beta, d.noise_sd, seed);
  return simulate_logistic(d.n, beta, seed);
}

DataMatrix decode_generated(const GrayImage& image, const CodecManifest& manifest, bool binarize,
                            DecodeWarnings& warnings) {
  DataMatrix out = decode(image, manifest, &warnings);
  if (!binarize) return out;
  // Class labels come from the raw pixel against 0.5.
  Matrix values = out.values();
  const Index r = out.response_col();
  for (Index i = 0; i < values.rows(); ++i) values(i, r) = image.pixels()(i, r) > 0.5 ? 1.0 : 0.0;
  return DataMatrix(std::move(values), r, out.column_names());
}

struct Side {
  DataMatrix pool;
  std::vector<GrayImage> images;
};

class Generator {
 public:
  Generator(const RunConfig& config, std::vector<std::string>& warnings) : config_(config) {
    if (config.generator.kind != Backend::remote) return;
    RemoteOptions opts;
    opts.endpoint = config.generator.endpoint;
    opts.timeout_seconds = config.generator.timeout_seconds;
    opts.max_in_flight = config.generator.max_in_flight;
    remote_.emplace(opts);
    try {
      const auto status = remote_->health();
      if (!status.ready()) throw GeneratorUnavailable("service reports '" + status.status + "'");
    } catch (const GeneratorError& e) {
      if (!config.generator.fallback_to_surrogate) throw;
      warnings.push_back(std::string("remote generator unavailable, using surrogate: ") + e.what());
      remote_.reset();
      fell_back_ = true;
    }
  }

  std::vector<GrayImage> run(const std::vector<GenRequest>& requests, bool& used_fallback) const {
    used_fallback = fell_back_;
    if (remote_) {
      try {
        std::vector<GrayImage> out;
        for (auto& r : remote_->generate_batch(requests)) out.push_back(std::move(r.image));
        return out;
      } catch (const GeneratorError&) {
        if (!config_.generator.fallback_to_surrogate) throw;
        used_fallback = true;
      }
    }
    std::vector<GrayImage> out;
    out.reserve(requests.size());
    for (const auto& r : requests) out.push_back(generate_surrogate(r).image);
    return out;
  }

 private:
  const RunConfig& config_;
  std::optional<RemoteGenerator> remote_;
  bool fell_back_ = false;
};

Side generate_side(const RunConfig& config, const Generator& generator, const Encoded& encoded,
                   const std::vector<double>& grid, std::uint64_t rep_seed, std::uint64_t side,
                   Rep& rep) {
  std::vector<GenRequest> requests;
  requests.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    GenRequest req;
    req.image = encoded.image;
    req.prompt = config.prompt;
    req.strength = grid[k];
    req.guidance_scale = config.guidance_scale;
    req.seed = derive_seed(rep_seed, {kGenerate, side, k});
    requests.push_back(std::move(req));
  }
  bool fallback = false;
  Side out;
  out.images = generator.run(requests, fallback);
  rep.summary.used_fallback = rep.summary.used_fallback || fallback;

  const bool binarize = config.model == ModelKind::logistic;
  DecodeWarnings warnings;
  std::vector<DataMatrix> decoded;
  decoded.reserve(out.images.size());
  for (const auto& img : out.images) decoded.push_back(decode_generated(img, encoded.manifest, binarize, warnings));
  std::vector<const DataMatrix*> parts;
  for (const auto& d : decoded) parts.push_back(&d);
  out.pool = DataMatrix::vstack(parts);
  rep.summary.clamped_pixels += warnings.clamped_pixels;
  rep.summary.log_underflow_cells += warnings.log_underflow_cells;
  return out;
}

DataMatrix sample_rows(const DataMatrix& data, double rho, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(data.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  rng.shuffle(idx);
  const auto want = static_cast<Index>(std::ceil(rho * static_cast<double>(data.rows()) - 1e-9));
  idx.resize(static_cast<std::size_t>(std::clamp<Index>(want, 1, data.rows())));
  return data.select_rows(idx);
}

std::optional<DataMatrix> stack(const std::vector<const DataMatrix*>& parts) {
  if (parts.empty()) return std::nullopt;
  return DataMatrix::vstack(parts);
}

std::optional<DataMatrix> transfer_filter(const RunConfig& config, const DataMatrix& s1, const DataMatrix& s2,
                                          const DataMatrix& v1, const DataMatrix& v2,
                                          const DataMatrix& selection, std::uint64_t rep_seed, Rep& rep) {
  TransferConfig tc = config.filter.transfer;
  tc.family = family_of(config.model);
  tc.seed = derive_seed(rep_seed, {kTransferSelect});
  tc.cv.seed = derive_seed(rep_seed, {kTransferCv});
  SelectReport report;
  try {
    report = dual_source_select(s1, s2, v1, v2, selection, tc);
  } catch (const SelectionFailed& e) {
    rep.warnings.push_back(std::string("transfer selection failed: ") + e.what());
    return std::nullopt;
  }
  const double rho = report.rho_star;
  rep.select = std::move(report);

  std::vector<DataMatrix> kept;
  const DataMatrix* sources[2] = {&s1, &s2};
  const DataMatrix* targets[2] = {&v2, &v1};
  for (std::uint64_t side = 0; side < 2; ++side) {
    Rng rng(derive_seed(rep_seed, {kTransferSample, side}));
    auto batches = batch_split(sample_rows(*sources[side], rho, rng), tc.batch_size);
    auto det = detect_transferable(*targets[side], batches, tc.family, tc.detection_c0, tc.cv);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (det.mask[b]) kept.push_back(std::move(batches[b]));
    }
    (side == 0 ? rep.det1 : rep.det2) = std::move(det);
  }
  std::vector<const DataMatrix*> parts;
  for (const auto& k : kept) parts.push_back(&k);
  return stack(parts);
}

std::optional<DataMatrix> distance_filter(const RunConfig& config, const DataMatrix& originals,
                                          const DataMatrix& candidates, std::uint64_t rep_seed, Rep& rep) {
  const Vector mean = originals.values().colwise().mean().transpose();
  Vector scale(originals.cols());
  for (Index j = 0; j < originals.cols(); ++j) {
    const double sd = std::sqrt((originals.values().col(j).array() - mean(j)).square().mean());
    scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  auto standardized = [&](const DataMatrix& d) {
    Matrix z = d.values().rowwise() - mean.transpose();
    z.array().rowwise() /= scale.transpose().array();
    return SampleSet(std::move(z));
  };
  FilterOptions options = config.filter.options;
  options.seed = derive_seed(rep_seed, {kFilter});
  auto report = filter_candidates(standardized(originals), standardized(candidates), config.filter.metric,
                                  config.filter.policy, nullptr, options);
  std::optional<DataMatrix> pool;
  if (!report.retained_indices.empty()) pool = candidates.select_rows(report.retained_indices);
  rep.filter = std::move(report);
  return pool;
}

BoundReport pool_bound(const DataMatrix& originals, const DataMatrix& pool, std::uint64_t seed) {
  const Vector y = originals.response();
  const double mu = y.mean();
  const double sd = std::sqrt((y.array() - mu).square().mean());
  const double spread = sd > 1e-12 ? sd : 1.0;
  const LossSpec loss = LossSpec::make(LossKind::absolute_linear, -mu, 1.0, 3.0 * spread);
  std::vector<LossSpec> grid;
  for (int t = -4; t <= 4; ++t) {
    grid.push_back(LossSpec::make(LossKind::absolute_linear, -mu + 0.25 * t * spread, 1.0, 3.0 * spread));
  }
  const Vector ys = pool.response();
  return theorem_bound_check(SampleSet(Matrix(y)), SampleSet(Matrix(ys)), loss, grid, 0.05, seed, 200);
}

void write_artifacts(const std::string& dir, const Encoded& e1, const Encoded& e2, const Side& g1,
                     const Side& g2) {
  std::filesystem::create_directories(dir);
  const std::pair<const Encoded*, const Side*> sides[2] = {{&e1, &g1}, {&e2, &g2}};
  for (int s = 0; s < 2; ++s) {
    const std::string stem = dir + "/V" + std::to_string(s + 1);
    write_png(sides[s].first->image, stem + ".png");
    write_manifest(sides[s].first->manifest, stem + ".png.manifest.json");
    for (std::size_t k = 0; k < sides[s].second->images.size(); ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "/gen_V%d_k%04zu.png", s + 1, k);
      write_png(sides[s].second->images[k], dir + name);
    }
  }
}

Rep run_repetition(const RunConfig& config, int index, const DataMatrix* csv, const Generator& generator,
                   const std::vector<double>& grid, const PipelineHooks& hooks, std::mutex& audit_mutex) {
  const std::uint64_t rep_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(index)});
  auto audit = [&](const char* stage, const DataMatrix& rows) {
    if (!hooks.audit) return;
    const std::lock_guard<std::mutex> lock(audit_mutex);
    hooks.audit(stage, rows);
  };
  Rep rep;
  const DataMatrix data = load_source(config, csv, derive_seed(rep_seed, {kData}));
  auto [test, train] = partition(data, config.test_fraction, derive_seed(rep_seed, {kTestSplit}), true);
  audit("evaluate", test);

  const bool transfer = config.filter.kind == FilterConfig::Kind::transfer;
  DataMatrix selection;
  DataMatrix encoded_rows = train;
  if (transfer) {
    auto split = partition(train, config.selection_fraction, derive_seed(rep_seed, {kSelectionSplit}), true);
    selection = std::move(split.first);
    encoded_rows = std::move(split.second);
    audit("select", selection);
  }
  auto [v1, v2] = partition(encoded_rows, 0.5, 0, false);
  audit("encode", v1);
  audit("encode", v2);

  const Encoded e1 = encode(v1, config.mapping);
  const Encoded e2 = encode(v2, config.mapping);
  const Side g1 = generate_side(config, generator, e1, grid, rep_seed, 0, rep);
  const Side g2 = generate_side(config, generator, e2, grid, rep_seed, 1, rep);
  if (index == 0 && !hooks.artifact_dir.empty()) write_artifacts(hooks.artifact_dir, e1, e2, g1, g2);
  rep.summary.generated_rows = g1.pool.rows() + g2.pool.rows();

  std::optional<DataMatrix> pool;
  switch (config.filter.kind) {
    case FilterConfig::Kind::transfer:
      pool = transfer_filter(config, g1.pool, g2.pool, v1, v2, selection, rep_seed, rep);
      break;
    case FilterConfig::Kind::distance:
      pool = distance_filter(config, train, DataMatrix::vstack({&g1.pool, &g2.pool}), rep_seed, rep);
      break;
    case FilterConfig::Kind::none:
      pool = DataMatrix::vstack({&g1.pool, &g2.pool});
      break;
  }
  rep.summary.pool_size = pool ? pool->rows() : 0;
  if (pool && index == 0) rep.bound = pool_bound(train, *pool, derive_seed(rep_seed, {kBound}));

  const std::uint64_t cv_seed = derive_seed(rep_seed, {kModelCv});
  audit("fit", train);
  rep.summary.baseline_error = test_error(fit_model(config.model, train, cv_seed), test);

  std::vector<Index> order;
  if (pool) {
    order.resize(static_cast<std::size_t>(pool->rows()));
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(rep_seed, {kDraw}));
    rng.shuffle(order);
  }
  for (const Index size : config.augmentation_sizes) {
    if (size == 0) {
      rep.errors.emplace_back(rep.summary.baseline_error);
      continue;
    }
    if (!pool) {
      rep.errors.emplace_back(std::nullopt);
      continue;
    }
    Index take = size;
    if (take > pool->rows()) {
      take = pool->rows();
      rep.warnings.push_back("repetition " + std::to_string(index) + ": size " + std::to_string(size) +
                             " capped at pool size " + std::to_string(take));
    }
    const DataMatrix drawn = pool->select_rows({order.begin(), order.begin() + take});
    const DataMatrix augmented = DataMatrix::vstack({&train, &drawn});
    audit("fit", augmented);
    rep.errors.emplace_back(test_error(fit_model(config.model, augmented, cv_seed), test));
  }
  return rep;
}

std::pair<double, double> mean_and_se(const std::vector<double>& values) {
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const auto n = static_cast<double>(values.size());
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ols: return "ols";
    case ModelKind::lasso: return "lasso";
    case ModelKind::logistic: return "logistic";
  }
  return "ols";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "ols") return ModelKind::ols;
  if (name == "lasso") return ModelKind::lasso;
  if (name == "logistic") return ModelKind::logistic;
  throw std::invalid_argument("unknown model '" + name + "'");
}

void RunConfig::validate() const {
  const auto& d = data_source;
  if (d.kind == DataSourceConfig::Kind::csv) {
    if (d.path.empty()) throw std::invalid_argument("csv data_source needs a path");
  } else {
    if (d.n < 4) throw std::invalid_argument("data_source.n must be >= 4");
    if (d.p < 1 || static_cast<Index>(d.beta.size()) > d.p) {
      throw std::invalid_argument("data_source.beta longer than p");
    }
    if (!(d.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  }
  if (d.kind == DataSourceConfig::Kind::simulate_logistic && model != ModelKind::logistic) {
    throw std::invalid_argument("simulate_logistic data needs the logistic model");
  }
  if (mapping.quantization_bits != 0 && mapping.quantization_bits != 8) {
    throw std::invalid_argument("quantization_bits must be 0 or 8");
  }
  if (!(mapping.exp_coefficient > 0.0)) throw std::invalid_argument("exp_coefficient must be positive");
  if (generator.kind == Backend::remote && generator.endpoint.empty()) {
    throw std::invalid_argument("remote generator needs an endpoint");
  }
  if (generator.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
  augmentor::strength_grid(strength_grid.start, strength_grid.stop, strength_grid.step);
  if (!(guidance_scale > 0.0)) throw std::invalid_argument("guidance_scale must be positive");
  if (filter.kind == FilterConfig::Kind::transfer) filter.transfer.validate();
  filter.policy.validate();
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (augmentation_sizes.empty()) throw std::invalid_argument("augmentation_sizes must not be empty");
  for (std::size_t i = 0; i < augmentation_sizes.size(); ++i) {
    if (augmentation_sizes[i] < 0) throw std::invalid_argument("augmentation sizes must be >= 0");
    if (i > 0 && augmentation_sizes[i] < augmentation_sizes[i - 1]) {
      throw std::invalid_argument("augmentation_sizes must be non-decreasing");
    }
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
  if (!(selection_fraction > 0.0 && selection_fraction < 1.0)) {
    throw std::invalid_argument("selection_fraction must lie in (0, 1)");
  }
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

std::string library_version() { return "0.1.0"; }

RunManifest run_pipeline(const RunConfig& config, const PipelineHooks& hooks) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.config_echo = config;
  manifest.version = library_version();

  std::optional<DataMatrix> csv;
  if (config.data_source.kind == DataSourceConfig::Kind::csv) {
    csv = read_csv(config.data_source.path, config.data_source.response_col);
    if (config.model == ModelKind::logistic) binarize_response(*csv);  // validates labels lie in [0, 1]
  }
  const auto grid = strength_grid(config.strength_grid.start, config.strength_grid.stop, config.strength_grid.step);
  const Generator generator(config, manifest.warnings);

  const int reps = config.repetitions;
  std::vector<Rep> results(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(reps));
  std::mutex audit_mutex;
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] =
            run_repetition(config, i, csv ? &*csv : nullptr, generator, grid, hooks, audit_mutex);
      } catch (...) {
        failures[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int n_threads = std::min(reps, config.threads > 0 ? config.threads : hw);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::vector<double> baselines;
  for (const auto& r : results) {
    baselines.push_back(r.summary.baseline_error);
    manifest.repetitions.push_back(r.summary);
    manifest.warnings.insert(manifest.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  std::tie(manifest.baseline_error, manifest.baseline_std_error) = mean_and_se(baselines);

  for (std::size_t s = 0; s < config.augmentation_sizes.size(); ++s) {
    CurvePoint point;
    point.augmentation_size = config.augmentation_sizes[s];
    std::vector<double> values;
    for (const auto& r : results) {
      if (r.errors[s]) values.push_back(*r.errors[s]);
    }
    point.n_repetitions = static_cast<int>(values.size());
    if (!values.empty()) {
      const auto [mean, se] = mean_and_se(values);
      point.mean_error = mean;
      point.std_error = se;
    }
    manifest.per_size_curve.push_back(point);
  }

  Rep& first = results.front();
  manifest.select_report = std::move(first.select);
  manifest.detection_side1 = std::move(first.det1);
  manifest.detection_side2 = std::move(first.det2);
  manifest.filter_report = std::move(first.filter);
  manifest.bound_report = first.bound;

  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return manifest;
}

bool all_pools_empty(const RunManifest& manifest) {
  bool any_positive = false;
  for (const auto& p : manifest.per_size_curve) {
    if (p.augmentation_size == 0) continue;
    any_positive = true;
    if (p.mean_error) return false;
  }
  return any_positive;
}

void emit_curve(const RunManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  out << "size,mean_error,std_error,baseline\n";
  for (const auto& p : manifest.per_size_curve) {
    out << p.augmentation_size << ',' << fmt(p.mean_error) << ',' << fmt(p.std_error) << ','
        << fmt(manifest.baseline_error) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace augmentor
