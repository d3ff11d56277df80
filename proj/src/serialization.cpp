#include "augmentor/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace augmentor {

namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string kind_name(DataSourceConfig::Kind kind) {
  switch (kind) {
    case DataSourceConfig::Kind::simulate_linear: return "simulate_linear";
    case DataSourceConfig::Kind::simulate_logistic: return "simulate_logistic";
    case DataSourceConfig::Kind::csv: return "csv";
  }
  return "simulate_linear";
}

DataSourceConfig::Kind data_kind_from(const std::string& name) {
  if (name == "simulate_linear") return DataSourceConfig::Kind::simulate_linear;
  if (name == "simulate_logistic") return DataSourceConfig::Kind::simulate_logistic;
  if (name == "csv") return DataSourceConfig::Kind::csv;
  throw ConfigError("unknown data_source kind '" + name + "'");
}

std::string kind_name(FilterConfig::Kind kind) {
  switch (kind) {
    case FilterConfig::Kind::transfer: return "transfer";
    case FilterConfig::Kind::distance: return "distance";
    case FilterConfig::Kind::none: return "none";
  }
  return "transfer";
}

FilterConfig::Kind filter_kind_from(const std::string& name) {
  if (name == "transfer") return FilterConfig::Kind::transfer;
  if (name == "distance") return FilterConfig::Kind::distance;
  if (name == "none") return FilterConfig::Kind::none;
  throw ConfigError("unknown filter kind '" + name + "'");
}

Backend backend_from(const std::string& name) {
  if (name == "surrogate") return Backend::surrogate;
  if (name == "remote") return Backend::remote;
  throw ConfigError("unknown generator kind '" + name + "'");
}

Json cv_json(const CvOptions& cv) {
  return {{"folds", cv.folds}, {"n_lambda", cv.n_lambda}, {"min_ratio", cv.min_ratio}, {"seed", cv.seed}};
}

void cv_from(const Json& j, CvOptions& cv) {
  read_opt(j, "folds", cv.folds);
  read_opt(j, "n_lambda", cv.n_lambda);
  read_opt(j, "min_ratio", cv.min_ratio);
  read_opt(j, "seed", cv.seed);
}

}  // namespace

void to_json(Json& j, const CodecManifest& m) {
  Json cols = Json::array();
  for (const auto& c : m.per_column) cols.push_back({{"col_min", c.col_min}, {"col_max", c.col_max}});
  j = {{"mapping_kind", to_string(m.mapping_kind)},
       {"exp_coefficient", m.exp_coefficient},
       {"per_column", cols},
       {"quantization_bits", m.quantization_bits},
       {"layout", {{"rows", m.layout.rows}, {"cols", m.layout.cols}, {"response_col", m.layout.response_col}}}};
}

void from_json(const Json& j, CodecManifest& m) {
  m.mapping_kind = mapping_kind_from_string(j.at("mapping_kind").get<std::string>());
  m.exp_coefficient = j.at("exp_coefficient").get<double>();
  m.quantization_bits = j.at("quantization_bits").get<int>();
  m.per_column.clear();
  for (const auto& c : j.at("per_column")) {
    m.per_column.push_back({c.at("col_min").get<double>(), c.at("col_max").get<double>()});
  }
  const auto& layout = j.at("layout");
  m.layout = {layout.at("rows").get<Index>(), layout.at("cols").get<Index>(),
              layout.at("response_col").get<Index>()};
  if (static_cast<Index>(m.per_column.size()) != m.layout.cols) {
    throw std::invalid_argument("manifest per_column length differs from layout cols");
  }
  for (const auto& c : m.per_column) {
    if (c.col_max < c.col_min) throw std::invalid_argument("manifest column has col_max < col_min");
  }
  if (!(m.exp_coefficient > 0.0)) throw std::invalid_argument("manifest exp_coefficient must be positive");
}

void to_json(Json& j, const FitResult& f) {
  j = {{"family", to_string(f.family)},     {"coefficients", vector_json(f.coefficients)},
       {"intercept", f.intercept},          {"lambda", f.lambda},
       {"iterations", f.iterations},        {"converged", f.converged}};
}

void to_json(Json& j, const Metrics& m) {
  j = {{"mse", m.mse}, {"n_eval", m.n_eval}};
  j["misclassification_rate"] = m.misclassification_rate ? Json(*m.misclassification_rate) : Json(nullptr);
}

void to_json(Json& j, const SelectReport& r) {
  Json per = Json::array();
  for (const auto& s : r.per_rho) {
    per.push_back({{"rho", s.rho},
                   {"mean_error", number_or_null(s.mean_error)},
                   {"mean_adaptability", number_or_null(s.mean_adaptability)},
                   {"n_valid_iterations", s.n_valid_iterations}});
  }
  Json trace = Json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"rho", t.rho},
                     {"iteration", t.iteration},
                     {"valid", t.valid},
                     {"error", t.error},
                     {"adaptability", t.adaptability}});
  }
  j = {{"rho_star", r.rho_star}, {"per_rho", per}, {"baseline_error", r.baseline_error}, {"trace", trace}};
}

void to_json(Json& j, const DetectionResult& r) {
  j = {{"mask", r.mask},
       {"baseline_loss", r.baseline_loss},
       {"baseline_sd", r.baseline_sd},
       {"source_loss", r.source_loss}};
}

void to_json(Json& j, const FilterPolicy& p) {
  j = {{"kind", p.kind == FilterPolicy::Kind::quantile ? "quantile" : "threshold"}, {"value", p.value}};
}

void from_json(const Json& j, FilterPolicy& p) {
  std::string kind = p.kind == FilterPolicy::Kind::quantile ? "quantile" : "threshold";
  read_opt(j, "kind", kind);
  if (kind == "quantile") {
    p.kind = FilterPolicy::Kind::quantile;
  } else if (kind == "threshold") {
    p.kind = FilterPolicy::Kind::threshold;
  } else {
    throw ConfigError("unknown policy kind '" + kind + "'");
  }
  read_opt(j, "value", p.value);
}

void to_json(Json& j, const FilterReport& r) {
  j = {{"retained_indices", r.retained_indices},
       {"distances", r.distances},
       {"policy", r.policy},
       {"metric", to_string(r.metric)}};
}

void to_json(Json& j, const BoundReport& r) {
  j = {{"lhs", r.lhs},
       {"w1_term", r.w1_term},
       {"rademacher_term", r.rademacher_term},
       {"confidence_term", r.confidence_term},
       {"delta", r.delta},
       {"holds", r.holds}};
}

void to_json(Json& j, const TransferConfig& c) {
  j = {{"ratio_set", c.ratio_set},
       {"batch_size", c.batch_size},
       {"iterations", c.iterations},
       {"detection_c0", c.detection_c0},
       {"detection_delta0", c.detection_delta0},
       {"validation_factor", c.validation_factor},
       {"seed", c.seed},
       {"family", to_string(c.family)},
       {"cv", cv_json(c.cv)}};
}

void from_json(const Json& j, TransferConfig& c) {
  read_opt(j, "ratio_set", c.ratio_set);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "iterations", c.iterations);
  read_opt(j, "detection_c0", c.detection_c0);
  read_opt(j, "detection_delta0", c.detection_delta0);
  read_opt(j, "validation_factor", c.validation_factor);
  read_opt(j, "seed", c.seed);
  if (j.contains("family")) c.family = family_from_string(j.at("family").get<std::string>());
  if (j.contains("cv")) cv_from(j.at("cv"), c.cv);
}

void to_json(Json& j, const FeatureSpec& s) {
  j = {{"kind", s.kind == FeatureKind::remote_latent ? "remote_latent" : "downsample_pca"},
       {"downsample_to", {s.downsample_height, s.downsample_width}},
       {"pca_dims", s.pca_dims},
       {"standardize", s.standardize}};
}

void from_json(const Json& j, FeatureSpec& s) {
  if (j.contains("kind")) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "remote_latent") {
      s.kind = FeatureKind::remote_latent;
    } else if (kind == "downsample_pca") {
      s.kind = FeatureKind::downsample_pca;
    } else {
      throw ConfigError("unknown feature kind '" + kind + "'");
    }
  }
  if (j.contains("downsample_to")) {
    const auto hw = j.at("downsample_to").get<std::vector<Index>>();
    if (hw.size() != 2) throw ConfigError("downsample_to must be [h, w]");
    s.downsample_height = hw[0];
    s.downsample_width = hw[1];
  }
  read_opt(j, "pca_dims", s.pca_dims);
  read_opt(j, "standardize", s.standardize);
}

void to_json(Json& j, const LossSpec& s) {
  j = {{"kind", to_string(s.kind)},
       {"lipschitz_constant", s.lipschitz_constant},
       {"bound", s.bound},
       {"hypothesis", {s.h0, s.h1}}};
}

void from_json(const Json& j, LossSpec& s) {
  s.kind = loss_kind_from_string(j.value("kind", std::string("absolute_linear")));
  read_opt(j, "bound", s.bound);
  if (j.contains("hypothesis")) {
    const auto h = j.at("hypothesis").get<std::vector<double>>();
    if (h.size() != 2) throw ConfigError("hypothesis must be [h0, h1]");
    s.h0 = h[0];
    s.h1 = h[1];
  }
  s.lipschitz_constant = analytic_lipschitz(s.kind, s.h1, s.bound);
  read_opt(j, "lipschitz_constant", s.lipschitz_constant);
}

void to_json(Json& j, const RunConfig& c) {
  const auto& d = c.data_source;
  const auto& g = c.generator;
  const auto& f = c.filter;
  j = {{"data_source",
        {{"kind", kind_name(d.kind)},
         {"n", d.n},
         {"p", d.p},
         {"beta", d.beta},
         {"noise_sd", d.noise_sd},
         {"path", d.path},
         {"response_col", d.response_col}}},
       {"mapping",
        {{"mapping_kind", to_string(c.mapping.mapping_kind)},
         {"exp_coefficient", c.mapping.exp_coefficient},
         {"quantization_bits", c.mapping.quantization_bits}}},
       {"generator",
        {{"kind", to_string(g.kind)},
         {"endpoint", g.endpoint},
         {"timeout_seconds", g.timeout_seconds},
         {"fallback_to_surrogate", g.fallback_to_surrogate},
         {"max_in_flight", g.max_in_flight}}},
       {"prompt", c.prompt},
       {"strength_grid", {{"start", c.strength_grid.start}, {"stop", c.strength_grid.stop}, {"step", c.strength_grid.step}}},
       {"guidance_scale", c.guidance_scale},
       {"filter",
        {{"kind", kind_name(f.kind)},
         {"transfer", f.transfer},
         {"metric", to_string(f.metric)},
         {"policy", f.policy},
         {"feature", f.feature},
         {"options",
          {{"knn", f.options.knn},
           {"bandwidth", f.options.bandwidth},
           {"tv_bins", f.options.tv_bins},
           {"n_projections", f.options.n_projections},
           {"seed", f.options.seed}}}}},
       {"model", to_string(c.model)},
       {"repetitions", c.repetitions},
       {"augmentation_sizes", c.augmentation_sizes},
       {"seed", c.seed},
       {"output_dir", c.output_dir},
       {"test_fraction", c.test_fraction},
       {"selection_fraction", c.selection_fraction}};
}

void from_json(const Json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("data_source")) {
    const auto& d = j.at("data_source");
    auto& out = c.data_source;
    if (d.contains("kind")) out.kind = data_kind_from(d.at("kind").get<std::string>());
    read_opt(d, "n", out.n);
    read_opt(d, "p", out.p);
    read_opt(d, "beta", out.beta);
    read_opt(d, "noise_sd", out.noise_sd);
    read_opt(d, "path", out.path);
    read_opt(d, "response_col", out.response_col);
  }
  if (j.contains("mapping")) {
    const auto& m = j.at("mapping");
    if (m.contains("mapping_kind")) {
      c.mapping.mapping_kind = mapping_kind_from_string(m.at("mapping_kind").get<std::string>());
    }
    read_opt(m, "exp_coefficient", c.mapping.exp_coefficient);
    read_opt(m, "quantization_bits", c.mapping.quantization_bits);
  }
  if (j.contains("generator")) {
    const auto& g = j.at("generator");
    if (g.contains("kind")) c.generator.kind = backend_from(g.at("kind").get<std::string>());
    read_opt(g, "endpoint", c.generator.endpoint);
    read_opt(g, "timeout_seconds", c.generator.timeout_seconds);
    read_opt(g, "fallback_to_surrogate", c.generator.fallback_to_surrogate);
    read_opt(g, "max_in_flight", c.generator.max_in_flight);
  }
  read_opt(j, "prompt", c.prompt);
  if (j.contains("strength_grid")) {
    const auto& s = j.at("strength_grid");
    read_opt(s, "start", c.strength_grid.start);
    read_opt(s, "stop", c.strength_grid.stop);
    read_opt(s, "step", c.strength_grid.step);
  }
  read_opt(j, "guidance_scale", c.guidance_scale);
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    auto& out = c.filter;
    if (f.contains("kind")) out.kind = filter_kind_from(f.at("kind").get<std::string>());
    if (f.contains("transfer")) out.transfer = f.at("transfer").get<TransferConfig>();
    if (f.contains("metric")) out.metric = metric_from_string(f.at("metric").get<std::string>());
    if (f.contains("policy")) out.policy = f.at("policy").get<FilterPolicy>();
    if (f.contains("feature")) out.feature = f.at("feature").get<FeatureSpec>();
    if (f.contains("options")) {
      const auto& o = f.at("options");
      read_opt(o, "knn", out.options.knn);
      read_opt(o, "bandwidth", out.options.bandwidth);
      read_opt(o, "tv_bins", out.options.tv_bins);
      read_opt(o, "n_projections", out.options.n_projections);
      read_opt(o, "seed", out.options.seed);
    }
  }
  if (j.contains("model")) c.model = model_kind_from_string(j.at("model").get<std::string>());
  read_opt(j, "repetitions", c.repetitions);
  read_opt(j, "augmentation_sizes", c.augmentation_sizes);
  read_opt(j, "seed", c.seed);
  read_opt(j, "output_dir", c.output_dir);
  read_opt(j, "test_fraction", c.test_fraction);
  read_opt(j, "selection_fraction", c.selection_fraction);
  read_opt(j, "threads", c.threads);
}

void to_json(Json& j, const RunManifest& m) {
  Json curve = Json::array();
  for (const auto& p : m.per_size_curve) {
    curve.push_back({{"augmentation_size", p.augmentation_size},
                     {"mean_error", p.mean_error ? Json(*p.mean_error) : Json(nullptr)},
                     {"std_error", p.std_error ? Json(*p.std_error) : Json(nullptr)},
                     {"n_repetitions", p.n_repetitions}});
  }
  Json reps = Json::array();
  for (const auto& r : m.repetitions) {
    reps.push_back({{"baseline_error", r.baseline_error},
                    {"pool_size", r.pool_size},
                    {"generated_rows", r.generated_rows},
                    {"clamped_pixels", r.clamped_pixels},
                    {"log_underflow_cells", r.log_underflow_cells},
                    {"used_fallback", r.used_fallback}});
  }
  Json reports = Json::object();
  if (m.select_report) reports["select"] = *m.select_report;
  if (m.detection_side1) reports["detection_side1"] = *m.detection_side1;
  if (m.detection_side2) reports["detection_side2"] = *m.detection_side2;
  if (m.filter_report) reports["filter"] = *m.filter_report;
  if (m.bound_report) reports["bound"] = *m.bound_report;
  j = {{"version", m.version},
       {"config_echo", m.config_echo},
       {"per_size_curve", curve},
       {"baseline_error", m.baseline_error},
       {"baseline_std_error", m.baseline_std_error},
       {"reports", reports},
       {"repetitions", reps},
       {"warnings", m.warnings},
       {"wall_clock_seconds", m.wall_clock_seconds}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

RunConfig parse_run_config(const Json& j) {
  RunConfig c;
  try {
    from_json(j, c);
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

void write_manifest(const CodecManifest& manifest, const std::string& path) {
  write_json_file(Json(manifest), path);
}

CodecManifest read_manifest(const std::string& path) {
  try {
    return read_json_file(path).get<CodecManifest>();
  } catch (const Json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace augmentor
