#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "augmentor/bound_check.hpp"
#include "augmentor/features.hpp"
#include "augmentor/filters.hpp"
#include "augmentor/generators.hpp"
#include "augmentor/models.hpp"
#include "augmentor/pipeline.hpp"
#include "augmentor/png_io.hpp"
#include "augmentor/random.hpp"
#include "augmentor/remote_client.hpp"
#include "augmentor/serialization.hpp"
#include "augmentor/simulate.hpp"
#include "augmentor/tabular_codec.hpp"

namespace fs = std::filesystem;
using namespace augmentor;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kUnreachable = 3, kEmptyPool = 4 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool keep_artifacts = false;
  std::string generator;
  std::string endpoint;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the config seed");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_flag("--keep-artifacts", c.keep_artifacts, "Keep intermediate PNGs");
  cmd->add_option("--generator", c.generator, "surrogate or remote")
      ->check(CLI::IsMember({"surrogate", "remote"}));
  cmd->add_option("--endpoint", c.endpoint, "Diffusion service URL");
}

std::string out_dir(const Common& c, const Json& j) {
  std::string dir = c.out.empty() ? j.value("output_dir", std::string("out")) : c.out;
  fs::create_directories(dir);
  return dir;
}

std::uint64_t seed_of(const Common& c, const Json& j) {
  return c.seed ? *c.seed : j.value("seed", std::uint64_t{0});
}

Json with_overrides(Json j, const Common& c) {
  if (!c.generator.empty()) j["generator"]["kind"] = c.generator;
  if (!c.endpoint.empty()) j["generator"]["endpoint"] = c.endpoint;
  if (c.seed) j["seed"] = *c.seed;
  if (!c.out.empty()) j["output_dir"] = c.out;
  return j;
}

std::string path_in(const Json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config needs '") + key + "'");
  return j.at(key).get<std::string>();
}

// A list of numbers, or {"csv": path, "column": k}.
SampleSet values_from(const Json& j) {
  if (j.is_array()) return SampleSet::from_values(j.get<std::vector<double>>());
  const DataMatrix data = read_csv(j.at("csv").get<std::string>(), -1);
  const auto col = j.value("column", static_cast<int>(data.cols()) - 1);
  if (col < 0 || col >= data.cols()) throw ConfigError("column out of range");
  return SampleSet(Matrix(data.values().col(col)));
}

int cmd_simulate(const Common& c) {
  const Json j = with_overrides(read_json_file(c.config), c);
  const RunConfig config = parse_run_config(j);
  const auto& d = config.data_source;
  Vector beta = Vector::Zero(d.p);
  for (std::size_t i = 0; i < d.beta.size(); ++i) beta(static_cast<Index>(i)) = d.beta[i];
  DataMatrix data;
  if (d.kind == DataSourceConfig::Kind::simulate_linear) {
    data = simulate_linear(d.n, beta, d.noise_sd, config.seed);
  } else if (d.kind == DataSourceConfig::Kind::simulate_logistic) {
    data = simulate_logistic(d.n, beta, config.seed);
  } else {
    throw ConfigError("simulate needs a simulate_linear or simulate_logistic data_source");
  }
  const std::string path = out_dir(c, j) + "/data.csv";
  write_csv(data, path);
  std::cout << path << '\n';
  return kOk;
}

int cmd_encode(const Common& c) {
  const Json j = read_json_file(c.config);
  const DataMatrix data = read_csv(path_in(j, "input"), j.value("response_col", -1));
  EncodeOptions opts;
  if (j.contains("mapping")) {
    const auto& m = j.at("mapping");
    opts.mapping_kind = mapping_kind_from_string(m.value("mapping_kind", std::string("exponential")));
    opts.exp_coefficient = m.value("exp_coefficient", opts.exp_coefficient);
    opts.quantization_bits = m.value("quantization_bits", opts.quantization_bits);
  }
  const Encoded enc = encode(data, opts);
  const std::string png = out_dir(c, j) + "/image.png";
  write_png(enc.image, png);
  write_manifest(enc.manifest, png + ".manifest.json");
  std::cout << png << '\n';
  return kOk;
}

int cmd_decode(const Common& c) {
  const Json j = read_json_file(c.config);
  const std::string png = path_in(j, "image");
  const CodecManifest manifest = read_manifest(j.value("manifest", png + ".manifest.json"));
  DecodeWarnings warnings;
  const DataMatrix data = decode(read_png(png), manifest, &warnings);
  const std::string path = out_dir(c, j) + "/decoded.csv";
  write_csv(data, path);
  if (warnings.clamped_pixels || warnings.log_underflow_cells) {
    std::cerr << "warning: " << warnings.clamped_pixels << " clamped pixels, " << warnings.log_underflow_cells
              << " log underflow cells\n";
  }
  std::cout << path << '\n';
  return kOk;
}

int cmd_generate(const Common& c) {
  const Json j = with_overrides(read_json_file(c.config), c);
  const RunConfig config = parse_run_config(j);
  const GrayImage image = read_png(path_in(j, "image"));
  const auto grid = strength_grid(config.strength_grid.start, config.strength_grid.stop, config.strength_grid.step);
  std::vector<GenRequest> requests;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    requests.push_back({image, config.prompt, grid[k], config.guidance_scale, derive_seed(config.seed, {static_cast<std::uint64_t>(k)})});
  }
  std::vector<GrayImage> images;
  if (config.generator.kind == Backend::remote) {
    RemoteGenerator remote({config.generator.endpoint, config.generator.timeout_seconds, 3,
                            config.generator.max_in_flight});
    if (!remote.health().ready()) throw GeneratorUnavailable("service not ready");
    for (auto& r : remote.generate_batch(requests)) images.push_back(std::move(r.image));
  } else {
    for (const auto& r : requests) images.push_back(generate_surrogate(r).image);
  }
  const std::string dir = out_dir(c, j);
  for (std::size_t k = 0; k < images.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "/gen_k%04zu.png", k);
    write_png(images[k], dir + name);
  }
  std::cout << images.size() << " images written to " << dir << '\n';
  return kOk;
}

std::vector<GrayImage> read_pngs(const Json& list) {
  std::vector<GrayImage> out;
  for (const auto& p : list) out.push_back(read_png(p.get<std::string>()));
  return out;
}

int cmd_filter(const Common& c) {
  const Json j = with_overrides(read_json_file(c.config), c);
  const auto metric = metric_from_string(j.value("metric", std::string("wasserstein")));
  FilterPolicy policy;
  if (j.contains("policy")) policy = j.at("policy").get<FilterPolicy>();
  FilterOptions options;
  if (j.contains("options")) {
    const auto& o = j.at("options");
    options.knn = o.value("knn", options.knn);
    options.bandwidth = o.value("bandwidth", options.bandwidth);
    options.tv_bins = o.value("tv_bins", options.tv_bins);
    options.n_projections = o.value("n_projections", options.n_projections);
  }
  options.seed = seed_of(c, j);
  std::optional<std::vector<Index>> pairing;
  if (j.contains("pairing")) pairing = j.at("pairing").get<std::vector<Index>>();

  const std::string dir = out_dir(c, j);
  FilterReport report;
  if (j.contains("original_images")) {
    const auto originals = read_pngs(j.at("original_images"));
    const auto candidates = read_pngs(j.at("candidate_images"));
    FeatureSpec spec;
    if (j.contains("feature")) spec = j.at("feature").get<FeatureSpec>();
    std::optional<RemoteGenerator> service;
    if (spec.kind == FeatureKind::remote_latent) {
      RemoteOptions ro;
      ro.endpoint = j.contains("generator") ? j["generator"].value("endpoint", std::string()) : std::string();
      if (ro.endpoint.empty()) throw ConfigError("remote_latent features need --endpoint");
      service.emplace(ro);
    }
    const auto [fo, fc] = extract_features(originals, candidates, spec, service ? &*service : nullptr);
    report = filter_candidates(fo, fc, metric, policy, pairing ? &*pairing : nullptr, options);
  } else {
    const DataMatrix originals = read_csv(path_in(j, "originals"), j.value("response_col", -1));
    const DataMatrix candidates = read_csv(path_in(j, "candidates"), j.value("response_col", -1));
    report = filter_candidates(SampleSet(originals.values()), SampleSet(candidates.values()), metric, policy,
                               pairing ? &*pairing : nullptr, options);
    if (!report.retained_indices.empty()) {
      write_csv(augment(originals, candidates, report.retained_indices).data, dir + "/augmented.csv");
    }
  }
  write_json_file(Json(report), dir + "/filter_report.json");
  std::cout << report.retained_indices.size() << " of " << report.distances.size() << " retained\n";
  return kOk;
}

int cmd_evaluate(const Common& c) {
  const Json j = read_json_file(c.config);
  const int response_col = j.value("response_col", -1);
  const DataMatrix train = read_csv(path_in(j, "train"), response_col);
  const DataMatrix test = read_csv(path_in(j, "test"), response_col);
  const ModelKind model = model_kind_from_string(j.value("model", std::string("ols")));
  FitResult fit;
  if (model == ModelKind::ols) {
    fit = fit_ols(train.predictors(), train.response());
  } else {
    CvOptions cv;
    cv.seed = seed_of(c, j);
    fit = fit_cv(train.predictors(), train.response(),
                 model == ModelKind::logistic ? Family::logistic : Family::linear, cv)
              .fit;
  }
  const Metrics metrics = evaluate(fit, test.predictors(), test.response());
  write_json_file(Json{{"fit", fit}, {"metrics", metrics}}, out_dir(c, j) + "/metrics.json");
  std::cout << "mse " << metrics.mse << '\n';
  return kOk;
}

int cmd_bound_check(const Common& c) {
  const Json j = read_json_file(c.config);
  const SampleSet real = values_from(j.at("real"));
  const SampleSet synth = values_from(j.at("synth"));
  const LossSpec loss = j.at("loss").get<LossSpec>();
  std::vector<LossSpec> grid;
  if (j.contains("hypothesis_grid")) {
    for (const auto& h : j.at("hypothesis_grid")) grid.push_back(h.get<LossSpec>());
  } else {
    grid.push_back(loss);
  }
  const BoundReport report = theorem_bound_check(real, synth, loss, grid, j.value("delta", 0.05), seed_of(c, j),
                                                 j.value("n_sign_draws", 1000));
  const DualityCheck duality = duality_gap_check(real, synth, loss);
  write_json_file(Json{{"bound", report},
                       {"duality", {{"gap", duality.gap}, {"w1", duality.w1}, {"holds", duality.holds}}}},
                  out_dir(c, j) + "/bound_report.json");
  std::cout << (report.holds ? "holds" : "violated") << '\n';
  return report.holds ? kOk : kFailure;
}

int cmd_pipeline(const Common& c) {
  const Json j = with_overrides(read_json_file(c.config), c);
  const RunConfig config = parse_run_config(j);
  fs::create_directories(config.output_dir);
  PipelineHooks hooks;
  if (c.keep_artifacts) hooks.artifact_dir = config.output_dir + "/artifacts";
  const RunManifest manifest = run_pipeline(config, hooks);
  write_json_file(Json(manifest), config.output_dir + "/manifest.json");
  emit_curve(manifest, config.output_dir + "/curve.csv");
  for (const auto& w : manifest.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << config.output_dir << "/curve.csv\n";
  if (all_pools_empty(manifest)) {
    std::cerr << "error: filtered pool empty at every augmentation size\n";
    return kEmptyPool;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic tabular augmentation with statistical filtering"};
  app.require_subcommand(1);
  Common common;
  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const Common&);
  };
  const std::vector<Entry> entries{
      {"simulate", "Simulate a data set", cmd_simulate},
      {"encode", "Encode a CSV table as a grayscale PNG", cmd_encode},
      {"decode", "Decode a PNG back to a CSV table", cmd_decode},
      {"generate", "Generate images over a strength grid", cmd_generate},
      {"filter", "Filter candidates by distance to the originals", cmd_filter},
      {"evaluate", "Fit a model and report test metrics", cmd_evaluate},
      {"pipeline", "Run the end-to-end augmentation experiment", cmd_pipeline},
      {"bound-check", "Check the generalization bound on 1-D samples", cmd_bound_check},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> commands;
  for (const auto& e : entries) {
    CLI::App* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, common);
    commands.emplace_back(cmd, &e);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    for (const auto& [cmd, entry] : commands) {
      if (cmd->parsed()) return entry->run(common);
    }
  } catch (const GeneratorUnavailable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnreachable;
  } catch (const GeneratorTimeout& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnreachable;
  } catch (const GeneratorError& e) {
    std::cerr << "error: generator: " << e.what() << '\n';
    return kFailure;
  } catch (const Json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
