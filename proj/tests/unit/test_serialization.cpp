#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "augmentor/serialization.hpp"

using namespace augmentor;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("augmentor_serial_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CodecManifestJson, RoundTripsAllFields) {
  CodecManifest m;
  m.mapping_kind = MappingKind::minmax;
  m.exp_coefficient = 0.07;
  m.per_column = {{-1.5, 2.0}, {0.0, 0.0}, {3.0, 9.5}};
  m.quantization_bits = 16;
  m.layout = {12, 3, 2};
  const Json j = m;
  EXPECT_EQ(j.at("mapping_kind"), "minmax");
  EXPECT_EQ(j.at("layout").at("response_col"), 2);
  EXPECT_EQ(j.at("per_column").at(0).at("col_min"), -1.5);
  const auto back = j.get<CodecManifest>();
  EXPECT_EQ(back.mapping_kind, m.mapping_kind);
  EXPECT_EQ(back.exp_coefficient, m.exp_coefficient);
  EXPECT_EQ(back.quantization_bits, 16);
  EXPECT_EQ(back.layout.rows, 12);
  ASSERT_EQ(back.per_column.size(), 3u);
  EXPECT_EQ(back.per_column[2].col_max, 9.5);

  const fs::path dir = scratch("manifest");
  write_manifest(m, (dir / "m.json").string());
  EXPECT_EQ(Json(read_manifest((dir / "m.json").string())), j);
}

TEST(CodecManifestJson, RejectsInconsistentManifest) {
  CodecManifest m;
  m.per_column = {{0.0, 1.0}};
  m.layout = {2, 2, 1};
  EXPECT_THROW(Json(m).get<CodecManifest>(), std::invalid_argument);
  m.layout = {2, 1, 0};
  m.per_column = {{2.0, 1.0}};
  EXPECT_THROW(Json(m).get<CodecManifest>(), std::invalid_argument);
  Json j = CodecManifest{};
  j.erase("layout");
  EXPECT_THROW(j.get<CodecManifest>(), Json::exception);
}

TEST(RunConfigJson, DefaultsAndOverrides) {
  const RunConfig d = parse_run_config(Json::object());
  EXPECT_EQ(d.repetitions, 1);
  EXPECT_EQ(d.guidance_scale, 7.5);
  EXPECT_EQ(d.filter.kind, FilterConfig::Kind::transfer);

  const Json j = Json::parse(R"({
    "data_source": {"kind": "simulate_logistic", "n": 150, "p": 6},
    "model": "logistic",
    "mapping": {"mapping_kind": "minmax", "quantization_bits": 0},
    "strength_grid": {"start": 0.01, "stop": 0.05, "step": 0.01},
    "filter": {"kind": "distance", "metric": "mmd",
               "policy": {"kind": "threshold", "value": 0.3},
               "feature": {"downsample_to": [8, 4], "pca_dims": 5},
               "options": {"knn": 4}},
    "augmentation_sizes": [0, 10, 20],
    "repetitions": 3,
    "seed": 99
  })");
  const RunConfig c = parse_run_config(j);
  EXPECT_EQ(c.data_source.kind, DataSourceConfig::Kind::simulate_logistic);
  EXPECT_EQ(c.data_source.n, 150);
  EXPECT_EQ(c.model, ModelKind::logistic);
  EXPECT_EQ(c.mapping.mapping_kind, MappingKind::minmax);
  EXPECT_EQ(c.filter.metric, DistanceMetric::mmd);
  EXPECT_EQ(c.filter.policy.kind, FilterPolicy::Kind::threshold);
  EXPECT_EQ(c.filter.feature.downsample_height, 8);
  EXPECT_EQ(c.filter.feature.downsample_width, 4);
  EXPECT_EQ(c.filter.options.knn, 4);
  EXPECT_EQ(c.augmentation_sizes, (std::vector<Index>{0, 10, 20}));
  EXPECT_EQ(c.seed, 99u);

  const RunConfig again = parse_run_config(Json(c));
  EXPECT_EQ(Json(again), Json(c));
}

TEST(RunConfigJson, ErrorsBecomeConfigErrors) {
  EXPECT_THROW(parse_run_config(Json::parse(R"({"model": "forest"})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"repetitions": "many"})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"augmentation_sizes": [5, 1]})")), ConfigError);
  EXPECT_THROW(parse_run_config(Json::parse(R"({"filter": {"policy": {"kind": "quantile", "value": 1.5}}})")),
               ConfigError);
  EXPECT_THROW(parse_run_config(Json::array()), ConfigError);
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "broken.json") << "{ not json";
  EXPECT_THROW(read_json_file((dir / "broken.json").string()), ConfigError);
  EXPECT_THROW(read_json_file((dir / "missing.json").string()), ConfigError);
}

TEST(ReportJson, NanBecomesNull) {
  SelectReport r;
  r.rho_star = 0.5;
  r.per_rho = {{0.25, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0},
               {0.5, 1.2, 0.3, 4}};
  const Json j = r;
  EXPECT_TRUE(j.at("per_rho").at(0).at("mean_error").is_null());
  EXPECT_EQ(j.at("per_rho").at(1).at("n_valid_iterations"), 4);
  EXPECT_NO_THROW((void)j.dump());
}

TEST(ReportJson, LossSpecFillsAnalyticConstant) {
  const auto l = Json::parse(R"({"kind": "squared_clipped", "bound": 4, "hypothesis": [0, 2]})").get<LossSpec>();
  EXPECT_DOUBLE_EQ(l.lipschitz_constant, 8.0);
  EXPECT_EQ(Json(l).at("hypothesis"), Json::parse("[0.0, 2.0]"));
}

TEST(ReportJson, WriteIsStableText) {
  const fs::path dir = scratch("write");
  write_json_file(Json{{"b", 1}, {"a", 2}}, (dir / "x.json").string());
  std::ifstream in(dir / "x.json");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}
