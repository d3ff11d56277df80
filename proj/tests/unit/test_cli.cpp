#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "augmentor/serialization.hpp"
#include "stub_server.hpp"

using augmentor::Json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("augmentor_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const Json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(AUGMENTOR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json quick_pipeline() {
  return Json::parse(R"({
    "strength_grid": {"start": 0.02, "stop": 0.1, "step": 0.02},
    "filter": {"kind": "transfer", "transfer": {"ratio_set": [0.5, 1.0], "batch_size": 50, "iterations": 3}},
    "data_source": {"n": 200},
    "repetitions": 2,
    "augmentation_sizes": [0, 20, 40],
    "threads": 1,
    "seed": 5
  })");
}

}  // namespace

TEST(Cli, TableRoundTripThroughImage) {
  const fs::path dir = scratch("roundtrip");
  const auto sim = write_config(dir, "sim.json", Json{{"data_source", {{"n", 30}}}});
  ASSERT_EQ(run("simulate --config " + sim.string() + " --out " + dir.string() + " --seed 3"), 0);
  ASSERT_TRUE(fs::exists(dir / "data.csv"));

  const auto enc = write_config(dir, "enc.json",
                                Json{{"input", (dir / "data.csv").string()},
                                     {"mapping", {{"mapping_kind", "minmax"}, {"quantization_bits", 0}}}});
  ASSERT_EQ(run("encode --config " + enc.string() + " --out " + dir.string()), 0);
  ASSERT_TRUE(fs::exists(dir / "image.png"));
  const Json manifest = Json::parse(slurp(dir / "image.png.manifest.json"));
  EXPECT_EQ(manifest.at("layout").at("rows"), 30);
  EXPECT_EQ(manifest.at("mapping_kind"), "minmax");

  const auto dec = write_config(dir, "dec.json", Json{{"image", (dir / "image.png").string()}});
  ASSERT_EQ(run("decode --config " + dec.string() + " --out " + dir.string()), 0);
  ASSERT_TRUE(fs::exists(dir / "decoded.csv"));

  auto mse_on = [&](const fs::path& test) {
    const auto ev = write_config(dir, "ev.json", Json{{"train", (dir / "data.csv").string()}, {"test", test.string()}});
    EXPECT_EQ(run("evaluate --config " + ev.string() + " --out " + dir.string()), 0);
    const Json metrics = Json::parse(slurp(dir / "metrics.json"));
    EXPECT_EQ(metrics.at("metrics").at("n_eval"), 30);
    return metrics.at("metrics").at("mse").get<double>();
  };
  // 8-bit quantization of min-max values moves the in-sample error only slightly.
  EXPECT_NEAR(mse_on(dir / "decoded.csv"), mse_on(dir / "data.csv"), 0.1);
}

TEST(Cli, GenerateAndFilter) {
  const fs::path dir = scratch("generate");
  const auto sim = write_config(dir, "sim.json", Json{{"data_source", {{"n", 40}}}});
  ASSERT_EQ(run("simulate --config " + sim.string() + " --out " + dir.string()), 0);
  const auto enc = write_config(dir, "enc.json", Json{{"input", (dir / "data.csv").string()}});
  ASSERT_EQ(run("encode --config " + enc.string() + " --out " + dir.string()), 0);
  const auto gen = write_config(dir, "gen.json",
                                Json{{"image", (dir / "image.png").string()},
                                     {"strength_grid", {{"start", 0.02}, {"stop", 0.1}, {"step", 0.02}}}});
  ASSERT_EQ(run("generate --config " + gen.string() + " --out " + dir.string()), 0);
  for (int k = 0; k < 5; ++k) EXPECT_TRUE(fs::exists(dir / ("gen_k000" + std::to_string(k) + ".png")));

  Json images = Json::array();
  for (int k = 0; k < 5; ++k) images.push_back((dir / ("gen_k000" + std::to_string(k) + ".png")).string());
  const auto filt = write_config(dir, "filt.json",
                                 Json{{"original_images", {(dir / "image.png").string(), (dir / "image.png").string()}},
                                      {"candidate_images", images},
                                      {"metric", "mmd"},
                                      {"policy", {{"kind", "quantile"}, {"value", 0.6}}},
                                      {"feature", {{"downsample_to", {8, 4}}, {"pca_dims", 1}}}});
  ASSERT_EQ(run("filter --config " + filt.string() + " --out " + dir.string()), 0);
  const Json report = Json::parse(slurp(dir / "filter_report.json"));
  EXPECT_EQ(report.at("retained_indices").size(), 3u);
  EXPECT_EQ(report.at("distances").size(), 5u);
}

TEST(Cli, PipelineWritesReproducibleOutputs) {
  const fs::path a = scratch("pipe_a");
  const fs::path b = scratch("pipe_b");
  const auto cfg = write_config(a, "run.json", quick_pipeline());
  ASSERT_EQ(run("pipeline --config " + cfg.string() + " --out " + a.string() + " --keep-artifacts"), 0);
  ASSERT_EQ(run("pipeline --config " + cfg.string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "curve.csv"), slurp(b / "curve.csv"));
  EXPECT_TRUE(fs::exists(a / "artifacts"));
  const Json m = Json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m.at("per_size_curve").size(), 3u);
  EXPECT_TRUE(m.at("reports").contains("select"));
  EXPECT_TRUE(m.at("reports").contains("bound"));
  EXPECT_EQ(m.at("config_echo").at("seed"), 5);

  const fs::path c = scratch("pipe_c");
  ASSERT_EQ(run("pipeline --config " + cfg.string() + " --out " + c.string() + " --seed 6"), 0);
  EXPECT_NE(slurp(a / "curve.csv"), slurp(c / "curve.csv"));
}

TEST(Cli, BoundCheckReport) {
  const fs::path dir = scratch("bound");
  const auto cfg = write_config(dir, "b.json", Json::parse(R"({
    "real": [0.1, 0.4, 0.35, 0.8, 0.6],
    "synth": [0.2, 0.5, 0.3, 0.9],
    "loss": {"kind": "absolute_linear", "bound": 1.0, "hypothesis": [0.0, 1.0]},
    "delta": 0.05,
    "n_sign_draws": 200
  })"));
  ASSERT_EQ(run("bound-check --config " + cfg.string() + " --out " + dir.string()), 0);
  const Json r = Json::parse(slurp(dir / "bound_report.json"));
  EXPECT_TRUE(r.at("bound").at("holds").get<bool>());
  EXPECT_TRUE(r.at("duality").at("holds").get<bool>());
  EXPECT_NEAR(r.at("bound").at("confidence_term").get<double>(), std::sqrt(std::log(20.0) / 8.0), 1e-12);
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path dir = scratch("config");
  EXPECT_EQ(run("pipeline --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run("pipeline"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  std::ofstream(dir / "broken.json") << "{ nope";
  EXPECT_EQ(run("pipeline --config " + (dir / "broken.json").string()), 2);
  const auto bad = write_config(dir, "bad.json", Json{{"model", "forest"}});
  EXPECT_EQ(run("pipeline --config " + bad.string() + " --out " + dir.string()), 2);
  const auto sizes = write_config(dir, "sizes.json", Json{{"augmentation_sizes", {10, 5}}});
  EXPECT_EQ(run("pipeline --config " + sizes.string() + " --out " + dir.string()), 2);
  const auto no_input = write_config(dir, "enc.json", Json::object());
  EXPECT_EQ(run("encode --config " + no_input.string() + " --out " + dir.string()), 2);
  EXPECT_EQ(run("pipeline --config " + bad.string() + " --generator quantum"), 2);
}

TEST(Cli, UnreachableGeneratorExitsThree) {
  const fs::path dir = scratch("unreachable");
  const auto cfg = write_config(dir, "run.json", quick_pipeline());
  EXPECT_EQ(run("pipeline --config " + cfg.string() + " --out " + dir.string() +
                " --generator remote --endpoint http://127.0.0.1:9"),
            3);
  StubServer::Behavior loading;
  loading.ready = false;
  StubServer stub(loading);
  EXPECT_EQ(run("pipeline --config " + cfg.string() + " --out " + dir.string() + " --generator remote --endpoint " +
                stub.endpoint()),
            3);
}

TEST(Cli, RemoteGeneratorViaStub) {
  const fs::path dir = scratch("remote");
  StubServer stub;
  Json j = quick_pipeline();
  j["repetitions"] = 1;
  const auto cfg = write_config(dir, "run.json", j);
  EXPECT_EQ(run("pipeline --config " + cfg.string() + " --out " + dir.string() + " --generator remote --endpoint " +
                stub.endpoint()),
            0);
  EXPECT_EQ(stub.generate_calls(), 10);
}

TEST(Cli, EmptyPoolsExitFour) {
  const fs::path dir = scratch("empty");
  Json j = quick_pipeline();
  j["filter"]["transfer"]["validation_factor"] = 1e-9;
  const auto cfg = write_config(dir, "run.json", j);
  EXPECT_EQ(run("pipeline --config " + cfg.string() + " --out " + dir.string()), 4);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(Cli, RuntimeFailureExitsOne) {
  const fs::path dir = scratch("runtime");
  std::ofstream(dir / "m.json") << Json(augmentor::CodecManifest{}).dump();
  const auto cfg = write_config(dir, "dec.json", Json{{"image", (dir / "absent.png").string()},
                                                     {"manifest", (dir / "m.json").string()}});
  EXPECT_EQ(run("decode --config " + cfg.string() + " --out " + dir.string()), 1);
}
