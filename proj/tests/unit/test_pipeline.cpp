#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "augmentor/pipeline.hpp"
#include "augmentor/remote_client.hpp"
#include "augmentor/serialization.hpp"
#include "stub_server.hpp"

using namespace augmentor;
namespace fs = std::filesystem;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.strength_grid = {0.02, 0.1, 0.02};
  c.filter.transfer.ratio_set = {0.5, 1.0};
  c.filter.transfer.batch_size = 50;
  c.filter.transfer.iterations = 4;
  c.repetitions = 2;
  c.augmentation_sizes = {0, 20, 80};
  c.seed = 11;
  c.threads = 1;
  return c;
}

Json without_clock(const RunManifest& m) {
  Json j = m;
  j.erase("wall_clock_seconds");
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("augmentor_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t row_hash(const DataMatrix& d, Index i) {
  std::size_t h = 0;
  for (Index j = 0; j < d.cols(); ++j) h = h * 1000003u ^ std::hash<double>{}(d.values()(i, j));
  return h;
}

}  // namespace

TEST(Pipeline, SizeZeroIsTheBaseline) {
  RunConfig c = small_config();
  c.augmentation_sizes = {0};
  const RunManifest m = run_pipeline(c);
  ASSERT_EQ(m.per_size_curve.size(), 1u);
  ASSERT_TRUE(m.per_size_curve[0].mean_error.has_value());
  EXPECT_NEAR(*m.per_size_curve[0].mean_error, m.baseline_error, 1e-12);
  EXPECT_EQ(m.repetitions.size(), 2u);
  EXPECT_FALSE(all_pools_empty(m));
}

TEST(Pipeline, TransferRunProducesReports) {
  RunConfig c = small_config();
  c.data_source.n = 200;
  const RunManifest m = run_pipeline(c);
  ASSERT_EQ(m.per_size_curve.size(), 3u);
  EXPECT_TRUE(m.select_report.has_value());
  EXPECT_TRUE(m.detection_side1.has_value());
  EXPECT_TRUE(m.detection_side2.has_value());
  ASSERT_TRUE(m.bound_report.has_value());
  EXPECT_TRUE(m.bound_report->holds);
  // 200 rows: 40 test, 32 selection, 64 encoded per side.
  for (const auto& r : m.repetitions) {
    EXPECT_EQ(r.generated_rows, 2 * 5 * 64);
    EXPECT_GT(r.pool_size, 0);
  }
  for (const auto& p : m.per_size_curve) {
    ASSERT_TRUE(p.mean_error.has_value());
    EXPECT_TRUE(std::isfinite(*p.mean_error));
  }
  EXPECT_EQ(m.version, library_version());
}

TEST(Pipeline, DeterministicAcrossThreadCounts) {
  RunConfig c = small_config();
  const Json a = without_clock(run_pipeline(c));
  c.threads = 3;
  const Json b = without_clock(run_pipeline(c));
  c.threads = 1;
  EXPECT_EQ(a.dump(), b.dump());
  c.seed = 12;
  EXPECT_NE(a.dump(), without_clock(run_pipeline(c)).dump());
}

TEST(Pipeline, TestRowsNeverReachTraining) {
  std::set<std::size_t> held_out;
  std::multiset<std::string> stages;
  std::vector<std::pair<std::string, DataMatrix>> seen;
  PipelineHooks hooks;
  hooks.audit = [&](const std::string& stage, const DataMatrix& rows) {
    stages.insert(stage);
    if (stage == "evaluate") {
      for (Index i = 0; i < rows.rows(); ++i) held_out.insert(row_hash(rows, i));
    } else {
      seen.emplace_back(stage, rows);
    }
  };
  RunConfig c = small_config();
  run_pipeline(c, hooks);
  ASSERT_EQ(held_out.size(), 2u * 20u);
  EXPECT_GT(stages.count("encode"), 0u);
  EXPECT_GT(stages.count("fit"), 0u);
  EXPECT_GT(stages.count("select"), 0u);
  for (const auto& [stage, rows] : seen) {
    for (Index i = 0; i < rows.rows(); ++i) {
      EXPECT_EQ(held_out.count(row_hash(rows, i)), 0u) << stage;
    }
  }
}

TEST(Pipeline, CurveFileIsReproducible) {
  const fs::path dir = scratch("curve");
  const RunConfig c = small_config();
  emit_curve(run_pipeline(c), (dir / "a.csv").string());
  emit_curve(run_pipeline(c), (dir / "b.csv").string());
  const std::string a = slurp(dir / "a.csv");
  EXPECT_EQ(a, slurp(dir / "b.csv"));
  EXPECT_EQ(a.rfind("size,mean_error,std_error,baseline\n0,", 0), 0u);
  EXPECT_EQ(a.find('\r'), std::string::npos);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4);
}

TEST(Pipeline, DistanceAndUnfilteredPools) {
  RunConfig c = small_config();
  c.filter.kind = FilterConfig::Kind::distance;
  c.filter.policy = {FilterPolicy::Kind::quantile, 0.8};
  const RunManifest d = run_pipeline(c);
  ASSERT_TRUE(d.filter_report.has_value());
  EXPECT_EQ(d.repetitions[0].pool_size, static_cast<Index>(std::ceil(0.8 * 400 - 1e-9)));
  EXPECT_FALSE(d.select_report.has_value());

  c.filter.kind = FilterConfig::Kind::none;
  const RunManifest n = run_pipeline(c);
  EXPECT_EQ(n.repetitions[0].pool_size, 400);
  EXPECT_EQ(n.repetitions[0].pool_size, n.repetitions[0].generated_rows);
}

TEST(Pipeline, OversizedRequestIsCappedWithWarning) {
  RunConfig c = small_config();
  c.filter.kind = FilterConfig::Kind::none;
  c.repetitions = 1;
  c.augmentation_sizes = {0, 100000};
  const RunManifest m = run_pipeline(c);
  EXPECT_TRUE(m.per_size_curve[1].mean_error.has_value());
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Pipeline, FailedSelectionLeavesEmptyPools) {
  RunConfig c = small_config();
  c.filter.transfer.validation_factor = 1e-9;
  const RunManifest m = run_pipeline(c);
  EXPECT_TRUE(all_pools_empty(m));
  EXPECT_TRUE(m.per_size_curve[0].mean_error.has_value());
  EXPECT_FALSE(m.per_size_curve[1].mean_error.has_value());
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Pipeline, LogisticSimulation) {
  RunConfig c = small_config();
  c.data_source.kind = DataSourceConfig::Kind::simulate_logistic;
  c.model = ModelKind::logistic;
  c.filter.kind = FilterConfig::Kind::none;
  c.repetitions = 1;
  const RunManifest m = run_pipeline(c);
  for (const auto& p : m.per_size_curve) {
    ASSERT_TRUE(p.mean_error.has_value());
    EXPECT_GE(*p.mean_error, 0.0);
    EXPECT_LE(*p.mean_error, 1.0);
  }
  c.model = ModelKind::ols;
  EXPECT_THROW(run_pipeline(c), std::invalid_argument);
}

TEST(Pipeline, CsvSource) {
  const fs::path dir = scratch("csv");
  RunConfig sim = small_config();
  sim.filter.kind = FilterConfig::Kind::none;
  sim.repetitions = 1;
  std::ofstream out(dir / "d.csv");
  out << "a,b,y\n";
  for (int i = 0; i < 60; ++i) out << i % 7 << "," << (i * 3) % 11 << "," << (i % 7) * 2.0 - (i * 3) % 11 << "\n";
  out.close();
  sim.data_source.kind = DataSourceConfig::Kind::csv;
  sim.data_source.path = (dir / "d.csv").string();
  const RunManifest m = run_pipeline(sim);
  EXPECT_EQ(m.repetitions[0].generated_rows, 2 * 5 * 24);
}

TEST(Pipeline, RejectsInvalidConfigs) {
  RunConfig c = small_config();
  c.augmentation_sizes = {50, 10};
  EXPECT_THROW(run_pipeline(c), std::invalid_argument);
  c = small_config();
  c.test_fraction = 1.0;
  EXPECT_THROW(run_pipeline(c), std::invalid_argument);
  c = small_config();
  c.strength_grid = {0.1, 0.01, 0.01};
  EXPECT_THROW(run_pipeline(c), std::invalid_argument);
}

TEST(Pipeline, ArtifactsForFirstRepetition) {
  const fs::path dir = scratch("artifacts");
  PipelineHooks hooks;
  hooks.artifact_dir = dir.string();
  RunConfig c = small_config();
  c.repetitions = 1;
  run_pipeline(c, hooks);
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(dir)) pngs += e.path().extension() == ".png" ? 1 : 0;
  EXPECT_GE(pngs, 2u);
}

TEST(PipelineRemote, StubServiceDrivesTheRun) {
  StubServer stub;
  RunConfig c = small_config();
  c.repetitions = 1;
  c.filter.kind = FilterConfig::Kind::none;
  c.generator.kind = Backend::remote;
  c.generator.endpoint = stub.endpoint();
  c.generator.timeout_seconds = 10;
  const RunManifest m = run_pipeline(c);
  EXPECT_EQ(stub.generate_calls(), 2 * 5);
  EXPECT_FALSE(m.repetitions[0].used_fallback);
  EXPECT_EQ(m.repetitions[0].pool_size, 400);
}

TEST(PipelineRemote, UnavailableServiceFailsOrFallsBack) {
  StubServer::Behavior b;
  b.ready = false;
  StubServer stub(b);
  RunConfig c = small_config();
  c.repetitions = 1;
  c.generator.kind = Backend::remote;
  c.generator.endpoint = stub.endpoint();
  c.generator.timeout_seconds = 2;
  EXPECT_THROW(run_pipeline(c), GeneratorUnavailable);
  c.generator.fallback_to_surrogate = true;
  const RunManifest m = run_pipeline(c);
  EXPECT_TRUE(m.repetitions[0].used_fallback);
  EXPECT_FALSE(m.warnings.empty());

  RunConfig local = small_config();
  local.repetitions = 1;
  EXPECT_EQ(Json(m.per_size_curve.size()), Json(run_pipeline(local).per_size_curve.size()));
  EXPECT_EQ(*m.per_size_curve[1].mean_error, *run_pipeline(local).per_size_curve[1].mean_error);
}
