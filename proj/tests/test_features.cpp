#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "spectrahar/config_io.hpp"
#include "spectrahar/errors.hpp"
#include "spectrahar/feature_store.hpp"
#include "spectrahar/features.hpp"
#include "spectrahar/graph.hpp"
#include "spectrahar/stats.hpp"

using namespace spectrahar;

namespace {

Spectrum path3() {
  std::vector<Point3> pts = {Point3(0, 0, 0), Point3(0.1, 0, 0), Point3(0.2, 0, 0)};
  return decompose(laplacian(build_graph(pts, 0.15)), 2, 2);
}

FrameRecord fake_record(double value, bool valid, const FeatureConfig& c) {
  FrameRecord r;
  r.enough_points = valid;
  for (int p : c.parts) {
    FrameFeature f;
    f.eigenvalue_summary.assign(kSummarySize, value);
    f.eigenvalue_selected.assign(static_cast<std::size_t>(c.k_val), value);
    if (c.use_eigenvectors) f.eigenvector_stats.assign(static_cast<std::size_t>(c.k_vec) * kVectorStatCount, value);
    f.valid = valid;
    r.parts[p] = f;
  }
  return r;
}

}  // namespace

TEST_SUITE("features") {
TEST_CASE("statistics agree with the hand-written oracle") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(5 + trial);
    for (double& v : x) v = n(rng);
    CHECK(stats::mean(x) == doctest::Approx(oracle::mean(x)).epsilon(1e-12));
    CHECK(stats::stddev(x) == doctest::Approx(oracle::pop_std(x)).epsilon(1e-12));
    CHECK(stats::skewness(x) == doctest::Approx(oracle::skewness(x)).epsilon(1e-9));
    CHECK(stats::excess_kurtosis(x) == doctest::Approx(oracle::excess_kurtosis(x)).epsilon(1e-9));
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0})
      CHECK(stats::percentile(x, q) == doctest::Approx(oracle::percentile(x, q)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(stats::mean(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("temporal statistics of (1, 2, 3)") {
  const std::vector<std::vector<double>> series = {{1.0}, {2.0}, {3.0}};
  const auto t = aggregate_temporal_stats(series);
  const std::vector<double> expected = {2.0, std::sqrt(2.0 / 3.0), 2.0, 2.0, 1.0, 0.0, -1.5};
  REQUIRE(t.size() == expected.size());
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(t[i] - expected[i]) < 1e-6);
}

TEST_CASE("temporal aggregation is dimension-major") {
  const std::vector<std::vector<double>> series = {{1.0, 10.0}, {3.0, 30.0}};
  const std::vector<TemporalStat> stats = {TemporalStat::Mean, TemporalStat::Max};
  const auto t = aggregate_temporal_stats(series, stats);
  CHECK(t == std::vector<double>{2.0, 3.0, 20.0, 30.0});
  CHECK(aggregate_concat(series) == std::vector<double>{1.0, 10.0, 3.0, 30.0});
}

TEST_CASE("eigenvector statistics of the P3 Fiedler vector") {
  const auto s = path3();
  REQUIRE(s.vector_count() >= 2);
  const auto st = vector_statistics(s.eigenvectors.col(1));
  // Fiedler vector of P3 is (1, 0, -1)/sqrt(2) up to sign.
  CHECK(std::abs(st[0]) < 1e-9);                               // mean
  CHECK(std::abs(st[1] - 0.577350) < 1e-6);                    // std
  CHECK(std::abs(st[2] - 1.0 / std::sqrt(2.0)) < 1e-6);        // max
  CHECK(std::abs(st[3] + 1.0 / std::sqrt(2.0)) < 1e-6);        // min
  CHECK(std::abs(st[4] + 1.5) < 1e-6);                         // excess kurtosis
  CHECK(std::abs(st[5] - std::log(2.0)) < 1e-6);               // entropy of u^2
  CHECK(std::abs(st[6] - 0.707107) < 1e-6);                    // abs range
}

TEST_CASE("eigenvalue summary and selection") {
  const auto s = path3();  // eigenvalues 0, 1, 3
  const auto sum = eigenvalue_summary(s);
  REQUIRE(sum);
  CHECK((*sum)[0] == doctest::Approx(2.0));
  CHECK((*sum)[1] == doctest::Approx(1.0));
  CHECK((*sum)[2] == doctest::Approx(2.0));
  CHECK((*sum)[3] == doctest::Approx(1.5));
  CHECK((*sum)[4] == doctest::Approx(2.5));
  CHECK((*sum)[5] == doctest::Approx(3.0));
  const auto sel = eigenvalue_select(s, 5);
  REQUIRE(sel.size() == 5);
  CHECK(sel[0] == doctest::Approx(1.0));
  CHECK(sel[1] == doctest::Approx(3.0));
  CHECK(sel[2] == 0.0);  // zero padding
  CHECK(sel[4] == 0.0);
}

TEST_CASE("dimension formula") {
  FeatureConfig c;
  CHECK(part_dimension(c, 40) == 60 * 7 + 7 * 40 * 7);
  CHECK(feature_dimension(c, 40) == 5 * 2380);
  c.strategy = Strategy::C;
  c.use_eigenvectors = false;
  CHECK(part_dimension(c, 40) == 240);
  c.strategy = Strategy::D;
  CHECK(part_dimension(c, 20) == 60 * 20);
  c.strategy = Strategy::A;
  c.parts = {0};
  CHECK(feature_dimension(c, 40) == 42);
}

TEST_CASE("window counts") {
  CHECK(window_count(100, 40, 5) == 13);
  CHECK(window_count(40, 40, 5) == 1);
  CHECK(window_count(39, 40, 5) == 0);
  FeatureConfig c;
  CHECK(c.window_frames(10.0) == 40);
  CHECK(c.stride_frames(10.0) == 5);
  c.stride_seconds = 0.01;
  CHECK(c.stride_frames(10.0) == 1);
}

TEST_CASE("window validity and imputation") {
  FeatureConfig c;
  c.parts = {0};
  c.use_eigenvectors = false;
  c.k_val = 2;
  c.strategy = Strategy::C;
  std::vector<FrameRecord> w;
  for (int i = 0; i < 10; ++i) w.push_back(fake_record(i < 8 ? 1.0 + i : 99.0, i < 8, c));
  // 8 of 10 valid meets the 0.8 threshold; invalid frames take the valid mean 4.5.
  const auto v = window_feature(w, c);
  REQUIRE(v);
  REQUIRE(v->size() == 10 * 6);
  CHECK((*v)[8 * 6] == doctest::Approx(4.5));
  CHECK((*v)[9 * 6 + 5] == doctest::Approx(4.5));
  w[7] = fake_record(0.0, false, c);
  CHECK_FALSE(window_feature(w, c));
}

TEST_CASE("small parts give zero blocks") {
  FeatureConfig c;
  FrameCloud tiny;
  tiny.points = {Point3(0, 0, 0), Point3(0.05, 0, 0)};
  bool failed = true;
  const auto f = frame_feature(tiny, c, &failed);
  CHECK_FALSE(failed);
  CHECK_FALSE(f.valid);
  CHECK(f.eigenvalue_selected.size() == 60);
  for (double v : f.eigenvalue_selected) CHECK(v == 0.0);
}

TEST_CASE("frame records computed for more parts serve a subset") {
  std::mt19937_64 rng(2);
  FrameCloud frame;
  for (const auto& p : oracle::random_cloud(rng, 200, 0.6)) frame.points.push_back(p);
  FeatureConfig whole;
  whole.parts = {0};
  FeatureConfig all;
  const auto a = frame_record(frame, whole);
  const auto b = frame_record(frame, all);
  CHECK(a.parts[0]->eigenvalue_selected == b.parts[0]->eigenvalue_selected);
  CHECK(a.parts[0]->eigenvector_stats == b.parts[0]->eigenvector_stats);
}

TEST_CASE("feature configuration JSON") {
  FeatureConfig c;
  c.strategy = Strategy::D;
  c.parts = {0, 5};
  c.temporal_stats = {TemporalStat::Min, TemporalStat::Iqr};
  const auto back = feature_config_from_json(to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(back) != config_hash(FeatureConfig{}));
  CHECK_THROWS_AS(feature_config_from_json(nlohmann::json{{"colour", 1}}), UsageError);
  FeatureConfig bad;
  bad.parts = {7};
  CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("feature store round trip and corruption") {
  oracle::TempDir dir("store");
  FeatureStore s;
  s.config.parts = {0};
  s.dimension = 3;
  for (int i = 0; i < 4; ++i) {
    WindowFeature w;
    w.vector = {1.0f * i, 2.5f, -3.0f};
    w.sequence_id = "q" + std::to_string(i);
    w.subject_id = "s";
    w.activity_id = "a";
    w.environment_id = "E1";
    w.window_start_frame = 5 * i;
    s.windows.push_back(w);
  }
  const auto path = dir.path / "f.shfs";
  write_feature_store(path, s);
  CHECK(std::filesystem::exists(dir.path / "f.shfs.json"));
  const auto back = read_feature_store(path);
  REQUIRE(back.windows.size() == 4);
  CHECK(back.windows[3].vector == s.windows[3].vector);
  CHECK(back.windows[3].window_start_frame == 15);
  CHECK(config_hash(back.config) == config_hash(s.config));

  auto bytes = read_file_bytes(path);
  bytes.resize(bytes.size() - 3);
  write_file_bytes(dir.path / "cut.shfs", bytes);
  CHECK_THROWS_AS(read_feature_store(dir.path / "cut.shfs"), DataError);
  bytes = read_file_bytes(path);
  bytes[0] = 'X';
  write_file_bytes(dir.path / "magic.shfs", bytes);
  CHECK_THROWS_AS(read_feature_store(dir.path / "magic.shfs"), DataError);
}
}
