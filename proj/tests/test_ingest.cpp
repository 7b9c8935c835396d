#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "oracles.hpp"
#include "spectrahar/errors.hpp"
#include "spectrahar/ingest.hpp"

using namespace spectrahar;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

}  // namespace

TEST_SUITE("ingest") {
TEST_CASE("xyz reader skips comments and blank lines") {
  oracle::TempDir dir("xyz");
  write_text(dir.path / "a.xyz", "# header\n0 0 0\n\n1.5 -2 3e-1\n");
  const auto f = load_frame(dir.path / "a.xyz");
  REQUIRE(f.size() == 2);
  CHECK(f.points[1].isApprox(Point3(1.5, -2, 0.3)));
}

TEST_CASE("xyz reader rejects malformed lines with a line number") {
  oracle::TempDir dir("xyzbad");
  write_text(dir.path / "a.xyz", "0 0 0\n1 two 3\n");
  try {
    load_frame(dir.path / "a.xyz");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("frame formats round-trip") {
  oracle::TempDir dir("fmt");
  FrameCloud f;
  f.points = {Point3(0.25, 1.5, -0.75), Point3(1, 2, 3), Point3(-0.5, 0.125, 4)};
  for (const char* ext : {".bin", ".xyz", ".ply"}) {
    const auto p = dir.path / (std::string("f") + ext);
    write_frame(p, f);
    const auto g = load_frame(p);
    REQUIRE(g.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) CHECK((g.points[i] - f.points[i]).norm() < 1e-6);
  }
}

TEST_CASE("truncated bin is a data error") {
  oracle::TempDir dir("trunc");
  write_text(dir.path / "a.bin", std::string(13, '\0'));
  CHECK_THROWS_AS(load_frame(dir.path / "a.bin"), DataError);
}

TEST_CASE("non-finite points are dropped and counted") {
  oracle::TempDir dir("nan");
  write_text(dir.path / "a.xyz", "0 0 0\nnan 1 2\n1 inf 1\n2 2 2\n");
  const auto f = load_frame(dir.path / "a.xyz");
  CHECK(f.size() == 2);
  CHECK(f.dropped_nonfinite == 2);
}

TEST_CASE("ascii ply with extra properties") {
  oracle::TempDir dir("ply");
  write_text(dir.path / "a.ply",
             "ply\nformat ascii 1.0\nelement vertex 2\nproperty float intensity\nproperty float x\n"
             "property float y\nproperty float z\nelement face 0\nproperty list uchar int vertex_indices\n"
             "end_header\n7 1 2 3\n8 4 5 6\n");
  const auto f = load_frame(dir.path / "a.ply");
  REQUIRE(f.size() == 2);
  CHECK(f.points[1].isApprox(Point3(4, 5, 6)));
}

TEST_CASE("axis convention reorders coordinates") {
  oracle::TempDir dir("axes");
  write_text(dir.path / "a.xyz", "1 2 3\n");
  const auto f = load_frame(dir.path / "a.xyz", AxisConvention::parse("YZX"));
  CHECK(f.points[0].isApprox(Point3(2, 3, 1)));
  CHECK_THROWS_AS(AxisConvention::parse("XXZ"), DataError);
}

TEST_CASE("manifest parsing") {
  oracle::TempDir dir("manifest");
  write_text(dir.path / "m.jsonl",
             R"({"sequence_id":"q1","subject_id":"s1","activity_id":"a","environment_id":"E1","frames":["f/0.bin"],"extra":1})"
             "\n\n"
             R"({"sequence_id":"q2","subject_id":"s1","activity_id":"a","environment_id":"E1","frames":["f/1.bin"],"frame_rate_hz":20})"
             "\n");
  const auto m = load_manifest(dir.path / "m.jsonl");
  REQUIRE(m.records.size() == 2);
  CHECK(m.warnings == 1);
  CHECK(m.records[0].frame_paths[0] == dir.path / "f/0.bin");
  CHECK(m.records[0].frame_rate_hz == 10.0);
  CHECK(m.records[1].frame_rate_hz == 20.0);

  SUBCASE("missing field names the line") {
    write_text(dir.path / "bad.jsonl",
               R"({"sequence_id":"q1","subject_id":"s1","activity_id":"a","environment_id":"E1","frames":["f.xyz"]})"
               "\n"
               R"({"sequence_id":"q2","subject_id":"s1","environment_id":"E1","frames":["f.xyz"]})"
               "\n");
    try {
      load_manifest(dir.path / "bad.jsonl");
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("duplicate keys are rejected") {
    write_text(dir.path / "dup.jsonl",
               R"({"sequence_id":"q1","subject_id":"s1","activity_id":"a","environment_id":"E1","frames":[]})"
               "\n"
               R"({"sequence_id":"q1","subject_id":"s1","activity_id":"a","environment_id":"E2","frames":[]})"
               "\n");
    CHECK_THROWS_AS(load_manifest(dir.path / "dup.jsonl"), DataError);
  }
  SUBCASE("write then read preserves records") {
    write_manifest(dir.path / "copy.jsonl", m.records);
    const auto back = load_manifest(dir.path / "copy.jsonl");
    REQUIRE(back.records.size() == 2);
    CHECK(back.records[1].frame_paths == m.records[1].frame_paths);
    CHECK(back.records[1].frame_rate_hz == 20.0);
  }
}

TEST_CASE("bounding box crop honours yaw") {
  FrameCloud f;
  f.points = {Point3(0, 0, 0), Point3(0.9, 0, 0), Point3(0, 0, 0.9), Point3(2, 0, 0)};
  BoundingBox box;
  box.size = Point3(2.0, 1.0, 0.5);  // wide laterally, shallow in depth
  CHECK(crop_to_bbox(f, box).size() == 2);  // origin and (0.9, 0, 0)
  box.yaw = std::acos(-1.0) / 2;  // rotate so the long side runs along depth
  const auto c = crop_to_bbox(f, box);
  CHECK(c.size() == 2);  // origin and (0, 0, 0.9)
  CHECK(c.points[1].isApprox(Point3(0, 0, 0.9)));
}
}
