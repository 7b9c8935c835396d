#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

#ifndef SPECTRAHAR_CLI
#error "SPECTRAHAR_CLI must name the CLI binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string("'") + SPECTRAHAR_CLI + "' " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
TEST_CASE("inspect-spectrum on a two-point frame") {
  oracle::TempDir dir("cli_inspect");
  std::ofstream(dir.path / "two.xyz") << "0 0 0\n0 0.05 0\n";
  const auto r = run("inspect-spectrum " + q(dir.path / "two.xyz") + " --radius 0.1");
  CHECK(r.code == 0);
  CHECK(r.out == "0,2\n");
  const auto k1 = run("inspect-spectrum " + q(dir.path / "two.xyz") + " --radius 0.1 --k 1");
  CHECK(k1.out == "0\n");
  const auto apart = run("inspect-spectrum " + q(dir.path / "two.xyz") + " --radius 0.05");
  CHECK(apart.out == "0,0\n");
}

TEST_CASE("usage and data errors map to exit codes") {
  CHECK(run("").code == 1);
  CHECK(run("no-such-command").code == 1);
  CHECK(run("features --manifest").code == 1);
  CHECK(run("features --manifest /nonexistent/manifest.jsonl --out /tmp/x.store").code == 2);
  CHECK(run("inspect-spectrum /nonexistent.xyz").code == 2);
}

TEST_CASE("end-to-end pipeline") {
  oracle::TempDir dir("cli_pipeline");
  const auto data = dir.path / "data";
  auto r = run("synth --out " + q(data) +
               " --subjects 4 --activities 3 --frames 40 --points 100 --seed 9 --mirrored-pairs 1");
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(data / "manifest.jsonl"));
  CHECK(fs::exists(data / "run_config.json"));

  const std::string feat_flags = " --window 2 --stride 1 --k-val 20 --k-vec 10";
  r = run("--threads 1 features --manifest " + q(data / "manifest.jsonl") + " --out " + q(dir.path / "t1.store") +
          feat_flags);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("windows 36") != std::string::npos);
  CHECK(fs::exists(dir.path / "t1.store.run_config.json"));

  SUBCASE("thread count does not change the store") {
    r = run("--threads 2 features --manifest " + q(data / "manifest.jsonl") + " --out " +
            q(dir.path / "t2.store") + feat_flags);
    REQUIRE(r.code == 0);
    CHECK(slurp(dir.path / "t1.store") == slurp(dir.path / "t2.store"));
  }

  SUBCASE("train, eval and predict") {
    r = run("train --store " + q(dir.path / "t1.store") + " --split holdout:1 --out " + q(dir.path / "m.model"));
    REQUIRE(r.code == 0);
    r = run("eval --model " + q(dir.path / "m.model") + " --store " + q(dir.path / "t1.store") +
            " --split holdout:1 --bootstrap 50 --out " + q(dir.path / "report"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("accuracy") != std::string::npos);
    CHECK(r.out.find("\xC2\xB1") != std::string::npos);
    for (const char* f : {"report.json", "confusion.csv", "confusion.svg", "run_config.json"})
      CHECK(fs::exists(dir.path / "report" / f));

    // Evaluating from the manifest re-extracts with the model's configuration.
    const auto again = run("eval --model " + q(dir.path / "m.model") + " --manifest " + q(data / "manifest.jsonl") +
                           " --split holdout:1 --bootstrap 50 --out " + q(dir.path / "report2"));
    REQUIRE(again.code == 0);
    CHECK(slurp(dir.path / "report" / "report.json") == slurp(dir.path / "report2" / "report.json"));

    std::string frames;
    const auto seq = data / "frames";
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(seq)) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dirs.front())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < 25; ++i) frames += " " + q(files[i]);
    r = run("predict --model " + q(dir.path / "m.model") + " --top 2" + frames);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("window_start,rank,label,score\n", 0) == 0);

    std::string few;
    for (std::size_t i = 0; i < 5; ++i) few += " " + q(files[i]);
    r = run("predict --model " + q(dir.path / "m.model") + few);
    CHECK(r.code == 2);
    CHECK(r.out.find("insufficient frames") != std::string::npos);
  }
}
}
