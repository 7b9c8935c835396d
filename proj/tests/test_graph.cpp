#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spectrahar/errors.hpp"
#include "spectrahar/graph.hpp"

using namespace spectrahar;

TEST_SUITE("graph") {
TEST_CASE("edge rule is strict") {
  std::vector<Point3> pts = {Point3(0, 0, 0), Point3(0.1, 0, 0), Point3(0.25, 0, 0)};
  const auto g = build_graph(pts, 0.15);
  // 1-2 sits exactly at the radius
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0] == std::pair<std::uint32_t, std::uint32_t>(0, 1));
}

TEST_CASE("points exactly at the radius are not connected") {
  std::vector<Point3> pts = {Point3(0, 0, 0), Point3(0.5, 0, 0)};
  CHECK(build_graph(pts, 0.5).edges.empty());
  CHECK(build_graph(pts, 0.5000001).edges.size() == 1);
}

TEST_CASE("spatial hash matches the brute-force oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 20 + trial * 7;
    const auto pts = oracle::random_cloud(rng, n, 0.6);
    const double r = 0.05 + 0.01 * (trial % 10);
    const auto g = build_graph(pts, r);
    const auto ref = oracle::brute_force_edges(pts, r);
    std::set<std::pair<int, int>> got;
    for (auto [i, j] : g.edges) got.insert({static_cast<int>(i), static_cast<int>(j)});
    CHECK(got == ref);
  }
}

TEST_CASE("Laplacian is symmetric with zero row sums") {
  std::mt19937_64 rng(3);
  const auto pts = oracle::random_cloud(rng, 80, 0.5);
  const auto g = build_graph(pts, 0.12);
  const Eigen::MatrixXd L = laplacian(g).dense();
  CHECK((L - L.transpose()).norm() == 0.0);
  CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 0; i < g.n_vertices; ++i) CHECK(L(i, i) == g.degrees[i]);
}

TEST_CASE("connected components") {
  std::vector<Point3> pts = {Point3(0, 0, 0), Point3(0.1, 0, 0), Point3(5, 5, 5), Point3(9, 9, 9),
                             Point3(9.05, 9, 9)};
  const auto g = build_graph(pts, 0.15);
  CHECK(connected_components(g) == 3);
  const auto labels = component_labels(g);
  CHECK(labels[0] == labels[1]);
  CHECK(labels[3] == labels[4]);
  CHECK(labels[0] != labels[2]);
}

TEST_CASE("invalid input") {
  CHECK_THROWS_AS(build_graph(std::vector<Point3>{}, 0.15), DataError);
  CHECK_THROWS_AS(build_graph(std::vector<Point3>{Point3::Zero()}, 0.0), UsageError);
}
}
