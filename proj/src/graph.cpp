#include "spectrahar/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "spectrahar/errors.hpp"

namespace spectrahar {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4FULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

ProximityGraph build_graph(std::span<const Point3> points, double radius_m) {
  if (!(radius_m > 0.0)) throw UsageError("graph radius must be > 0");
  if (points.empty()) throw DataError("cannot build a graph from an empty frame");

  ProximityGraph g;
  g.n_vertices = points.size();
  g.radius_m = radius_m;
  g.degrees.assign(points.size(), 0);

  auto cell_of = [radius_m](const Point3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p[0] / radius_m)),
                   static_cast<std::int64_t>(std::floor(p[1] / radius_m)),
                   static_cast<std::int64_t>(std::floor(p[2] / radius_m))};
  };

  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> cells;
  cells.reserve(points.size());
  for (std::uint32_t i = 0; i < points.size(); ++i) cells[cell_of(points[i])].push_back(i);

  // Squared-distance prefilter with slack; the exact predicate is sqrt(d2) < r.
  const double r2_hi = radius_m * radius_m * (1.0 + 1e-9);
  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Point3& p = points[i];
    const CellKey c = cell_of(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end()) continue;
          for (std::uint32_t j : it->second) {
            if (j <= i) continue;
            const double ex = p[0] - points[j][0];
            const double ey = p[1] - points[j][1];
            const double ez = p[2] - points[j][2];
            const double d2 = ex * ex + ey * ey + ez * ez;
            if (d2 < r2_hi && std::sqrt(d2) < radius_m) g.edges.emplace_back(i, j);
          }
        }
  }
  std::sort(g.edges.begin(), g.edges.end());
  for (const auto& [i, j] : g.edges) {
    ++g.degrees[i];
    ++g.degrees[j];
  }
  return g;
}

LaplacianMatrix laplacian(const ProximityGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.n_vertices);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.n_vertices + 2 * graph.edges.size());
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, graph.degrees[i]);
  for (const auto& [i, j] : graph.edges) {
    triplets.emplace_back(i, j, -1.0);
    triplets.emplace_back(j, i, -1.0);
  }
  LaplacianMatrix L;
  L.entries.resize(n, n);
  L.entries.setFromTriplets(triplets.begin(), triplets.end());
  L.entries.makeCompressed();
  return L;
}

std::vector<int> component_labels(const ProximityGraph& graph) {
  std::vector<int> parent(graph.n_vertices);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& [i, j] : graph.edges) {
    int a = find_root(parent, static_cast<int>(i));
    int b = find_root(parent, static_cast<int>(j));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> label(graph.n_vertices, -1);
  std::vector<int> root_label(graph.n_vertices, -1);
  int next = 0;
  for (std::size_t v = 0; v < graph.n_vertices; ++v) {
    int r = find_root(parent, static_cast<int>(v));
    if (root_label[r] < 0) root_label[r] = next++;
    label[v] = root_label[r];
  }
  return label;
}

int connected_components(const ProximityGraph& graph) {
  const auto labels = component_labels(graph);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

void write_edge_list(const std::filesystem::path& path, const ProximityGraph& graph) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [i, j] : graph.edges) out << i << ' ' << j << '\n';
}

}  // namespace spectrahar
