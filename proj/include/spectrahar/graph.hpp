#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "spectrahar/ingest.hpp"

namespace spectrahar {

inline constexpr double kDefaultRadius = 0.15;

/// Undirected epsilon-graph: edge (i, j) iff ||p_i - p_j|| < radius.
/// Edges are stored once with i < j, sorted lexicographically.
struct ProximityGraph {
  std::size_t n_vertices = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<int> degrees;
  double radius_m = kDefaultRadius;
};

/// Combinatorial Laplacian L = D - A.
struct LaplacianMatrix {
  Eigen::SparseMatrix<double> entries;

  Eigen::Index dimension() const { return entries.rows(); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(entries); }
};

/// Uniform spatial hash with cell edge = radius; candidates come from the 27
/// neighbouring cells. Throws DataError for an empty point set.
ProximityGraph build_graph(std::span<const Point3> points, double radius_m = kDefaultRadius);
inline ProximityGraph build_graph(const FrameCloud& frame, double radius_m = kDefaultRadius) {
  return build_graph(std::span<const Point3>(frame.points), radius_m);
}

LaplacianMatrix laplacian(const ProximityGraph& graph);

int connected_components(const ProximityGraph& graph);

/// Component id per vertex, numbered in order of lowest member index.
std::vector<int> component_labels(const ProximityGraph& graph);

/// "i j" per line, for external viewers.
void write_edge_list(const std::filesystem::path& path, const ProximityGraph& graph);

}  // namespace spectrahar
