#pragma once

// Independent reference implementations used only by tests. They share no
// code with the library.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

namespace oracle {

using Point = Eigen::Vector3d;

/// O(N^2) radius graph with the strict rule |p_i - p_j| < r.
inline std::set<std::pair<int, int>> brute_force_edges(const std::vector<Point>& pts, double r) {
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i < static_cast<int>(pts.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(pts.size()); ++j)
      if ((pts[i] - pts[j]).norm() < r) edges.insert({i, j});
  return edges;
}

inline Eigen::MatrixXd laplacian_from_edges(int n, const std::set<std::pair<int, int>>& edges) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : edges) {
    L(i, j) -= 1;
    L(j, i) -= 1;
    L(i, i) += 1;
    L(j, j) += 1;
  }
  return L;
}

struct Eigenpairs {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // matching columns
};

/// Cyclic Jacobi rotations; slow but simple and independent of LAPACK.
inline Eigenpairs jacobi_eigen(Eigen::MatrixXd A, int max_sweeps = 100) {
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return A(a, a) < A(b, b); });
  Eigenpairs out;
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values.push_back(A(order[i], order[i]));
    out.vectors.col(i) = V.col(order[i]);
  }
  return out;
}

inline double mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / x.size();
}

inline double pop_std(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / x.size());
}

/// Linear interpolation between order statistics at q * (n - 1).
inline double percentile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * (x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - lo) * (x[hi] - x[lo]);
}

inline double skewness(const std::vector<double>& x) {
  const double m = mean(x), s = pop_std(x);
  if (s * s < 1e-12) return 0.0;
  double acc = 0;
  for (double v : x) acc += std::pow((v - m) / s, 3);
  return acc / x.size();
}

inline double excess_kurtosis(const std::vector<double>& x) {
  const double m = mean(x), s = pop_std(x);
  if (s * s < 1e-12) return 0.0;
  double acc = 0;
  for (double v : x) acc += std::pow((v - m) / s, 4);
  return acc / x.size() - 3.0;
}

inline std::vector<Point> random_cloud(std::mt19937_64& rng, int n, double extent) {
  std::uniform_real_distribution<double> u(0.0, extent);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = Point(u(rng), u(rng), u(rng));
  return pts;
}

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("spectrahar_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace oracle
