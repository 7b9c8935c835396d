#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "spectrahar/graph.hpp"

namespace spectrahar {

inline constexpr int kDefaultKValues = 60;
inline constexpr int kDefaultKVectors = 40;

/// Ascending Laplacian eigenpairs. `eigenvalues` holds the full spectrum when
/// `complete` is set; otherwise only the smallest pairs that were requested.
/// `eigenvectors` columns align with the leading eigenvalues and are
/// sign-canonical (see canonical_sign).
struct Spectrum {
  std::vector<double> eigenvalues;
  Eigen::MatrixXd eigenvectors;
  std::size_t n_vertices = 0;
  bool complete = true;

  Eigen::Index vector_count() const { return eigenvectors.cols(); }
};

struct SpectrumOptions {
  // Above this size the decomposition runs per connected component, with
  // shift-invert Lanczos on any component still larger than the limit.
  std::size_t dense_limit = 2048;
  bool compute_vectors = true;
};

/// Eigenvalues: the full spectrum up to options.dense_limit vertices, else at
/// least the smallest min(N, max(k_values, k_vectors) + 1). Eigenvectors: the
/// leading min(N, k_vectors + 1) when options.compute_vectors is set.
/// Eigenvalues in [-1e-8, 1e-11] * max(1, lambda_max) are set to zero; below
/// that range, or when the eigensolver fails, throws NumericError.
Spectrum decompose(const LaplacianMatrix& L, int k_values = kDefaultKValues,
                   int k_vectors = kDefaultKVectors, const SpectrumOptions& options = {});

/// Flips `v` so that its largest-magnitude entry (lowest index on ties) is
/// non-negative. Throws NumericError for the zero vector.
Eigen::VectorXd canonical_sign(const Eigen::VectorXd& v);
void canonicalize_in_place(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace spectrahar
