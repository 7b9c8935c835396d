#include "spectrahar/pca.hpp"

#include <algorithm>
#include <cmath>

#include "spectrahar/errors.hpp"
#include "spectrahar/spectrum.hpp"

namespace spectrahar {

PcaProjection fit_pca(const Eigen::MatrixXd& rows, Eigen::Index n_components) {
  if (n_components < 1) throw UsageError("PCA needs n_components >= 1");
  if (rows.rows() < 2) throw UsageError("PCA needs at least 2 training rows");
  const Eigen::Index n = rows.rows(), D = rows.cols();

  PcaProjection pca;
  pca.means = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - pca.means.transpose();
  const double denom = static_cast<double>(n - 1);

  // eigenvalues ascending from Eigen; walk from the top
  Eigen::VectorXd values;
  Eigen::MatrixXd directions;  // D x k, unit columns
  if (D <= n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((centered.transpose() * centered) / denom);
    values = es.eigenvalues().reverse();
    directions = es.eigenvectors().rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((centered * centered.transpose()) / denom);
    values = es.eigenvalues().reverse();
    const Eigen::MatrixXd v = es.eigenvectors().rowwise().reverse();
    directions.resize(D, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd d = centered.transpose() * v.col(i);
      const double norm = d.norm();
      directions.col(i) = norm > 0.0 ? Eigen::VectorXd(d / norm) : Eigen::VectorXd::Zero(D);
    }
  }
  pca.total_variance = std::max(0.0, values.sum());

  const double top = std::max(values.size() ? values[0] : 0.0, 0.0);
  Eigen::Index rank = 0;
  while (rank < values.size() && values[rank] > 1e-10 * std::max(top, 1e-300)) ++rank;
  const Eigen::Index keep = std::min({n_components, D, n, rank});
  if (keep == 0) throw NumericError("PCA input has zero variance");

  pca.components.resize(keep, D);
  pca.explained_variance.resize(keep);
  for (Eigen::Index i = 0; i < keep; ++i) {
    pca.components.row(i) = canonical_sign(directions.col(i)).transpose();
    pca.explained_variance[i] = std::max(0.0, values[i]);
  }
  return pca;
}

Eigen::VectorXd project(const PcaProjection& pca, const Eigen::VectorXd& row) {
  if (row.size() != pca.means.size()) throw UsageError("PCA dimension mismatch");
  return pca.components * (row - pca.means);
}

Eigen::MatrixXd project_rows(const PcaProjection& pca, const Eigen::MatrixXd& rows) {
  if (rows.cols() != pca.means.size()) throw UsageError("PCA dimension mismatch");
  return (rows.rowwise() - pca.means.transpose()) * pca.components.transpose();
}

}  // namespace spectrahar
