#pragma once

#include <Eigen/Dense>

namespace spectrahar {

struct PcaProjection {
  Eigen::MatrixXd components;          // n_components x D, orthonormal rows
  Eigen::VectorXd means;               // D
  Eigen::VectorXd explained_variance;  // per kept component
  double total_variance = 0.0;

  Eigen::Index n_components() const { return components.rows(); }
};

/// Top eigenvectors of the training covariance, each sign-canonical. The
/// effective count is min(requested, D, n_train, rank). When D exceeds the
/// number of rows the same eigenvectors are obtained from the Gram matrix.
PcaProjection fit_pca(const Eigen::MatrixXd& rows, Eigen::Index n_components);
Eigen::VectorXd project(const PcaProjection& pca, const Eigen::VectorXd& row);
Eigen::MatrixXd project_rows(const PcaProjection& pca, const Eigen::MatrixXd& rows);

}  // namespace spectrahar
