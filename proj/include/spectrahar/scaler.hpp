#pragma once

#include <Eigen/Dense>

namespace spectrahar {

/// Standardization fitted on training rows: (x - mean) / std, population std,
/// with std < 1e-12 replaced by 1.
struct Scaler {
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  Eigen::Index dimension() const { return means.size(); }
};

/// Rows are samples. Throws UsageError for an empty matrix.
Scaler fit_scaler(const Eigen::MatrixXd& rows);
Eigen::VectorXd apply_scaler(const Scaler& scaler, const Eigen::VectorXd& row);
void apply_scaler_in_place(const Scaler& scaler, Eigen::MatrixXd& rows);

}  // namespace spectrahar
