#include "spectrahar/scaler.hpp"

#include <cmath>

#include "spectrahar/errors.hpp"

namespace spectrahar {

Scaler fit_scaler(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw UsageError("cannot fit a scaler on an empty training set");
  Scaler s;
  s.means = rows.colwise().mean().transpose();
  s.stds.resize(rows.cols());
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    const double var = (rows.col(c).array() - s.means[c]).square().mean();
    const double sd = std::sqrt(var);
    s.stds[c] = sd < 1e-12 ? 1.0 : sd;
  }
  return s;
}

Eigen::VectorXd apply_scaler(const Scaler& scaler, const Eigen::VectorXd& row) {
  if (row.size() != scaler.dimension()) throw UsageError("scaler dimension mismatch");
  return (row - scaler.means).cwiseQuotient(scaler.stds);
}

void apply_scaler_in_place(const Scaler& scaler, Eigen::MatrixXd& rows) {
  if (rows.cols() != scaler.dimension()) throw UsageError("scaler dimension mismatch");
  for (Eigen::Index c = 0; c < rows.cols(); ++c)
    rows.col(c) = (rows.col(c).array() - scaler.means[c]) / scaler.stds[c];
}

}  // namespace spectrahar
