#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace spectrahar {

struct SvmParams {
  double C = 1.0;
  std::optional<double> gamma;  // nullopt = "scale": 1 / (D * mean column variance)
  double tolerance = 1e-3;      // maximal KKT violation at exit
  long max_iterations = 0;      // 0 = max(10^7, 100 * n)
};

/// One binary RBF machine of the one-vs-one ensemble. Sample labels are +1
/// for `positive` and -1 for `negative`; decision(x) = sum coef_i K(sv_i, x) - rho.
struct BinarySvm {
  int positive = 0;
  int negative = 0;
  std::vector<int> support;    // indices into SvmModel::support_vectors rows
  std::vector<double> coef;    // alpha_i * y_i
  double rho = 0.0;
  long iterations = 0;
  bool converged = true;
};

struct SvmModel {
  int n_classes = 0;
  double gamma = 1.0;
  double C = 1.0;
  Eigen::MatrixXd support_vectors;  // union over machines
  std::vector<BinarySvm> machines;  // pairs (a, b), a < b, lexicographic

  /// Per class: one-vs-one votes, plus logistic(summed oriented decision
  /// values) / 2 so that ties in votes break by decision strength.
  Eigen::VectorXd class_scores(const Eigen::Ref<const Eigen::VectorXd>& row) const;
  std::vector<double> decision_values(const Eigen::Ref<const Eigen::VectorXd>& row) const;
  bool converged() const;
};

double scale_gamma(const Eigen::MatrixXd& rows);

/// Result of the SMO dual solve for one binary problem, exposed for tests.
struct DualSolution {
  Eigen::VectorXd alpha;
  double rho = 0.0;
  long iterations = 0;
  bool converged = true;
};

/// min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij, solved with
/// maximal-violating-pair SMO using second-order working set selection.
DualSolution solve_svm_dual(const Eigen::MatrixXd& kernel, const std::vector<int>& y, double C, double tolerance,
                            long max_iterations);

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma);

/// Labels are class indices in [0, n_classes). Binary problems run in
/// parallel; results are independent of `threads`.
SvmModel fit_svm(const Eigen::MatrixXd& rows, const std::vector<int>& labels, int n_classes, const SvmParams& params,
                 unsigned threads = 1);

}  // namespace spectrahar
