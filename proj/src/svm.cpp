#include "spectrahar/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "spectrahar/errors.hpp"
#include "spectrahar/parallel.hpp"

namespace spectrahar {

namespace {
constexpr double kTau = 1e-12;
}

double scale_gamma(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0 || rows.cols() == 0) return 1.0;
  const Eigen::RowVectorXd mu = rows.colwise().mean();
  const double mean_var = (rows.rowwise() - mu).array().square().mean();
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(rows.cols()) * mean_var) : 1.0;
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma) {
  const Eigen::VectorXd na = a.rowwise().squaredNorm();
  const Eigen::VectorXd nb = b.rowwise().squaredNorm();
  Eigen::MatrixXd k = a * b.transpose();
  for (Eigen::Index j = 0; j < k.cols(); ++j)
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      const double d2 = std::max(0.0, na[i] + nb[j] - 2.0 * k(i, j));
      k(i, j) = std::exp(-gamma * d2);
    }
  return k;
}

DualSolution solve_svm_dual(const Eigen::MatrixXd& K, const std::vector<int>& y, double C, double tolerance,
                            long max_iterations) {
  const Eigen::Index n = K.rows();
  DualSolution sol;
  sol.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd& alpha = sol.alpha;
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);
  if (max_iterations <= 0) max_iterations = std::max<long>(10000000L, 100L * static_cast<long>(n));

  auto at_upper = [&](Eigen::Index t) { return alpha[t] >= C; };
  auto at_lower = [&](Eigen::Index t) { return alpha[t] <= 0.0; };
  auto q = [&](Eigen::Index a, Eigen::Index b) { return static_cast<double>(y[a] * y[b]) * K(a, b); };

  while (true) {
    if (sol.iterations >= max_iterations) {
      sol.converged = false;
      break;
    }
    // i: maximal -y_t G_t over I_up
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -G[t] >= g_max) { g_max = -G[t]; i = t; }
      } else {
        if (!at_lower(t) && G[t] >= g_max) { g_max = G[t]; i = t; }
      }
    }
    if (i < 0) break;
    // j: second-order selection over I_low
    double g_max2 = -std::numeric_limits<double>::infinity();
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (at_lower(t)) continue;
        const double grad_diff = g_max + G[t];
        g_max2 = std::max(g_max2, G[t]);
        if (grad_diff > 0.0) {
          double quad = K(i, i) + K(t, t) - 2.0 * y[i] * q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = g_max - G[t];
        g_max2 = std::max(g_max2, -G[t]);
        if (grad_diff > 0.0) {
          double quad = K(i, i) + K(t, t) + 2.0 * y[i] * q(i, t);
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) { best_obj = obj; j = t; }
        }
      }
    }
    if (g_max + g_max2 < tolerance || j < 0) break;
    ++sol.iterations;

    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double d_i = alpha[i] - old_i, d_j = alpha[j] - old_j;
    for (Eigen::Index t = 0; t < n; ++t) G[t] += q(t, i) * d_i + q(t, j) * d_j;
  }

  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (at_upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  return sol;
}

std::vector<double> SvmModel::decision_values(const Eigen::Ref<const Eigen::VectorXd>& row) const {
  const Eigen::Index n_sv = support_vectors.rows();
  Eigen::VectorXd k(n_sv);
  const double row_sq = row.squaredNorm();
  for (Eigen::Index s = 0; s < n_sv; ++s) {
    const double d2 = std::max(0.0, support_vectors.row(s).squaredNorm() + row_sq - 2.0 * support_vectors.row(s).dot(row));
    k[s] = std::exp(-gamma * d2);
  }
  std::vector<double> out;
  out.reserve(machines.size());
  for (const auto& m : machines) {
    double f = -m.rho;
    for (std::size_t t = 0; t < m.support.size(); ++t) f += m.coef[t] * k[m.support[t]];
    out.push_back(f);
  }
  return out;
}

Eigen::VectorXd SvmModel::class_scores(const Eigen::Ref<const Eigen::VectorXd>& row) const {
  const auto dec = decision_values(row);
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
  Eigen::VectorXd strength = Eigen::VectorXd::Zero(n_classes);
  for (std::size_t p = 0; p < machines.size(); ++p) {
    const auto& m = machines[p];
    votes[dec[p] > 0.0 ? m.positive : m.negative] += 1.0;
    strength[m.positive] += dec[p];
    strength[m.negative] -= dec[p];
  }
  for (int c = 0; c < n_classes; ++c) votes[c] += 0.5 / (1.0 + std::exp(-strength[c]));
  return votes;
}

bool SvmModel::converged() const {
  return std::all_of(machines.begin(), machines.end(), [](const BinarySvm& m) { return m.converged; });
}

SvmModel fit_svm(const Eigen::MatrixXd& rows, const std::vector<int>& labels, int n_classes, const SvmParams& params,
                 unsigned threads) {
  if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw UsageError("row/label count mismatch");
  if (!(params.C > 0.0)) throw UsageError("SVM C must be > 0");
  SvmModel model;
  model.n_classes = n_classes;
  model.C = params.C;
  model.gamma = params.gamma ? *params.gamma : scale_gamma(rows);
  if (!(model.gamma > 0.0)) throw UsageError("SVM gamma must be > 0");

  std::vector<std::vector<int>> members(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<int>(i));

  struct PairResult {
    BinarySvm machine;
    std::vector<int> rows;  // training row of each support coefficient
  };
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n_classes; ++a)
    for (int b = a + 1; b < n_classes; ++b) pairs.emplace_back(a, b);
  std::vector<PairResult> results(pairs.size());

  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [a, b] = pairs[p];
    std::vector<int> idx = members[a];
    idx.insert(idx.end(), members[b].begin(), members[b].end());
    std::vector<int> y(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) y[t] = labels[idx[t]] == a ? 1 : -1;
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), rows.cols());
    for (std::size_t t = 0; t < idx.size(); ++t) sub.row(static_cast<Eigen::Index>(t)) = rows.row(idx[t]);

    PairResult& r = results[p];
    r.machine.positive = a;
    r.machine.negative = b;
    if (members[a].empty() || members[b].empty()) {
      // one side absent from training: a constant vote for the present class
      r.machine.rho = members[a].empty() ? 1.0 : -1.0;
      return;
    }
    const auto sol = solve_svm_dual(rbf_kernel(sub, sub, model.gamma), y, params.C, params.tolerance,
                                    params.max_iterations);
    r.machine.rho = sol.rho;
    r.machine.iterations = sol.iterations;
    r.machine.converged = sol.converged;
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (sol.alpha[static_cast<Eigen::Index>(t)] > 0.0) {
        r.rows.push_back(idx[t]);
        r.machine.coef.push_back(sol.alpha[static_cast<Eigen::Index>(t)] * y[t]);
      }
    }
  });

  std::map<int, int> sv_slot;
  for (const auto& r : results)
    for (int row : r.rows) sv_slot.emplace(row, 0);
  int next = 0;
  for (auto& [row, slot] : sv_slot) slot = next++;
  model.support_vectors.resize(next, rows.cols());
  for (const auto& [row, slot] : sv_slot) model.support_vectors.row(slot) = rows.row(row);
  for (auto& r : results) {
    for (int row : r.rows) r.machine.support.push_back(sv_slot.at(row));
    model.machines.push_back(std::move(r.machine));
  }
  return model;
}

}  // namespace spectrahar
