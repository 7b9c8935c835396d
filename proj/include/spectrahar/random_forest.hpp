#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace spectrahar {

struct ForestParams {
  int n_trees = 100;
  int max_features = 0;  // 0 = floor(sqrt(D))
  std::uint64_t seed = 0;
};

/// CART tree with Gini splits, unlimited depth, min samples per split 2.
/// A sample goes left when value <= threshold.
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };
  std::vector<Node> nodes;

  int predict(const Eigen::Ref<const Eigen::VectorXd>& row) const;
};

struct RandomForest {
  int n_classes = 0;
  std::vector<DecisionTree> trees;

  /// Fraction of trees voting for each class.
  Eigen::VectorXd vote_fractions(const Eigen::Ref<const Eigen::VectorXd>& row) const;
};

/// Bootstrap-sampled trees; tree t draws from a stream seeded by
/// (params.seed, t), so the result does not depend on `threads`.
/// Labels are class indices in [0, n_classes).
RandomForest fit_random_forest(const Eigen::MatrixXd& rows, const std::vector<int>& labels, int n_classes,
                               const ForestParams& params, unsigned threads = 1);

/// SplitMix64 step; derives independent per-item seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace spectrahar
