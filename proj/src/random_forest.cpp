#include "spectrahar/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "spectrahar/errors.hpp"
#include "spectrahar/parallel.hpp"

namespace spectrahar {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int DecisionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& row) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    const auto& n = nodes[at];
    at = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[at].label;
}

Eigen::VectorXd RandomForest::vote_fractions(const Eigen::Ref<const Eigen::VectorXd>& row) const {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
  for (const auto& t : trees) votes[t.predict(row)] += 1.0;
  return votes / static_cast<double>(trees.size());
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = -1.0;  // sum over sides of sum_c count_c^2 / n_side; larger is purer
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, const std::vector<int>& y, int n_classes, int max_features,
              std::uint64_t seed)
      : X_(X), y_(y), n_classes_(n_classes), max_features_(max_features), rng_(seed) {}

  DecisionTree build() {
    const auto n = static_cast<std::size_t>(X_.rows());
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<int> samples(n);
    for (auto& s : samples) s = static_cast<int>(pick(rng_));

    DecisionTree tree;
    tree.nodes.emplace_back();
    struct Pending {
      int node;
      std::vector<int> samples;
    };
    std::vector<Pending> stack;
    stack.push_back({0, std::move(samples)});
    while (!stack.empty()) {
      Pending p = std::move(stack.back());
      stack.pop_back();
      tree.nodes[p.node].label = majority(p.samples);
      if (p.samples.size() < 2 || is_pure(p.samples)) continue;
      const Split split = best_split(p.samples);
      if (split.feature < 0) continue;

      std::vector<int> left, right;
      for (int s : p.samples) (X_(s, split.feature) <= split.threshold ? left : right).push_back(s);
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[p.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = l;
      node.right = l + 1;
      stack.push_back({l + 1, std::move(right)});
      stack.push_back({l, std::move(left)});
    }
    return tree;
  }

 private:
  int majority(const std::vector<int>& samples) const {
    std::vector<int> counts(n_classes_, 0);
    for (int s : samples) ++counts[y_[s]];
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  bool is_pure(const std::vector<int>& samples) const {
    for (int s : samples)
      if (y_[s] != y_[samples.front()]) return false;
    return true;
  }

  // Draws features in a random order; the first max_features are always
  // scanned, and scanning continues past them until a valid split exists.
  Split best_split(const std::vector<int>& samples) {
    const int D = static_cast<int>(X_.cols());
    std::vector<int> order(D);
    std::iota(order.begin(), order.end(), 0);
    Split best;
    std::vector<std::pair<double, int>> column(samples.size());
    std::vector<double> left_counts(n_classes_), total_counts(n_classes_, 0.0);
    for (int s : samples) total_counts[y_[s]] += 1.0;
    const double n = static_cast<double>(samples.size());

    for (int k = 0; k < D; ++k) {
      if (k >= max_features_ && best.feature >= 0) break;
      std::uniform_int_distribution<int> pick(k, D - 1);
      std::swap(order[k], order[pick(rng_)]);
      const int f = order[k];

      for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {X_(samples[i], f), y_[samples[i]]};
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      double sq_left = 0.0;
      double sq_right = 0.0;
      for (double c : total_counts) sq_right += c * c;
      std::vector<double> right_counts = total_counts;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const int c = column[i].second;
        sq_left += 2.0 * left_counts[c] + 1.0;
        left_counts[c] += 1.0;
        sq_right -= 2.0 * right_counts[c] - 1.0;
        right_counts[c] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        const double score = sq_left / nl + sq_right / (n - nl);
        if (score > best.score) {
          best.score = score;
          best.feature = f;
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          // midpoint can round up onto the right value for adjacent doubles
          if (best.threshold >= column[i + 1].first) best.threshold = column[i].first;
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& X_;
  const std::vector<int>& y_;
  int n_classes_;
  int max_features_;
  std::mt19937_64 rng_;
};

}  // namespace

RandomForest fit_random_forest(const Eigen::MatrixXd& rows, const std::vector<int>& labels, int n_classes,
                               const ForestParams& params, unsigned threads) {
  if (rows.rows() == 0) throw UsageError("random forest needs training rows");
  if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw UsageError("row/label count mismatch");
  if (params.n_trees < 1) throw UsageError("random forest needs n_trees >= 1");
  const int D = static_cast<int>(rows.cols());
  const int max_features =
      params.max_features > 0 ? std::min(params.max_features, D)
                              : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(D)))));
  RandomForest forest;
  forest.n_classes = n_classes;
  forest.trees.resize(static_cast<std::size_t>(params.n_trees));
  parallel_for(forest.trees.size(), threads, [&](std::size_t t) {
    TreeBuilder builder(rows, labels, n_classes, max_features, derive_seed(params.seed, t));
    forest.trees[t] = builder.build();
  });
  return forest;
}

}  // namespace spectrahar
