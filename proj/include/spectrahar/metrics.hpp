#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace spectrahar {

struct MetricValue {
  double mean = 0.0;
  double bootstrap_std = 0.0;
};

struct ClassMetric {
  std::string label;
  double f1 = 0.0;
  double recall = 0.0;
  long support = 0;
};

struct MetricReport {
  MetricValue accuracy;
  MetricValue macro_f1;
  MetricValue balanced_accuracy;
  MetricValue top1;
  MetricValue top5;
  std::vector<std::string> class_labels;
  std::vector<std::vector<long>> confusion;  // [true][predicted]
  std::vector<ClassMetric> per_class;
  std::size_t n_windows = 0;
};

inline constexpr int kDefaultBootstrap = 1000;

/// Point metrics and predictions from a score matrix (one row per window,
/// columns aligned with class_labels). The prediction is the highest score,
/// lowest index on ties. Throws UsageError on empty or mismatched input.
MetricReport compute_metrics(const std::vector<int>& y_true, const Eigen::MatrixXd& scores,
                             const std::vector<std::string>& class_labels, int bootstrap_B = kDefaultBootstrap,
                             std::uint64_t seed = 0);

/// Metrics of hard labels only; top-k equals accuracy.
MetricReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                             const std::vector<std::string>& class_labels, int bootstrap_B = kDefaultBootstrap,
                             std::uint64_t seed = 0);

/// Macro-F1 over all classes: a class with no true and no predicted samples
/// scores 0 and still counts in the denominator.
double macro_f1(const std::vector<std::vector<long>>& confusion);
/// Mean recall over classes with nonzero support.
double balanced_accuracy(const std::vector<std::vector<long>>& confusion);
/// Row-normalized percentages; all-zero rows stay 0.
std::vector<std::vector<double>> row_percentages(const std::vector<std::vector<long>>& confusion);

nlohmann::json to_json(const MetricReport& report);

/// CSV: header row of predicted labels, count block, blank line, then the
/// row-percentage block. SVG: standalone heatmap with count and percentage text.
void emit_confusion(const MetricReport& report, const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path);
std::string confusion_svg(const MetricReport& report);

}  // namespace spectrahar
