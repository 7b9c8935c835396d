#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spectrahar/errors.hpp"
#include "spectrahar/features.hpp"
#include "spectrahar/pca.hpp"
#include "spectrahar/random_forest.hpp"
#include "spectrahar/scaler.hpp"
#include "spectrahar/svm.hpp"

namespace spectrahar {

enum class ClassifierKind { RandomForest, SvmRbf };

std::string to_string(ClassifierKind k);
ClassifierKind parse_classifier(const std::string& s);

/// Pinned defaults: RF 100 trees, sqrt features, Gini, unlimited depth;
/// SVM C = 1, gamma = scale, one-vs-one, SMO tolerance 1e-3; PCA off.
struct ModelParams {
  ClassifierKind kind = ClassifierKind::SvmRbf;
  int n_trees = 100;
  int max_features = 0;
  double C = 1.0;
  std::optional<double> gamma;
  double svm_tolerance = 1e-3;
  int pca_components = 0;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ModelParams& p);
ModelParams model_params_from_json(const nlohmann::json& j, ModelParams base = {});

struct TrainedModel {
  ModelParams params;
  FeatureConfig feature_config;  // how input rows were produced
  std::vector<std::string> class_labels;  // sorted, unique
  Scaler scaler;
  std::optional<PcaProjection> pca;
  std::variant<RandomForest, SvmModel> classifier;

  Eigen::Index input_dimension() const { return scaler.dimension(); }
};

class VersionError : public DataError {
 public:
  using DataError::DataError;
};

/// Rows are samples (one window vector each). Throws UsageError with fewer
/// than two distinct labels.
TrainedModel train_model(const Eigen::MatrixXd& rows, const std::vector<std::string>& labels,
                         const ModelParams& params, const FeatureConfig& feature_config = {}, unsigned threads = 1);
TrainedModel train_random_forest(const Eigen::MatrixXd& rows, const std::vector<std::string>& labels,
                                 ModelParams params, unsigned threads = 1);
TrainedModel train_svm_rbf(const Eigen::MatrixXd& rows, const std::vector<std::string>& labels,
                           ModelParams params, unsigned threads = 1);

/// Scores aligned with class_labels: RF vote fractions (sum to 1), SVM votes
/// with a decision-value tie-break in (0, 0.5).
Eigen::VectorXd predict_scores(const TrainedModel& model, const Eigen::VectorXd& row);

/// Class indices by descending score; equal scores keep label order.
std::vector<int> rank_classes(const Eigen::VectorXd& scores);
std::vector<std::string> predict_top_k(const TrainedModel& model, const Eigen::VectorXd& row, std::size_t k);

/// Stacks window vectors into a sample-major double matrix.
Eigen::MatrixXd to_matrix(const std::vector<WindowFeature>& windows);

/// Container: "SHMD" | u32 version | u64 config hash | u64 payload length |
/// payload | u64 FNV-1a of payload.
inline constexpr std::uint32_t kModelFormatVersion = 1;
std::uint64_t model_config_hash(const TrainedModel& model);
std::vector<unsigned char> serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::span<const unsigned char> bytes);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace spectrahar
