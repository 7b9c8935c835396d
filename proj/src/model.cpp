#include "spectrahar/model.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "spectrahar/binary_io.hpp"
#include "spectrahar/config_io.hpp"
#include "spectrahar/feature_store.hpp"

namespace spectrahar {

using nlohmann::json;

std::string to_string(ClassifierKind k) { return k == ClassifierKind::RandomForest ? "rf" : "svm"; }

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "rf" || s == "random_forest") return ClassifierKind::RandomForest;
  if (s == "svm" || s == "svm_rbf") return ClassifierKind::SvmRbf;
  throw UsageError("unknown classifier '" + s + "' (expected rf or svm)");
}

json to_json(const ModelParams& p) {
  json j = {{"classifier", to_string(p.kind)},
            {"n_trees", p.n_trees},
            {"max_features", p.max_features},
            {"C", p.C},
            {"svm_tolerance", p.svm_tolerance},
            {"pca_components", p.pca_components},
            {"seed", p.seed}};
  j["gamma"] = p.gamma ? json(*p.gamma) : json("scale");
  return j;
}

ModelParams model_params_from_json(const json& j, ModelParams p) {
  if (!j.is_object()) throw UsageError("model params must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "classifier") p.kind = parse_classifier(v.get<std::string>());
      else if (key == "n_trees") p.n_trees = v.get<int>();
      else if (key == "max_features") p.max_features = v.get<int>();
      else if (key == "C") p.C = v.get<double>();
      else if (key == "svm_tolerance") p.svm_tolerance = v.get<double>();
      else if (key == "pca_components") p.pca_components = v.get<int>();
      else if (key == "seed") p.seed = v.get<std::uint64_t>();
      else if (key == "gamma") {
        if (v.is_string()) {
          if (v.get<std::string>() != "scale") throw UsageError("gamma must be a number or \"scale\"");
          p.gamma.reset();
        } else {
          p.gamma = v.get<double>();
        }
      } else {
        throw UsageError("unknown model parameter '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad model params: ") + e.what());
  }
  return p;
}

Eigen::MatrixXd to_matrix(const std::vector<WindowFeature>& windows) {
  if (windows.empty()) return {};
  const auto D = static_cast<Eigen::Index>(windows.front().vector.size());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(windows.size()), D);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (static_cast<Eigen::Index>(windows[i].vector.size()) != D) throw DataError("window vectors differ in length");
    for (Eigen::Index d = 0; d < D; ++d) X(static_cast<Eigen::Index>(i), d) = windows[i].vector[d];
  }
  return X;
}

TrainedModel train_model(const Eigen::MatrixXd& rows, const std::vector<std::string>& labels,
                         const ModelParams& params, const FeatureConfig& feature_config, unsigned threads) {
  if (rows.rows() == 0) throw UsageError("empty training set");
  if (static_cast<std::size_t>(rows.rows()) != labels.size()) throw UsageError("row/label count mismatch");
  TrainedModel model;
  model.params = params;
  model.feature_config = feature_config;
  model.class_labels = labels;
  std::sort(model.class_labels.begin(), model.class_labels.end());
  model.class_labels.erase(std::unique(model.class_labels.begin(), model.class_labels.end()),
                           model.class_labels.end());
  if (model.class_labels.size() < 2) throw UsageError("training data contains a single class");
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < model.class_labels.size(); ++c) index[model.class_labels[c]] = static_cast<int>(c);
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = index.at(labels[i]);

  model.scaler = fit_scaler(rows);
  Eigen::MatrixXd X = rows;
  apply_scaler_in_place(model.scaler, X);
  if (params.pca_components > 0) {
    model.pca = fit_pca(X, params.pca_components);
    X = project_rows(*model.pca, X);
  }
  const int n_classes = static_cast<int>(model.class_labels.size());
  if (params.kind == ClassifierKind::RandomForest) {
    ForestParams fp;
    fp.n_trees = params.n_trees;
    fp.max_features = params.max_features;
    fp.seed = params.seed;
    model.classifier = fit_random_forest(X, y, n_classes, fp, threads);
  } else {
    SvmParams sp;
    sp.C = params.C;
    sp.gamma = params.gamma;
    sp.tolerance = params.svm_tolerance;
    model.classifier = fit_svm(X, y, n_classes, sp, threads);
  }
  return model;
}

TrainedModel train_random_forest(const Eigen::MatrixXd& rows, const std::vector<std::string>& labels,
                                 ModelParams params, unsigned threads) {
  params.kind = ClassifierKind::RandomForest;
  return train_model(rows, labels, params, {}, threads);
}

TrainedModel train_svm_rbf(const Eigen::MatrixXd& rows, const std::vector<std::string>& labels, ModelParams params,
                           unsigned threads) {
  params.kind = ClassifierKind::SvmRbf;
  return train_model(rows, labels, params, {}, threads);
}

Eigen::VectorXd predict_scores(const TrainedModel& model, const Eigen::VectorXd& row) {
  if (row.size() != model.input_dimension())
    throw DataError("feature dimension " + std::to_string(row.size()) + " does not match model input " +
                    std::to_string(model.input_dimension()));
  Eigen::VectorXd x = apply_scaler(model.scaler, row);
  if (model.pca) x = project(*model.pca, x);
  return std::visit(
      [&](const auto& clf) -> Eigen::VectorXd {
        if constexpr (std::is_same_v<std::decay_t<decltype(clf)>, RandomForest>) return clf.vote_fractions(x);
        else return clf.class_scores(x);
      },
      model.classifier);
}

std::vector<int> rank_classes(const Eigen::VectorXd& scores) {
  std::vector<int> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::string> predict_top_k(const TrainedModel& model, const Eigen::VectorXd& row, std::size_t k) {
  const auto order = rank_classes(predict_scores(model, row));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i) out.push_back(model.class_labels[order[i]]);
  return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'H', 'M', 'D'};

void put_vector(ByteWriter& w, const Eigen::VectorXd& v) {
  w.put_array<double>(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

Eigen::VectorXd get_vector(ByteReader& r) {
  const auto v = r.get_array<double>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void put_matrix(ByteWriter& w, const Eigen::MatrixXd& m) {
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) w.put<double>(m.data()[i]);
}

Eigen::MatrixXd get_matrix(ByteReader& r) {
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  if (cols != 0 && rows > r.remaining() / 8 / cols) throw DataError("truncated or corrupt file");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.get<double>();
  return m;
}

std::string model_identity(const TrainedModel& model) {
  return to_json(model.params).dump() + "|" + to_json(model.feature_config).dump();
}

}  // namespace

std::uint64_t model_config_hash(const TrainedModel& model) { return fnv1a64(model_identity(model)); }

std::vector<unsigned char> serialize_model(const TrainedModel& model) {
  ByteWriter p;
  p.put_string(to_json(model.params).dump());
  p.put_string(to_json(model.feature_config).dump());
  p.put<std::uint32_t>(static_cast<std::uint32_t>(model.class_labels.size()));
  for (const auto& l : model.class_labels) p.put_string(l);
  put_vector(p, model.scaler.means);
  put_vector(p, model.scaler.stds);
  p.put<std::uint8_t>(model.pca ? 1 : 0);
  if (model.pca) {
    put_matrix(p, model.pca->components);
    put_vector(p, model.pca->means);
    put_vector(p, model.pca->explained_variance);
    p.put<double>(model.pca->total_variance);
  }
  if (const auto* rf = std::get_if<RandomForest>(&model.classifier)) {
    p.put<std::uint8_t>(0);
    p.put<std::int32_t>(rf->n_classes);
    p.put<std::uint32_t>(static_cast<std::uint32_t>(rf->trees.size()));
    for (const auto& t : rf->trees) {
      p.put<std::uint32_t>(static_cast<std::uint32_t>(t.nodes.size()));
      for (const auto& n : t.nodes) {
        p.put<std::int32_t>(n.feature);
        p.put<double>(n.threshold);
        p.put<std::int32_t>(n.left);
        p.put<std::int32_t>(n.right);
        p.put<std::int32_t>(n.label);
      }
    }
  } else {
    const auto& svm = std::get<SvmModel>(model.classifier);
    p.put<std::uint8_t>(1);
    p.put<std::int32_t>(svm.n_classes);
    p.put<double>(svm.gamma);
    p.put<double>(svm.C);
    put_matrix(p, svm.support_vectors);
    p.put<std::uint32_t>(static_cast<std::uint32_t>(svm.machines.size()));
    for (const auto& m : svm.machines) {
      p.put<std::int32_t>(m.positive);
      p.put<std::int32_t>(m.negative);
      p.put_array<std::int32_t>(std::span<const int>(m.support));
      p.put_array<double>(std::span<const double>(m.coef));
      p.put<double>(m.rho);
      p.put<std::int64_t>(m.iterations);
      p.put<std::uint8_t>(m.converged ? 1 : 0);
    }
  }

  const auto& payload = p.bytes();
  ByteWriter w;
  for (char c : kMagic) w.put<char>(c);
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint64_t>(model_config_hash(model));
  w.put<std::uint64_t>(payload.size());
  w.put_raw(payload);
  w.put<std::uint64_t>(fnv1a64(std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size())));
  return w.take();
}

TrainedModel deserialize_model(std::span<const unsigned char> bytes) {
  ByteReader r(bytes);
  for (char c : kMagic)
    if (r.get<char>() != c) throw DataError("not a model file");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw VersionError("model format version " + std::to_string(version) + " is not supported (this build reads " +
                       std::to_string(kModelFormatVersion) + ")");
  const auto hash = r.get<std::uint64_t>();
  const auto length = r.get<std::uint64_t>();
  const auto payload = r.get_raw(length);
  const auto checksum = r.get<std::uint64_t>();
  if (r.remaining() != 0) throw DataError("corrupt model file: trailing bytes");
  if (checksum != fnv1a64(std::string_view(reinterpret_cast<const char*>(payload.data()), payload.size())))
    throw DataError("corrupt model file: checksum mismatch");

  ByteReader p(payload);
  TrainedModel model;
  try {
    model.params = model_params_from_json(json::parse(p.get_string()));
    model.feature_config = feature_config_from_json(json::parse(p.get_string()));
  } catch (const json::exception&) {
    throw DataError("corrupt model file: bad config block");
  }
  const auto n_labels = p.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_labels; ++i) model.class_labels.push_back(p.get_string());
  model.scaler.means = get_vector(p);
  model.scaler.stds = get_vector(p);
  if (p.get<std::uint8_t>()) {
    PcaProjection pca;
    pca.components = get_matrix(p);
    pca.means = get_vector(p);
    pca.explained_variance = get_vector(p);
    pca.total_variance = p.get<double>();
    model.pca = std::move(pca);
  }
  const auto kind = p.get<std::uint8_t>();
  if (kind == 0) {
    RandomForest rf;
    rf.n_classes = p.get<std::int32_t>();
    rf.trees.resize(p.get<std::uint32_t>());
    for (auto& t : rf.trees) {
      t.nodes.resize(p.get<std::uint32_t>());
      for (auto& n : t.nodes) {
        n.feature = p.get<std::int32_t>();
        n.threshold = p.get<double>();
        n.left = p.get<std::int32_t>();
        n.right = p.get<std::int32_t>();
        n.label = p.get<std::int32_t>();
      }
    }
    model.classifier = std::move(rf);
  } else if (kind == 1) {
    SvmModel svm;
    svm.n_classes = p.get<std::int32_t>();
    svm.gamma = p.get<double>();
    svm.C = p.get<double>();
    svm.support_vectors = get_matrix(p);
    svm.machines.resize(p.get<std::uint32_t>());
    for (auto& m : svm.machines) {
      m.positive = p.get<std::int32_t>();
      m.negative = p.get<std::int32_t>();
      const auto support = p.get_array<std::int32_t>();
      m.support.assign(support.begin(), support.end());
      m.coef = p.get_array<double>();
      m.rho = p.get<double>();
      m.iterations = p.get<std::int64_t>();
      m.converged = p.get<std::uint8_t>() != 0;
    }
    model.classifier = std::move(svm);
  } else {
    throw DataError("corrupt model file: unknown classifier kind");
  }
  if (p.remaining() != 0) throw DataError("corrupt model file: trailing payload bytes");
  if (model_config_hash(model) != hash) throw DataError("corrupt model file: config hash mismatch");
  return model;
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file_bytes(path)); }

}  // namespace spectrahar
