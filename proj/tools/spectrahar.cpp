// spectrahar: command-line front end for the spectral HAR pipeline.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectrahar/ablation.hpp"
#include "spectrahar/config_io.hpp"
#include "spectrahar/errors.hpp"
#include "spectrahar/feature_store.hpp"
#include "spectrahar/features.hpp"
#include "spectrahar/graph.hpp"
#include "spectrahar/ingest.hpp"
#include "spectrahar/metrics.hpp"
#include "spectrahar/model.hpp"
#include "spectrahar/parallel.hpp"
#include "spectrahar/spectrum.hpp"
#include "spectrahar/split.hpp"
#include "spectrahar/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spectrahar;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

unsigned g_threads = 0;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

// Echo of everything that determined an artifact; threads are excluded
// because outputs do not depend on them.
json run_config(const std::string& command, const json& body) {
  json j = body;
  j["command"] = command;
  j["config_hash"] = hash_hex(fnv1a64(body.dump()));
  return j;
}

struct FeatureFlags {
  std::string config_file;
  std::string strategy;
  double window_s = 0, stride_s = 0, radius = 0, min_valid = -1;
  int k_val = 0, k_vec = 0;
  std::string parts;
  bool no_vectors = false;
  std::string temporal_stats;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON feature configuration");
    cmd->add_option("--strategy", strategy, "Eigenvalue strategy A, B, C or D");
    cmd->add_option("--window", window_s, "Window length in seconds");
    cmd->add_option("--stride", stride_s, "Window stride in seconds");
    cmd->add_option("--radius", radius, "Graph radius in meters");
    cmd->add_option("--k-val", k_val, "Number of eigenvalues");
    cmd->add_option("--k-vec", k_vec, "Number of eigenvectors");
    cmd->add_option("--parts", parts, "Body parts, e.g. 0+1+2+3+4");
    cmd->add_option("--min-valid", min_valid, "Minimum fraction of valid frames per window");
    cmd->add_option("--temporal-stats", temporal_stats, "Comma-separated temporal statistics");
    cmd->add_flag("--no-eigenvectors", no_vectors, "Disable eigenvector features");
  }

  FeatureConfig build() const {
    FeatureConfig c;
    if (!config_file.empty()) c = feature_config_from_json(read_json_file(config_file));
    json o = json::object();
    if (!strategy.empty()) o["strategy"] = strategy;
    if (window_s > 0) o["window_seconds"] = window_s;
    if (stride_s > 0) o["stride_seconds"] = stride_s;
    if (radius > 0) o["radius_m"] = radius;
    if (k_val > 0) o["k_val"] = k_val;
    if (k_vec > 0) o["k_vec"] = k_vec;
    if (min_valid >= 0) o["min_valid_fraction"] = min_valid;
    if (no_vectors) o["use_eigenvectors"] = false;
    if (!temporal_stats.empty()) {
      json stats = json::array();
      std::stringstream ss(temporal_stats);
      std::string tok;
      while (std::getline(ss, tok, ',')) stats.push_back(tok);
      o["temporal_stats"] = stats;
    }
    if (!parts.empty()) {
      AblationCell cell{"", {{"parts", parts}}};
      ModelParams unused;
      resolve_cell(cell, c, unused);
    }
    c = feature_config_from_json(o, c);
    c.validate();
    return c;
  }
};

struct ModelFlags {
  std::string params_file;
  std::string classifier;
  double C = 0, gamma = 0;
  int trees = 0, pca = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--params", params_file, "JSON model parameters");
    cmd->add_option("--classifier", classifier, "svm or rf");
    cmd->add_option("--C", C, "SVM regularization");
    cmd->add_option("--gamma", gamma, "RBF gamma (default: scale)");
    cmd->add_option("--trees", trees, "Random forest size");
    cmd->add_option("--pca", pca, "PCA components (0 = off)");
    cmd->add_option("--seed", seed, "Training seed")->each([this](const std::string&) { seed_set = true; });
  }

  ModelParams build() const {
    ModelParams p;
    if (!params_file.empty()) p = model_params_from_json(read_json_file(params_file));
    if (!classifier.empty()) p.kind = parse_classifier(classifier);
    if (C > 0) p.C = C;
    if (gamma > 0) p.gamma = gamma;
    if (trees > 0) p.n_trees = trees;
    if (pca >= 0) p.pca_components = pca;
    if (seed_set) p.seed = seed;
    return p;
  }
};

std::vector<WindowFeature> extract_manifest(const Manifest& m, const FeatureConfig& config, std::size_t* dropped) {
  std::vector<WindowFeature> windows;
  for (const auto& r : m.records) {
    auto seq = extract_sequence(r, config, g_threads);
    if (dropped) *dropped += seq.dropped_windows;
    std::fprintf(stderr, "[features] %s: %zu windows (%zu dropped, %zu invalid frames)\n", r.sequence_id.c_str(),
                 seq.windows.size(), seq.dropped_windows, seq.invalid_frames);
    for (auto& w : seq.windows) windows.push_back(std::move(w));
  }
  return windows;
}

int cmd_synth(const SynthSpec& spec, const std::string& out) {
  const auto manifest = generate(spec, out, g_threads);
  write_json(fs::path(out) / "run_config.json", run_config("synth", {{"synth", to_json(spec)}}));
  std::printf("sequences %zu\nmanifest %s\n", manifest.records.size(), (fs::path(out) / "manifest.jsonl").c_str());
  return kOk;
}

int cmd_features(const std::string& manifest_path, const FeatureConfig& config, const std::string& out) {
  const auto manifest = load_manifest(manifest_path);
  if (manifest.warnings) std::fprintf(stderr, "[features] manifest has %zu unknown field(s)\n", manifest.warnings);
  std::size_t dropped = 0;
  FeatureStore store;
  store.config = config;
  store.windows = extract_manifest(manifest, config, &dropped);
  if (!store.windows.empty()) store.dimension = static_cast<std::uint32_t>(store.windows.front().vector.size());
  ensure_parent(out);
  write_feature_store(out, store);
  write_json(out + ".run_config.json",
             run_config("features", {{"feature_config", to_json(config)}, {"manifest", manifest_path}, {"out", out}}));
  std::printf("windows %zu\ndropped %zu\ndimension %u\nconfig_hash %s\n", store.windows.size(), dropped,
              store.dimension, hash_hex(config_hash(config)).c_str());
  return kOk;
}

std::vector<WindowFeature> split_side(const std::vector<WindowFeature>& windows, const std::string& split_text,
                                      bool train) {
  if (split_text.empty()) return windows;
  const auto parts = split(windows, parse_split(split_text));
  return train ? parts.train : parts.test;
}

int cmd_train(const std::string& store_path, const std::string& split_text, const ModelParams& params,
              const std::string& out) {
  const auto store = read_feature_store(store_path);
  const auto train = split_side(store.windows, split_text, true);
  if (train.empty()) throw DataError("no training windows");
  std::vector<std::string> labels;
  for (const auto& w : train) labels.push_back(w.activity_id);
  std::fprintf(stderr, "[train] %zu windows, dimension %u, classifier %s\n", train.size(), store.dimension,
               to_string(params.kind).c_str());
  const auto model = train_model(to_matrix(train), labels, params, store.config, g_threads);
  if (const auto* svm = std::get_if<SvmModel>(&model.classifier); svm && !svm->converged())
    std::fprintf(stderr, "[train] warning: SVM solver hit the iteration cap\n");
  ensure_parent(out);
  save_model(model, out);
  write_json(out + ".run_config.json",
             run_config("train", {{"feature_config", to_json(store.config)},
                                  {"model_params", to_json(params)},
                                  {"split", split_text},
                                  {"store", store_path},
                                  {"out", out}}));
  std::printf("train_windows %zu\nclasses %zu\nmodel_hash %s\n", train.size(), model.class_labels.size(),
              hash_hex(model_config_hash(model)).c_str());
  return kOk;
}

int cmd_eval(const std::string& model_path, const std::string& store_path, const std::string& manifest_path,
             const std::string& split_text, const std::string& out, int bootstrap, std::uint64_t seed) {
  if (store_path.empty() == manifest_path.empty()) throw UsageError("eval needs exactly one of --store or --manifest");
  const auto model = load_model(model_path);
  std::vector<WindowFeature> windows;
  if (!store_path.empty()) {
    const auto store = read_feature_store(store_path);
    if (config_hash(store.config) != config_hash(model.feature_config))
      std::fprintf(stderr, "[eval] warning: store configuration differs from the model's\n");
    windows = store.windows;
  } else {
    windows = extract_manifest(load_manifest(manifest_path), model.feature_config, nullptr);
  }
  const auto test = split_side(windows, split_text, false);
  const auto ev = evaluate_model(model, test, {bootstrap, seed, g_threads});
  fs::create_directories(out);
  write_json(fs::path(out) / "report.json", to_json(ev.report));
  emit_confusion(ev.report, fs::path(out) / "confusion.csv", fs::path(out) / "confusion.svg");
  write_json(fs::path(out) / "run_config.json",
             run_config("eval", {{"feature_config", to_json(model.feature_config)},
                                 {"model_params", to_json(model.params)},
                                 {"model", model_path},
                                 {"store", store_path},
                                 {"manifest", manifest_path},
                                 {"split", split_text},
                                 {"bootstrap", bootstrap},
                                 {"seed", seed}}));
  const auto& r = ev.report;
  std::printf("windows %zu\naccuracy %.4f ± %.4f\nmacro_f1 %.4f ± %.4f\nbalanced_accuracy %.4f ± %.4f\n"
              "top1 %.4f ± %.4f\ntop5 %.4f ± %.4f\n",
              r.n_windows, r.accuracy.mean, r.accuracy.bootstrap_std, r.macro_f1.mean, r.macro_f1.bootstrap_std,
              r.balanced_accuracy.mean, r.balanced_accuracy.bootstrap_std, r.top1.mean, r.top1.bootstrap_std,
              r.top5.mean, r.top5.bootstrap_std);
  return kOk;
}

int cmd_predict(const std::string& model_path, const std::vector<std::string>& frames, double rate, int top) {
  const auto model = load_model(model_path);
  SequenceRecord record;
  record.sequence_id = "input";
  record.frame_rate_hz = rate;
  for (const auto& f : frames) record.frame_paths.emplace_back(f);
  const int W = model.feature_config.window_frames(rate);
  if (static_cast<int>(frames.size()) < W)
    throw DataError("insufficient frames: " + std::to_string(frames.size()) + " given, window needs " +
                    std::to_string(W));
  const auto seq = extract_sequence(record, model.feature_config, g_threads);
  if (seq.windows.empty()) throw DataError("insufficient frames: every window was dropped for invalid frames");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.class_labels.size()));
  std::printf("window_start,rank,label,score\n");
  for (const auto& w : seq.windows) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(w.vector.size()));
    for (std::size_t d = 0; d < w.vector.size(); ++d) row[static_cast<Eigen::Index>(d)] = w.vector[d];
    const auto scores = predict_scores(model, row);
    total += scores;
    const auto order = rank_classes(scores);
    for (int k = 0; k < std::min<int>(top, static_cast<int>(order.size())); ++k)
      std::printf("%lld,%d,%s,%.6g\n", static_cast<long long>(w.window_start_frame), k + 1,
                  model.class_labels[order[k]].c_str(), scores[order[k]]);
  }
  total /= static_cast<double>(seq.windows.size());
  const auto order = rank_classes(total);
  for (int k = 0; k < std::min<int>(top, static_cast<int>(order.size())); ++k)
    std::printf("all,%d,%s,%.6g\n", k + 1, model.class_labels[order[k]].c_str(), total[order[k]]);
  return kOk;
}

int cmd_ablate(const std::string& grid_path, const std::string& manifest_path, const std::string& split_text,
               const std::string& out, int bootstrap, std::uint64_t seed) {
  const auto cells = load_grid(grid_path);
  const auto manifest = load_manifest(manifest_path);
  const auto rows = run_ablation(cells, manifest, parse_split(split_text), out, {bootstrap, seed, g_threads});
  write_json(fs::path(out) / "run_config.json",
             run_config("ablate", {{"grid", read_json_file(grid_path)},
                                   {"manifest", manifest_path},
                                   {"split", split_text},
                                   {"bootstrap", bootstrap},
                                   {"seed", seed}}));
  std::fputs(results_csv(rows).c_str(), stdout);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  if (failed) std::fprintf(stderr, "[ablate] %zu of %zu cells failed\n", failed, rows.size());
  return kOk;
}

int cmd_inspect(const std::string& frame_path, double radius, int k, const std::string& axes) {
  const auto frame = load_frame(frame_path, AxisConvention::parse(axes));
  const auto graph = build_graph(frame, radius);
  const int n = static_cast<int>(graph.n_vertices);
  const int kv = k > 0 ? std::min(k, n) : n;
  SpectrumOptions options;
  options.compute_vectors = false;
  const auto spectrum = decompose(laplacian(graph), kv, 0, options);
  const std::size_t shown = std::min<std::size_t>(spectrum.eigenvalues.size(), static_cast<std::size_t>(kv));
  for (std::size_t i = 0; i < shown; ++i)
    std::printf(i ? ",%.10g" : "%.10g", spectrum.eigenvalues[i]);
  std::printf("\n");
  if (!spectrum.complete) std::fprintf(stderr, "[inspect] warning: spectrum incomplete (large disconnected graph)\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral graph features for point-cloud activity recognition"};
  app.require_subcommand(1);
  std::string workdir;
  unsigned threads = 0;
  app.add_option("--workdir", workdir, "Resolve relative paths against this directory");
  app.add_option("--threads", threads, "Worker threads (default: hardware concurrency)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic activity dataset");
  SynthSpec synth_spec;
  std::string synth_out, synth_file;
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--spec", synth_file, "JSON synth specification");
  synth_cmd->add_option("--subjects", synth_spec.n_subjects);
  synth_cmd->add_option("--activities", synth_spec.n_activities);
  synth_cmd->add_option("--frames", synth_spec.frames_per_sequence);
  synth_cmd->add_option("--points", synth_spec.points_per_frame);
  synth_cmd->add_option("--noise", synth_spec.noise_std_m);
  synth_cmd->add_option("--variation", synth_spec.subject_variation);
  synth_cmd->add_option("--mirrored-pairs", synth_spec.mirrored_pairs);
  synth_cmd->add_option("--environments", synth_spec.environments);
  synth_cmd->add_option("--seed", synth_spec.seed);

  auto* feat_cmd = app.add_subcommand("features", "Extract window features from a manifest");
  FeatureFlags feat_flags;
  std::string feat_manifest, feat_out;
  feat_cmd->add_option("--manifest", feat_manifest)->required();
  feat_cmd->add_option("--out", feat_out, "Feature store path")->required();
  feat_flags.add(feat_cmd);

  auto* train_cmd = app.add_subcommand("train", "Train a classifier on a feature store");
  ModelFlags model_flags;
  std::string train_store, train_split, train_out;
  train_cmd->add_option("--store", train_store)->required();
  train_cmd->add_option("--split", train_split, "cross_scene, e04_7_3, holdout:N or a JSON file (default: all windows)");
  train_cmd->add_option("--out", train_out, "Model path")->required();
  model_flags.add(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on held-out windows");
  std::string eval_model, eval_store, eval_manifest, eval_split, eval_out;
  int eval_B = kDefaultBootstrap;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--store", eval_store);
  eval_cmd->add_option("--manifest", eval_manifest);
  eval_cmd->add_option("--split", eval_split, "Evaluate the test side of this split (default: all windows)");
  eval_cmd->add_option("--out", eval_out, "Report directory")->required();
  eval_cmd->add_option("--bootstrap", eval_B);
  eval_cmd->add_option("--seed", eval_seed);

  auto* pred_cmd = app.add_subcommand("predict", "Rank activities for a frame sequence");
  std::string pred_model;
  std::vector<std::string> pred_frames;
  double pred_rate = 10.0;
  int pred_top = 5;
  pred_cmd->add_option("--model", pred_model)->required();
  pred_cmd->add_option("frames", pred_frames, "Frame files in temporal order")->required();
  pred_cmd->add_option("--rate", pred_rate, "Frame rate in Hz");
  pred_cmd->add_option("--top", pred_top, "Labels to print per window");

  auto* ablate_cmd = app.add_subcommand("ablate", "Run a configuration grid");
  std::string ab_grid, ab_manifest, ab_split = "cross_scene", ab_out;
  int ab_B = kDefaultBootstrap;
  std::uint64_t ab_seed = 0;
  ablate_cmd->add_option("--grid", ab_grid)->required();
  ablate_cmd->add_option("--manifest", ab_manifest)->required();
  ablate_cmd->add_option("--split", ab_split);
  ablate_cmd->add_option("--out", ab_out)->required();
  ablate_cmd->add_option("--bootstrap", ab_B);
  ablate_cmd->add_option("--seed", ab_seed);

  auto* inspect_cmd = app.add_subcommand("inspect-spectrum", "Print the Laplacian spectrum of one frame");
  std::string inspect_frame, inspect_axes = "XYZ";
  double inspect_radius = kDefaultRadius;
  int inspect_k = 0;
  inspect_cmd->add_option("frame", inspect_frame)->required();
  inspect_cmd->add_option("--radius", inspect_radius);
  inspect_cmd->add_option("--k", inspect_k, "Number of eigenvalues (default: all)");
  inspect_cmd->add_option("--axes", inspect_axes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (!workdir.empty()) fs::current_path(workdir);
    g_threads = threads ? threads : default_thread_count();
    if (*synth_cmd) {
      if (!synth_file.empty()) synth_spec = synth_spec_from_json(read_json_file(synth_file), synth_spec);
      return cmd_synth(synth_spec, synth_out);
    }
    if (*feat_cmd) return cmd_features(feat_manifest, feat_flags.build(), feat_out);
    if (*train_cmd) return cmd_train(train_store, train_split, model_flags.build(), train_out);
    if (*eval_cmd) return cmd_eval(eval_model, eval_store, eval_manifest, eval_split, eval_out, eval_B, eval_seed);
    if (*pred_cmd) return cmd_predict(pred_model, pred_frames, pred_rate, pred_top);
    if (*ablate_cmd) return cmd_ablate(ab_grid, ab_manifest, ab_split, ab_out, ab_B, ab_seed);
    if (*inspect_cmd) return cmd_inspect(inspect_frame, inspect_radius, inspect_k, inspect_axes);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
