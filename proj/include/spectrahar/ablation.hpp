#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spectrahar/features.hpp"
#include "spectrahar/ingest.hpp"
#include "spectrahar/metrics.hpp"
#include "spectrahar/model.hpp"
#include "spectrahar/split.hpp"

namespace spectrahar {

struct EvalOptions {
  int bootstrap_B = kDefaultBootstrap;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct Evaluation {
  std::vector<int> y_true;  // indices into the model's class labels
  Eigen::MatrixXd scores;
  MetricReport report;
};

/// Scores every window with the model. Throws DataError when a window's
/// activity is not one of the model's classes.
Evaluation evaluate_model(const TrainedModel& model, const std::vector<WindowFeature>& windows,
                          const EvalOptions& options = {});

/// One grid cell: configuration overrides applied on top of the defaults.
/// Feature keys are those of FeatureConfig (plus the aliases window_s and
/// parts given as "0+1+2"); model keys are those of ModelParams.
struct AblationCell {
  std::string name;
  nlohmann::json overrides = nlohmann::json::object();
};

/// Grid forms: an array of override objects; {"base": {...}, "cells": [...]};
/// or {"base": {...}, "axes": {"key": [values, ...], ...}} expanded as a
/// cartesian product in key order.
std::vector<AblationCell> parse_grid(const nlohmann::json& grid);
std::vector<AblationCell> load_grid(const std::filesystem::path& path);

/// Throws UsageError on unknown keys or invalid values.
void resolve_cell(const AblationCell& cell, FeatureConfig& features, ModelParams& model);

struct AblationRow {
  std::string name;
  std::string config_hash;
  std::string strategy;
  double window_s = 0.0;
  double radius_m = 0.0;
  std::string parts;
  std::string classifier;
  std::optional<MetricReport> report;
  std::size_t n_windows = 0;
  double wall_time_s = 0.0;  // window assembly, training and scoring; frame extraction is shared
  std::string error;
};

/// Runs every cell. Frame features are extracted once per group of cells
/// sharing (radius, k_val, k_vec, use_eigenvectors) over the union of their
/// parts, one sequence at a time. A failing cell records its error and the
/// run continues. With a non-empty out_dir, writes results.csv and
/// reports.jsonl there.
std::vector<AblationRow> run_ablation(const std::vector<AblationCell>& cells, const Manifest& manifest,
                                      const SplitSpec& split, const std::filesystem::path& out_dir,
                                      const EvalOptions& options = {});

std::string parts_label(const std::vector<int>& parts);
std::string results_csv(const std::vector<AblationRow>& rows);

}  // namespace spectrahar
