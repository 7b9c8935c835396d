#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectrahar/ingest.hpp"
#include "spectrahar/partition.hpp"
#include "spectrahar/spectrum.hpp"

namespace spectrahar {

/// Eigenvalue pipelines:
///   A  six-value summary per frame, temporal statistics over the window
///   B  first k_val non-trivial eigenvalues per frame, temporal statistics
///   C  six-value summaries concatenated over the window
///   D  selected eigenvalues concatenated over the window
enum class Strategy { A, B, C, D };

enum class TemporalStat { Mean, Std, Range, Median, Iqr, Skewness, Kurtosis, Min, Max };

inline constexpr int kSummarySize = 6;
inline constexpr int kVectorStatCount = 7;
inline constexpr std::size_t kMinPartPoints = 3;

std::vector<TemporalStat> default_temporal_stats();

struct FeatureConfig {
  Strategy strategy = Strategy::B;
  bool use_eigenvectors = true;
  int k_val = kDefaultKValues;
  int k_vec = kDefaultKVectors;
  double window_seconds = 4.0;
  double stride_seconds = 0.5;
  double radius_m = kDefaultRadius;
  std::vector<int> parts = {0, 1, 2, 3, 4};
  double min_valid_fraction = 0.8;
  std::vector<TemporalStat> temporal_stats = default_temporal_stats();

  /// Throws UsageError on out-of-range values or unknown part ids.
  void validate() const;
  int window_frames(double frame_rate_hz) const;
  int stride_frames(double frame_rate_hz) const;
  /// Part ids sorted ascending, duplicates removed.
  std::vector<int> sorted_parts() const;
};

/// Closed-form window vector length:
///   |parts| * (val + vec), where with S = |temporal_stats|
///   val = 6*S (A), k_val*S (B), 6*W (C), k_val*W (D)
///   vec = 7*k_vec*S when eigenvector features are enabled, else 0.
std::size_t feature_dimension(const FeatureConfig& config, int window_frames);
std::size_t part_dimension(const FeatureConfig& config, int window_frames);

struct FrameFeature {
  std::vector<double> eigenvalue_summary;   // 6
  std::vector<double> eigenvalue_selected;  // k_val
  std::vector<double> eigenvector_stats;    // 7 * k_vec, empty without eigenvectors
  bool valid = false;

  static FrameFeature zeros(const FeatureConfig& config);
};

/// (mean, std, median, p25, p75, max) of lambda_1..; nullopt with fewer than two eigenvalues.
std::optional<std::array<double, kSummarySize>> eigenvalue_summary(const Spectrum& spectrum);

/// (lambda_1, ..., lambda_k), zero-padded on the right.
std::vector<double> eigenvalue_select(const Spectrum& spectrum, int k_val);

/// mean, std, max, min, excess kurtosis, entropy of squared entries, range of |entries|.
std::array<double, kVectorStatCount> vector_statistics(const Eigen::VectorXd& u);

/// vector_statistics of u_1..u_k in order; unavailable vectors give zero blocks.
std::vector<double> eigenvector_stats(const Spectrum& spectrum, int k_vec);

/// Per dimension, the configured statistics over the series, dimension-major.
std::vector<double> aggregate_temporal_stats(const std::vector<std::vector<double>>& series,
                                             std::span<const TemporalStat> statistics);
std::vector<double> aggregate_temporal_stats(const std::vector<std::vector<double>>& series);

/// Frame-order concatenation.
std::vector<double> aggregate_concat(const std::vector<std::vector<double>>& series);

/// Spectral features of one body part. Parts below kMinPartPoints, or whose
/// eigensolve fails (sets *numeric_failure), give an invalid all-zero feature.
FrameFeature frame_feature(const FrameCloud& part, const FeatureConfig& config,
                           bool* numeric_failure = nullptr);

/// Features of all configured parts of one frame. A frame is valid for a
/// part list when it has enough points and none of those parts failed to
/// decompose, so records computed for a superset of parts serve any subset.
struct FrameRecord {
  bool enough_points = false;
  std::array<std::optional<FrameFeature>, kPartCount> parts;
  std::array<bool, kPartCount> failed{};

  bool valid_for(const std::vector<int>& part_ids) const;
};

FrameRecord frame_record(const FrameCloud& frame, const FeatureConfig& config);

struct WindowFeature {
  std::vector<float> vector;
  std::string sequence_id;
  std::string subject_id;
  std::string activity_id;
  std::string environment_id;
  std::int64_t window_start_frame = 0;
};

/// Assembles one window vector, or nullopt when the fraction of valid frames
/// is below config.min_valid_fraction. Invalid frames inside an accepted
/// window take the within-window mean of the valid frames.
std::optional<std::vector<float>> window_feature(std::span<const FrameRecord> window, const FeatureConfig& config);

struct SequenceFeatures {
  std::vector<WindowFeature> windows;
  std::size_t dropped_windows = 0;
  std::size_t invalid_frames = 0;
  std::size_t total_frames = 0;
};

/// Number of windows starting at 0, S, 2S, ...: floor((T - W) / S) + 1, or 0 when T < W.
std::size_t window_count(std::size_t total_frames, int window_frames, int stride_frames);

/// Loads, crops and featurizes every frame of the record (in parallel).
std::vector<FrameRecord> sequence_frame_records(const SequenceRecord& record, const FeatureConfig& config,
                                                unsigned threads = 1);

/// Slides windows over precomputed frame records.
SequenceFeatures assemble_windows(std::span<const FrameRecord> frames, const SequenceRecord& record,
                                  const FeatureConfig& config);

SequenceFeatures extract_sequence(const SequenceRecord& record, const FeatureConfig& config, unsigned threads = 1);

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);
std::string to_string(TemporalStat s);
TemporalStat parse_temporal_stat(const std::string& s);

}  // namespace spectrahar
