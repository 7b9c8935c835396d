#include "spectrahar/features.hpp"

#include <algorithm>
#include <cmath>

#include "spectrahar/errors.hpp"
#include "spectrahar/graph.hpp"
#include "spectrahar/parallel.hpp"
#include "spectrahar/stats.hpp"

namespace spectrahar {

std::vector<TemporalStat> default_temporal_stats() {
  return {TemporalStat::Mean,   TemporalStat::Std,      TemporalStat::Range,   TemporalStat::Median,
          TemporalStat::Iqr,    TemporalStat::Skewness, TemporalStat::Kurtosis};
}

void FeatureConfig::validate() const {
  if (!(stride_seconds > 0.0)) throw UsageError("stride_seconds must be > 0");
  if (window_seconds < stride_seconds) throw UsageError("window_seconds must be >= stride_seconds");
  if (k_val < 1 || k_vec < 1) throw UsageError("k_val and k_vec must be >= 1");
  if (!(radius_m > 0.0)) throw UsageError("radius_m must be > 0");
  if (parts.empty()) throw UsageError("at least one part id is required");
  for (int p : parts)
    if (p < 0 || p >= kPartCount) throw UsageError("unknown part id " + std::to_string(p) + " (expected 0..5)");
  if (min_valid_fraction < 0.0 || min_valid_fraction > 1.0) throw UsageError("min_valid_fraction must lie in [0, 1]");
  if (temporal_stats.empty()) throw UsageError("temporal statistic list is empty");
}

int FeatureConfig::window_frames(double frame_rate_hz) const {
  return std::max(1, static_cast<int>(std::lround(window_seconds * frame_rate_hz)));
}

int FeatureConfig::stride_frames(double frame_rate_hz) const {
  return std::max(1, static_cast<int>(std::lround(stride_seconds * frame_rate_hz)));
}

std::vector<int> FeatureConfig::sorted_parts() const {
  std::vector<int> p = parts;
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

std::size_t part_dimension(const FeatureConfig& config, int window_frames) {
  const std::size_t S = config.temporal_stats.size();
  const std::size_t W = static_cast<std::size_t>(window_frames);
  const std::size_t kval = static_cast<std::size_t>(config.k_val);
  std::size_t val = 0;
  switch (config.strategy) {
    case Strategy::A: val = kSummarySize * S; break;
    case Strategy::B: val = kval * S; break;
    case Strategy::C: val = kSummarySize * W; break;
    case Strategy::D: val = kval * W; break;
  }
  const std::size_t vec =
      config.use_eigenvectors ? kVectorStatCount * static_cast<std::size_t>(config.k_vec) * S : 0;
  return val + vec;
}

std::size_t feature_dimension(const FeatureConfig& config, int window_frames) {
  return config.sorted_parts().size() * part_dimension(config, window_frames);
}

FrameFeature FrameFeature::zeros(const FeatureConfig& config) {
  FrameFeature f;
  f.eigenvalue_summary.assign(kSummarySize, 0.0);
  f.eigenvalue_selected.assign(static_cast<std::size_t>(config.k_val), 0.0);
  if (config.use_eigenvectors)
    f.eigenvector_stats.assign(static_cast<std::size_t>(config.k_vec) * kVectorStatCount, 0.0);
  f.valid = false;
  return f;
}

std::optional<std::array<double, kSummarySize>> eigenvalue_summary(const Spectrum& spectrum) {
  if (spectrum.eigenvalues.size() < 2) return std::nullopt;
  std::vector<double> v(spectrum.eigenvalues.begin() + 1, spectrum.eigenvalues.end());
  std::sort(v.begin(), v.end());
  const auto m = stats::moments(v);
  return std::array<double, kSummarySize>{m.mean,
                                          std::sqrt(m.variance),
                                          stats::percentile_sorted(v, 0.5),
                                          stats::percentile_sorted(v, 0.25),
                                          stats::percentile_sorted(v, 0.75),
                                          v.back()};
}

std::vector<double> eigenvalue_select(const Spectrum& spectrum, int k_val) {
  std::vector<double> out(static_cast<std::size_t>(std::max(k_val, 0)), 0.0);
  for (std::size_t i = 0; i < out.size() && i + 1 < spectrum.eigenvalues.size(); ++i)
    out[i] = spectrum.eigenvalues[i + 1];
  return out;
}

std::array<double, kVectorStatCount> vector_statistics(const Eigen::VectorXd& u) {
  std::span<const double> x(u.data(), static_cast<std::size_t>(u.size()));
  const auto m = stats::moments(x);
  double entropy = 0.0;
  double abs_min = std::abs(x[0]), abs_max = abs_min;
  for (double v : x) {
    const double p = v * v;
    if (p > 0.0) entropy -= p * std::log(p);
    abs_min = std::min(abs_min, std::abs(v));
    abs_max = std::max(abs_max, std::abs(v));
  }
  return {m.mean, std::sqrt(m.variance), u.maxCoeff(), u.minCoeff(), m.excess_kurtosis, entropy, abs_max - abs_min};
}

std::vector<double> eigenvector_stats(const Spectrum& spectrum, int k_vec) {
  std::vector<double> out(static_cast<std::size_t>(std::max(k_vec, 0)) * kVectorStatCount, 0.0);
  for (int i = 0; i < k_vec; ++i) {
    const Eigen::Index col = i + 1;
    if (col >= spectrum.vector_count()) break;
    const auto s = vector_statistics(spectrum.eigenvectors.col(col));
    std::copy(s.begin(), s.end(), out.begin() + static_cast<std::ptrdiff_t>(i) * kVectorStatCount);
  }
  return out;
}

std::vector<double> aggregate_temporal_stats(const std::vector<std::vector<double>>& series,
                                             std::span<const TemporalStat> statistics) {
  if (series.empty()) throw UsageError("temporal aggregation of an empty series");
  const std::size_t D = series.front().size();
  for (const auto& v : series)
    if (v.size() != D) throw UsageError("temporal aggregation over vectors of different length");

  std::vector<double> out;
  out.reserve(D * statistics.size());
  std::vector<double> column(series.size()), sorted(series.size());
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t t = 0; t < series.size(); ++t) column[t] = series[t][d];
    sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const auto m = stats::moments(column);
    for (TemporalStat s : statistics) {
      switch (s) {
        case TemporalStat::Mean: out.push_back(m.mean); break;
        case TemporalStat::Std: out.push_back(std::sqrt(m.variance)); break;
        case TemporalStat::Range: out.push_back(sorted.back() - sorted.front()); break;
        case TemporalStat::Median: out.push_back(stats::percentile_sorted(sorted, 0.5)); break;
        case TemporalStat::Iqr:
          out.push_back(stats::percentile_sorted(sorted, 0.75) - stats::percentile_sorted(sorted, 0.25));
          break;
        case TemporalStat::Skewness: out.push_back(m.skewness); break;
        case TemporalStat::Kurtosis: out.push_back(m.excess_kurtosis); break;
        case TemporalStat::Min: out.push_back(sorted.front()); break;
        case TemporalStat::Max: out.push_back(sorted.back()); break;
      }
    }
  }
  return out;
}

std::vector<double> aggregate_temporal_stats(const std::vector<std::vector<double>>& series) {
  const auto defaults = default_temporal_stats();
  return aggregate_temporal_stats(series, defaults);
}

std::vector<double> aggregate_concat(const std::vector<std::vector<double>>& series) {
  if (series.empty()) throw UsageError("concatenation of an empty series");
  std::vector<double> out;
  for (const auto& v : series) out.insert(out.end(), v.begin(), v.end());
  return out;
}

FrameFeature frame_feature(const FrameCloud& part, const FeatureConfig& config, bool* numeric_failure) {
  if (numeric_failure) *numeric_failure = false;
  if (part.size() < kMinPartPoints) return FrameFeature::zeros(config);

  const auto graph = build_graph(part, config.radius_m);
  SpectrumOptions options;
  options.compute_vectors = config.use_eigenvectors;
  Spectrum spectrum;
  try {
    spectrum = decompose(laplacian(graph), config.k_val, config.use_eigenvectors ? config.k_vec : 0, options);
  } catch (const NumericError&) {
    if (numeric_failure) *numeric_failure = true;
    return FrameFeature::zeros(config);
  }
  FrameFeature f;
  const auto summary = eigenvalue_summary(spectrum);
  if (!summary) return FrameFeature::zeros(config);
  f.eigenvalue_summary.assign(summary->begin(), summary->end());
  f.eigenvalue_selected = eigenvalue_select(spectrum, config.k_val);
  if (config.use_eigenvectors) f.eigenvector_stats = eigenvector_stats(spectrum, config.k_vec);
  f.valid = true;
  return f;
}

bool FrameRecord::valid_for(const std::vector<int>& part_ids) const {
  if (!enough_points) return false;
  for (int p : part_ids)
    if (failed[p]) return false;
  return true;
}

FrameRecord frame_record(const FrameCloud& frame, const FeatureConfig& config) {
  FrameRecord rec;
  const auto parts = config.sorted_parts();
  rec.enough_points = frame.size() >= kMinPartPoints;
  if (!rec.enough_points) {
    for (int p : parts) rec.parts[p] = FrameFeature::zeros(config);
    return rec;
  }
  const bool whole_only = parts.size() == 1 && parts.front() == kWholeBody;
  PartSet set;
  if (whole_only) {
    set.parts[kWholeBody] = frame;
  } else {
    set = partition(frame);
  }
  for (int p : parts) {
    bool failed = false;
    rec.parts[p] = frame_feature(set.parts[p], config, &failed);
    rec.failed[p] = failed;
  }
  return rec;
}

namespace {

void accumulate(std::vector<double>& acc, const std::vector<double>& v) {
  if (acc.empty()) acc.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

void scale(std::vector<double>& v, double s) {
  for (double& x : v) x *= s;
}

}  // namespace

std::optional<std::vector<float>> window_feature(std::span<const FrameRecord> window, const FeatureConfig& config) {
  if (window.empty()) throw UsageError("empty window");
  const auto parts = config.sorted_parts();
  std::vector<char> valid(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) valid[i] = window[i].valid_for(parts);
  const auto n_valid = static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
  if (n_valid == 0 ||
      static_cast<double>(n_valid) < config.min_valid_fraction * static_cast<double>(window.size()))
    return std::nullopt;

  std::vector<double> out;
  for (int p : parts) {
    // Mean of valid frames, substituted for invalid ones.
    FrameFeature imputed;
    if (n_valid < window.size()) {
      for (std::size_t i = 0; i < window.size(); ++i) {
        if (!valid[i]) continue;
        const auto& f = *window[i].parts[p];
        accumulate(imputed.eigenvalue_summary, f.eigenvalue_summary);
        accumulate(imputed.eigenvalue_selected, f.eigenvalue_selected);
        accumulate(imputed.eigenvector_stats, f.eigenvector_stats);
      }
      const double inv = 1.0 / static_cast<double>(n_valid);
      scale(imputed.eigenvalue_summary, inv);
      scale(imputed.eigenvalue_selected, inv);
      scale(imputed.eigenvector_stats, inv);
    }

    std::vector<std::vector<double>> val_series, vec_series;
    val_series.reserve(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) {
      const auto& r = window[i];
      if (!r.parts[p]) throw UsageError("frame records were computed without part " + std::to_string(p));
      const FrameFeature& f = valid[i] ? *r.parts[p] : imputed;
      const bool summary = config.strategy == Strategy::A || config.strategy == Strategy::C;
      val_series.push_back(summary ? f.eigenvalue_summary : f.eigenvalue_selected);
      if (config.use_eigenvectors) {
        if (f.eigenvector_stats.size() != static_cast<std::size_t>(config.k_vec) * kVectorStatCount)
          throw UsageError("frame records lack eigenvector statistics");
        vec_series.push_back(f.eigenvector_stats);
      }
    }
    const bool temporal = config.strategy == Strategy::A || config.strategy == Strategy::B;
    const auto val = temporal ? aggregate_temporal_stats(val_series, config.temporal_stats) : aggregate_concat(val_series);
    out.insert(out.end(), val.begin(), val.end());
    if (config.use_eigenvectors) {
      const auto vec = aggregate_temporal_stats(vec_series, config.temporal_stats);
      out.insert(out.end(), vec.begin(), vec.end());
    }
  }
  return std::vector<float>(out.begin(), out.end());
}

std::size_t window_count(std::size_t total_frames, int window_frames, int stride_frames) {
  const auto W = static_cast<std::size_t>(window_frames);
  const auto S = static_cast<std::size_t>(stride_frames);
  if (W == 0 || S == 0 || total_frames < W) return 0;
  return (total_frames - W) / S + 1;
}

std::vector<FrameRecord> sequence_frame_records(const SequenceRecord& record, const FeatureConfig& config,
                                                unsigned threads) {
  config.validate();
  std::vector<FrameRecord> frames(record.frame_paths.size());
  parallel_for(frames.size(), threads, [&](std::size_t i) {
    FrameCloud cloud = load_frame(record.frame_paths[i], record.axes);
    cloud.frame_index = i;
    cloud.timestamp = static_cast<double>(i) / record.frame_rate_hz;
    if (record.bbox) cloud = crop_to_bbox(cloud, *record.bbox);
    frames[i] = frame_record(cloud, config);
  });
  return frames;
}

SequenceFeatures assemble_windows(std::span<const FrameRecord> frames, const SequenceRecord& record,
                                  const FeatureConfig& config) {
  config.validate();
  SequenceFeatures out;
  out.total_frames = frames.size();
  const auto parts = config.sorted_parts();
  out.invalid_frames = static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [&](const FrameRecord& r) { return !r.valid_for(parts); }));
  const int W = config.window_frames(record.frame_rate_hz);
  const int S = config.stride_frames(record.frame_rate_hz);
  const std::size_t count = window_count(frames.size(), W, S);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t start = k * static_cast<std::size_t>(S);
    auto v = window_feature(frames.subspan(start, static_cast<std::size_t>(W)), config);
    if (!v) {
      ++out.dropped_windows;
      continue;
    }
    WindowFeature wf;
    wf.vector = std::move(*v);
    wf.sequence_id = record.sequence_id;
    wf.subject_id = record.subject_id;
    wf.activity_id = record.activity_id;
    wf.environment_id = record.environment_id;
    wf.window_start_frame = static_cast<std::int64_t>(start);
    out.windows.push_back(std::move(wf));
  }
  return out;
}

SequenceFeatures extract_sequence(const SequenceRecord& record, const FeatureConfig& config, unsigned threads) {
  const auto frames = sequence_frame_records(record, config, threads);
  return assemble_windows(frames, record, config);
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::A: return "A";
    case Strategy::B: return "B";
    case Strategy::C: return "C";
    case Strategy::D: return "D";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "A" || s == "a") return Strategy::A;
  if (s == "B" || s == "b") return Strategy::B;
  if (s == "C" || s == "c") return Strategy::C;
  if (s == "D" || s == "d") return Strategy::D;
  throw UsageError("unknown strategy '" + s + "' (expected A, B, C or D)");
}

std::string to_string(TemporalStat s) {
  switch (s) {
    case TemporalStat::Mean: return "mean";
    case TemporalStat::Std: return "std";
    case TemporalStat::Range: return "range";
    case TemporalStat::Median: return "median";
    case TemporalStat::Iqr: return "iqr";
    case TemporalStat::Skewness: return "skewness";
    case TemporalStat::Kurtosis: return "kurtosis";
    case TemporalStat::Min: return "min";
    case TemporalStat::Max: return "max";
  }
  return "?";
}

TemporalStat parse_temporal_stat(const std::string& s) {
  for (auto t : {TemporalStat::Mean, TemporalStat::Std, TemporalStat::Range, TemporalStat::Median, TemporalStat::Iqr,
                 TemporalStat::Skewness, TemporalStat::Kurtosis, TemporalStat::Min, TemporalStat::Max})
    if (to_string(t) == s) return t;
  throw UsageError("unknown temporal statistic '" + s + "'");
}

}  // namespace spectrahar
