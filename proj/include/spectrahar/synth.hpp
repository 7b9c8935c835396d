#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrahar/ingest.hpp"

namespace spectrahar {

/// Synthetic articulated-body activity data. The body is a trunk ellipsoid
/// and four limb capsules driven by periodic joint angles.
struct SynthSpec {
  int n_subjects = 8;
  int n_activities = 6;
  int frames_per_sequence = 200;
  int points_per_frame = 300;
  double noise_std_m = 0.01;
  double subject_variation = 0.25;  // in [0, 1]
  std::uint64_t seed = 0;
  int mirrored_pairs = 2;   // leading activities form left/right mirror pairs
  int environments = 1;     // subjects are split into contiguous blocks E1, E2, ...
  double frame_rate_hz = 10.0;

  /// Throws UsageError on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j, SynthSpec base = {});

/// Activity names in generation order: mirrored pairs first, then fixed
/// symmetric motions, then procedural ones.
std::vector<std::string> synth_activity_names(const SynthSpec& spec);

/// Points of one frame, in the canonical frame (lateral, vertical, depth).
FrameCloud synth_frame(const SynthSpec& spec, int subject, int activity, int frame);

/// Writes <out_dir>/manifest.jsonl and <out_dir>/frames/<sequence>/<frame>.bin
/// and returns the manifest as written.
Manifest generate(const SynthSpec& spec, const std::filesystem::path& out_dir, unsigned threads = 1);

}  // namespace spectrahar
