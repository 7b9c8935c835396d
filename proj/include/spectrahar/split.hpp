#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "spectrahar/features.hpp"
#include "spectrahar/ingest.hpp"

namespace spectrahar {

/// Subject-independent split. A side accepts a record when its subject and
/// environment pass that side's filters (an empty set accepts everything).
/// With `holdout_subjects` set, the filters are ignored and the last N
/// subjects in sorted order form the test side.
struct SplitSpec {
  struct Side {
    std::set<std::string> subjects;
    std::set<std::string> environments;
    bool accepts(const std::string& subject, const std::string& environment) const;
  };
  std::string name;
  Side train;
  Side test;
  std::optional<int> holdout_subjects;
  std::optional<double> holdout_fraction;
};

/// Presets: "cross_scene" (train E1-E3, test E4), "e04_7_3" (30% of subjects
/// held out), "holdout:N"; anything else is read as a JSON split file.
SplitSpec parse_split(const std::string& text);
SplitSpec split_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SplitSpec& spec);
SplitSpec cross_scene_split();

enum class SplitSide { None, Train, Test };

/// Side of each (subject, environment) key. Throws DataError when a subject
/// lands on both sides or either side is empty.
std::vector<SplitSide> assign_split(const std::vector<std::pair<std::string, std::string>>& keys,
                                    const SplitSpec& spec);

struct RecordSplit {
  std::vector<SequenceRecord> train;
  std::vector<SequenceRecord> test;
};
RecordSplit split(const std::vector<SequenceRecord>& records, const SplitSpec& spec);

struct WindowSplit {
  std::vector<WindowFeature> train;
  std::vector<WindowFeature> test;
};
WindowSplit split(const std::vector<WindowFeature>& windows, const SplitSpec& spec);

}  // namespace spectrahar
