#include "spectrahar/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "spectrahar/errors.hpp"

namespace spectrahar {

using nlohmann::json;

bool SplitSpec::Side::accepts(const std::string& subject, const std::string& environment) const {
  return (subjects.empty() || subjects.count(subject)) && (environments.empty() || environments.count(environment));
}

SplitSpec cross_scene_split() {
  SplitSpec s;
  s.name = "cross_scene";
  s.train.environments = {"E1", "E2", "E3"};
  s.test.environments = {"E4"};
  return s;
}

namespace {

SplitSpec::Side side_from_json(const json& j) {
  SplitSpec::Side side;
  if (j.is_null()) return side;
  if (!j.is_object()) throw UsageError("split side must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "subjects") side.subjects = v.get<std::set<std::string>>();
    else if (key == "environments") side.environments = v.get<std::set<std::string>>();
    else throw UsageError("unknown split side key '" + key + "'");
  }
  return side;
}

json side_to_json(const SplitSpec::Side& s) {
  return {{"subjects", s.subjects}, {"environments", s.environments}};
}

}  // namespace

SplitSpec split_from_json(const json& j) {
  if (!j.is_object()) throw UsageError("split spec must be a JSON object");
  SplitSpec s;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "name") s.name = v.get<std::string>();
      else if (key == "train") s.train = side_from_json(v);
      else if (key == "test") s.test = side_from_json(v);
      else if (key == "holdout_subjects") s.holdout_subjects = v.get<int>();
      else if (key == "holdout_fraction") s.holdout_fraction = v.get<double>();
      else throw UsageError("unknown split key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad split spec: ") + e.what());
  }
  if (s.holdout_subjects && *s.holdout_subjects < 1) throw UsageError("holdout_subjects must be >= 1");
  if (s.holdout_fraction && !(*s.holdout_fraction > 0.0 && *s.holdout_fraction < 1.0))
    throw UsageError("holdout_fraction must be in (0, 1)");
  return s;
}

json to_json(const SplitSpec& s) {
  json j = {{"name", s.name}, {"train", side_to_json(s.train)}, {"test", side_to_json(s.test)}};
  if (s.holdout_subjects) j["holdout_subjects"] = *s.holdout_subjects;
  if (s.holdout_fraction) j["holdout_fraction"] = *s.holdout_fraction;
  return j;
}

SplitSpec parse_split(const std::string& text) {
  if (text == "cross_scene") return cross_scene_split();
  if (text == "e04_7_3") {
    SplitSpec s;
    s.name = text;
    s.holdout_fraction = 0.3;
    return s;
  }
  if (text.rfind("holdout:", 0) == 0) {
    SplitSpec s;
    s.name = text;
    try {
      s.holdout_subjects = std::stoi(text.substr(8));
    } catch (const std::exception&) {
      throw UsageError("bad holdout count in '" + text + "'");
    }
    if (*s.holdout_subjects < 1) throw UsageError("holdout count must be >= 1");
    return s;
  }
  std::ifstream in(text);
  if (!in) throw UsageError("unknown split '" + text + "' (not a preset and not a readable file)");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("split file " + text + ": " + e.what());
  }
  auto s = split_from_json(j);
  if (s.name.empty()) s.name = std::filesystem::path(text).stem().string();
  return s;
}

std::vector<SplitSide> assign_split(const std::vector<std::pair<std::string, std::string>>& keys,
                                    const SplitSpec& spec) {
  std::vector<SplitSide> sides(keys.size(), SplitSide::None);
  if (spec.holdout_subjects || spec.holdout_fraction) {
    std::set<std::string> subjects;
    for (const auto& k : keys) subjects.insert(k.first);
    const auto n = static_cast<int>(subjects.size());
    int held = spec.holdout_subjects ? *spec.holdout_subjects
                                     : static_cast<int>(std::lround(*spec.holdout_fraction * n));
    if (held < 1 || held >= n)
      throw DataError("split '" + spec.name + "' holds out " + std::to_string(held) + " of " + std::to_string(n) +
                      " subjects; both sides need at least one");
    std::set<std::string> test(std::next(subjects.begin(), n - held), subjects.end());
    for (std::size_t i = 0; i < keys.size(); ++i)
      sides[i] = test.count(keys[i].first) ? SplitSide::Test : SplitSide::Train;
    return sides;
  }
  std::map<std::string, SplitSide> subject_side;
  bool any_train = false, any_test = false;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& [subject, env] = keys[i];
    const bool tr = spec.train.accepts(subject, env);
    const bool te = spec.test.accepts(subject, env);
    if (tr && te) throw DataError("split '" + spec.name + "': subject " + subject + " in environment " + env +
                                  " matches both train and test filters");
    if (!tr && !te) continue;
    const SplitSide side = tr ? SplitSide::Train : SplitSide::Test;
    auto [it, inserted] = subject_side.emplace(subject, side);
    if (!inserted && it->second != side)
      throw DataError("split '" + spec.name + "': subject " + subject + " appears in both train and test");
    sides[i] = side;
    any_train |= tr;
    any_test |= te;
  }
  if (!any_train || !any_test) throw DataError("split '" + spec.name + "' leaves the train or test side empty");
  return sides;
}

RecordSplit split(const std::vector<SequenceRecord>& records, const SplitSpec& spec) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : records) keys.emplace_back(r.subject_id, r.environment_id);
  const auto sides = assign_split(keys, spec);
  RecordSplit out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (sides[i] == SplitSide::Train) out.train.push_back(records[i]);
    else if (sides[i] == SplitSide::Test) out.test.push_back(records[i]);
  }
  return out;
}

WindowSplit split(const std::vector<WindowFeature>& windows, const SplitSpec& spec) {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& w : windows) keys.emplace_back(w.subject_id, w.environment_id);
  const auto sides = assign_split(keys, spec);
  WindowSplit out;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (sides[i] == SplitSide::Train) out.train.push_back(windows[i]);
    else if (sides[i] == SplitSide::Test) out.test.push_back(windows[i]);
  }
  return out;
}

}  // namespace spectrahar
