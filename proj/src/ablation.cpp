#include "spectrahar/ablation.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "spectrahar/config_io.hpp"
#include "spectrahar/errors.hpp"
#include "spectrahar/parallel.hpp"

namespace spectrahar {

using nlohmann::json;

Evaluation evaluate_model(const TrainedModel& model, const std::vector<WindowFeature>& windows,
                          const EvalOptions& options) {
  if (windows.empty()) throw DataError("no windows to evaluate");
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < model.class_labels.size(); ++c) index[model.class_labels[c]] = static_cast<int>(c);
  Evaluation ev;
  ev.y_true.resize(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    auto it = index.find(windows[i].activity_id);
    if (it == index.end()) throw DataError("activity '" + windows[i].activity_id + "' is unknown to the model");
    ev.y_true[i] = it->second;
  }
  ev.scores.resize(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(model.class_labels.size()));
  parallel_for(windows.size(), options.threads, [&](std::size_t i) {
    const auto& v = windows[i].vector;
    Eigen::VectorXd row(static_cast<Eigen::Index>(v.size()));
    for (std::size_t d = 0; d < v.size(); ++d) row[static_cast<Eigen::Index>(d)] = v[d];
    ev.scores.row(static_cast<Eigen::Index>(i)) = predict_scores(model, row).transpose();
  });
  ev.report = compute_metrics(ev.y_true, ev.scores, model.class_labels, options.bootstrap_B, options.seed);
  return ev;
}

namespace {

const std::set<std::string> kFeatureKeys = {"strategy",     "use_eigenvectors", "k_val",
                                            "k_vec",        "window_seconds",   "stride_seconds",
                                            "radius_m",     "parts",            "min_valid_fraction",
                                            "temporal_stats"};

std::vector<int> parse_parts(const json& v) {
  if (v.is_array()) return v.get<std::vector<int>>();
  if (v.is_number_integer()) return {v.get<int>()};
  if (v.is_string()) {
    std::vector<int> out;
    std::stringstream ss(v.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, '+')) {
      try {
        out.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw UsageError("bad part list '" + v.get<std::string>() + "'");
      }
    }
    return out;
  }
  throw UsageError("parts must be an array, integer or \"a+b\" string");
}

std::vector<AblationCell> expand_axes(const json& base, const json& axes) {
  if (!axes.is_object() || axes.empty()) throw UsageError("grid axes must be a non-empty object");
  std::vector<json> combos = {base};
  for (const auto& [key, values] : axes.items()) {
    if (!values.is_array() || values.empty()) throw UsageError("grid axis '" + key + "' must be a non-empty array");
    std::vector<json> next;
    for (const auto& c : combos)
      for (const auto& v : values) {
        json o = c;
        o[key] = v;
        next.push_back(std::move(o));
      }
    combos = std::move(next);
  }
  std::vector<AblationCell> cells;
  for (auto& c : combos) cells.push_back({"", std::move(c)});
  return cells;
}

}  // namespace

std::vector<AblationCell> parse_grid(const json& grid) {
  std::vector<AblationCell> cells;
  json base = json::object();
  auto add = [&](const json& o) {
    if (!o.is_object()) throw UsageError("grid cell must be a JSON object");
    AblationCell cell{"", base};
    for (const auto& [k, v] : o.items()) cell.overrides[k] = v;
    cells.push_back(std::move(cell));
  };
  if (grid.is_array()) {
    for (const auto& o : grid) add(o);
  } else if (grid.is_object()) {
    for (const auto& [k, v] : grid.items())
      if (k != "base" && k != "cells" && k != "axes") throw UsageError("unknown grid key '" + k + "'");
    if (grid.contains("base")) base = grid.at("base");
    if (!base.is_object()) throw UsageError("grid base must be an object");
    if (grid.contains("cells") == grid.contains("axes")) throw UsageError("grid needs exactly one of cells or axes");
    if (grid.contains("cells")) {
      if (!grid.at("cells").is_array()) throw UsageError("grid cells must be an array");
      for (const auto& o : grid.at("cells")) add(o);
    } else {
      cells = expand_axes(base, grid.at("axes"));
    }
  } else {
    throw UsageError("grid must be a JSON array or object");
  }
  if (cells.empty()) throw UsageError("grid is empty");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    if (c.overrides.contains("name")) {
      c.name = c.overrides.at("name").is_string() ? c.overrides.at("name").get<std::string>() : c.overrides.at("name").dump();
      c.overrides.erase("name");
    } else {
      c.name = "cell" + std::to_string(i);
    }
  }
  return cells;
}

std::vector<AblationCell> load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read grid file " + path.string());
  try {
    return parse_grid(json::parse(in));
  } catch (const json::parse_error& e) {
    throw UsageError("grid file " + path.string() + ": " + e.what());
  }
}

void resolve_cell(const AblationCell& cell, FeatureConfig& features, ModelParams& model) {
  json fj = json::object(), mj = json::object();
  try {
    for (const auto& [k, v] : cell.overrides.items()) {
      if (k == "window_s") fj["window_seconds"] = v;
      else if (k == "parts") fj["parts"] = parse_parts(v);
      else if (kFeatureKeys.count(k)) fj[k] = v;
      else mj[k] = v;
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad cell override: ") + e.what());
  }
  features = feature_config_from_json(fj, features);
  features.validate();
  model = model_params_from_json(mj, model);
}

std::string parts_label(const std::vector<int>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "+" : "") + std::to_string(parts[i]);
  return s;
}

namespace {

struct ResolvedCell {
  FeatureConfig features;
  ModelParams model;
  std::vector<WindowFeature> train, test;
};

std::string group_key(const FeatureConfig& c) {
  return json{{"radius_m", c.radius_m}, {"k_val", c.k_val}, {"k_vec", c.k_vec}, {"use_eigenvectors", c.use_eigenvectors}}
      .dump();
}

std::string cell_hash(const FeatureConfig& f, const ModelParams& m) {
  return hash_hex(fnv1a64(to_json(f).dump() + "|" + to_json(m).dump()));
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string results_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream s;
  s << "name,config_hash,strategy,window_s,radius_m,parts,classifier,accuracy,accuracy_std,macro_f1,balanced_acc,"
       "top1,top5,n_windows,wall_time_s,error\n";
  for (const auto& r : rows) {
    s << r.name << ',' << r.config_hash << ',' << r.strategy << ',' << fmt_double(r.window_s) << ','
      << fmt_double(r.radius_m) << ',' << r.parts << ',' << r.classifier << ',';
    if (r.report) {
      const auto& m = *r.report;
      s << fmt_double(m.accuracy.mean) << ',' << fmt_double(m.accuracy.bootstrap_std) << ','
        << fmt_double(m.macro_f1.mean) << ',' << fmt_double(m.balanced_accuracy.mean) << ','
        << fmt_double(m.top1.mean) << ',' << fmt_double(m.top5.mean) << ',';
    } else {
      s << ",,,,,,";
    }
    std::string err = r.error;
    for (char& c : err)
      if (c == ',' || c == '\n') c = ';';
    s << r.n_windows << ',' << fmt_double(r.wall_time_s) << ',' << err << '\n';
  }
  return s.str();
}

std::vector<AblationRow> run_ablation(const std::vector<AblationCell>& cells, const Manifest& manifest,
                                      const SplitSpec& split_spec, const std::filesystem::path& out_dir,
                                      const EvalOptions& options) {
  if (cells.empty()) throw UsageError("grid is empty");
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : manifest.records) keys.emplace_back(r.subject_id, r.environment_id);
  const auto sides = assign_split(keys, split_spec);

  std::vector<AblationRow> rows(cells.size());
  std::vector<std::optional<ResolvedCell>> resolved(cells.size());
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    rows[i].name = cells[i].name;
    ResolvedCell rc;
    try {
      resolve_cell(cells[i], rc.features, rc.model);
    } catch (const Error& e) {
      rows[i].error = e.what();
      continue;
    }
    rows[i].config_hash = cell_hash(rc.features, rc.model);
    rows[i].strategy = to_string(rc.features.strategy);
    rows[i].window_s = rc.features.window_seconds;
    rows[i].radius_m = rc.features.radius_m;
    rows[i].parts = parts_label(rc.features.sorted_parts());
    rows[i].classifier = to_string(rc.model.kind);
    groups[group_key(rc.features)].push_back(i);
    resolved[i] = std::move(rc);
  }

  std::vector<double> assembly_time(cells.size(), 0.0);
  for (const auto& [key, members] : groups) {
    FeatureConfig frame_config = resolved[members.front()]->features;
    std::set<int> part_union;
    for (std::size_t i : members)
      for (int p : resolved[i]->features.parts) part_union.insert(p);
    frame_config.parts.assign(part_union.begin(), part_union.end());
    std::fprintf(stderr, "[ablate] extracting frames for %zu cell(s), radius %.3g, parts %s\n", members.size(),
                 frame_config.radius_m, parts_label(frame_config.parts).c_str());
    try {
      for (std::size_t s = 0; s < manifest.records.size(); ++s) {
        if (sides[s] == SplitSide::None) continue;
        const auto& record = manifest.records[s];
        const auto frames = sequence_frame_records(record, frame_config, options.threads);
        for (std::size_t i : members) {
          const auto t0 = std::chrono::steady_clock::now();
          auto seq = assemble_windows(frames, record, resolved[i]->features);
          auto& dest = sides[s] == SplitSide::Train ? resolved[i]->train : resolved[i]->test;
          for (auto& w : seq.windows) dest.push_back(std::move(w));
          assembly_time[i] += seconds_since(t0);
        }
      }
    } catch (const Error& e) {
      for (std::size_t i : members) {
        rows[i].error = e.what();
        resolved[i].reset();
      }
    }
  }

  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!resolved[i]) continue;
    auto& rc = *resolved[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if (rc.train.empty() || rc.test.empty()) throw DataError("split produced no train or no test windows");
      std::vector<std::string> labels;
      for (const auto& w : rc.train) labels.push_back(w.activity_id);
      const auto model = train_model(to_matrix(rc.train), labels, rc.model, rc.features, options.threads);
      auto ev = evaluate_model(model, rc.test, options);
      rows[i].n_windows = ev.report.n_windows;
      rows[i].report = std::move(ev.report);
      std::fprintf(stderr, "[ablate] %s: accuracy %.4f +- %.4f over %zu windows\n", rows[i].name.c_str(),
                   rows[i].report->accuracy.mean, rows[i].report->accuracy.bootstrap_std, rows[i].n_windows);
    } catch (const Error& e) {
      rows[i].error = e.what();
    }
    rows[i].wall_time_s = assembly_time[i] + seconds_since(t0);
    rc.train.clear();
    rc.test.clear();
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "results.csv", std::ios::binary);
    std::ofstream jl(out_dir / "reports.jsonl", std::ios::binary);
    if (!csv || !jl) throw DataError("cannot write results under " + out_dir.string());
    csv << results_csv(rows);
    for (const auto& r : rows) {
      json j = {{"name", r.name}, {"config_hash", r.config_hash}};
      if (r.report) j["report"] = to_json(*r.report);
      if (!r.error.empty()) j["error"] = r.error;
      jl << j.dump() << '\n';
    }
  }
  return rows;
}

}  // namespace spectrahar
