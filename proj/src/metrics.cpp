#include "spectrahar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "spectrahar/errors.hpp"

namespace spectrahar {

using Confusion = std::vector<std::vector<long>>;

double macro_f1(const Confusion& cm) {
  const std::size_t C = cm.size();
  if (C == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    long tp = cm[c][c], row = 0, col = 0;
    for (std::size_t k = 0; k < C; ++k) {
      row += cm[c][k];
      col += cm[k][c];
    }
    const long denom = row + col;
    if (denom > 0) sum += 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  return sum / static_cast<double>(C);
}

double balanced_accuracy(const Confusion& cm) {
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    long row = 0;
    for (long v : cm[c]) row += v;
    if (row == 0) continue;
    sum += static_cast<double>(cm[c][c]) / static_cast<double>(row);
    ++present;
  }
  return present ? sum / present : 0.0;
}

std::vector<std::vector<double>> row_percentages(const Confusion& cm) {
  std::vector<std::vector<double>> out(cm.size());
  for (std::size_t r = 0; r < cm.size(); ++r) {
    long row = 0;
    for (long v : cm[r]) row += v;
    out[r].assign(cm[r].size(), 0.0);
    if (row == 0) continue;
    for (std::size_t c = 0; c < cm[r].size(); ++c)
      out[r][c] = 100.0 * static_cast<double>(cm[r][c]) / static_cast<double>(row);
  }
  return out;
}

namespace {

// Per-window outcome; everything a resample needs.
struct Outcome {
  int truth;
  int pred;
  int rank;  // 0-based position of the true class in the score ranking
};

struct PointMetrics {
  double accuracy, macro_f1, balanced, top1, top5;
};

PointMetrics evaluate(const std::vector<Outcome>& all, const std::vector<std::size_t>* sample, std::size_t C,
                      Confusion* confusion_out) {
  Confusion cm(C, std::vector<long>(C, 0));
  long correct = 0, top5 = 0;
  const std::size_t n = sample ? sample->size() : all.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Outcome& o = all[sample ? (*sample)[i] : i];
    ++cm[o.truth][o.pred];
    correct += o.rank == 0;
    top5 += o.rank < 5;
  }
  const double N = static_cast<double>(n);
  PointMetrics m{correct / N, macro_f1(cm), balanced_accuracy(cm), correct / N, top5 / N};
  if (confusion_out) *confusion_out = std::move(cm);
  return m;
}

double population_std(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

MetricReport report_from_outcomes(const std::vector<Outcome>& outcomes, const std::vector<std::string>& labels,
                                  int B, std::uint64_t seed) {
  if (outcomes.empty()) throw UsageError("cannot compute metrics on an empty prediction set");
  if (B < 0) throw UsageError("bootstrap count must be >= 0");
  const std::size_t C = labels.size();
  MetricReport r;
  r.class_labels = labels;
  r.n_windows = outcomes.size();
  const PointMetrics point = evaluate(outcomes, nullptr, C, &r.confusion);

  std::vector<double> acc, f1, bal, t1, t5;
  if (B > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, outcomes.size() - 1);
    std::vector<std::size_t> sample(outcomes.size());
    for (int b = 0; b < B; ++b) {
      for (auto& s : sample) s = pick(rng);
      const PointMetrics m = evaluate(outcomes, &sample, C, nullptr);
      acc.push_back(m.accuracy);
      f1.push_back(m.macro_f1);
      bal.push_back(m.balanced);
      t1.push_back(m.top1);
      t5.push_back(m.top5);
    }
  }
  r.accuracy = {point.accuracy, population_std(acc)};
  r.macro_f1 = {point.macro_f1, population_std(f1)};
  r.balanced_accuracy = {point.balanced, population_std(bal)};
  r.top1 = {point.top1, population_std(t1)};
  r.top5 = {point.top5, population_std(t5)};

  for (std::size_t c = 0; c < C; ++c) {
    ClassMetric cmx;
    cmx.label = labels[c];
    long col = 0;
    for (std::size_t k = 0; k < C; ++k) {
      cmx.support += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    const long tp = r.confusion[c][c];
    cmx.recall = cmx.support ? static_cast<double>(tp) / static_cast<double>(cmx.support) : 0.0;
    cmx.f1 = (cmx.support + col) ? 2.0 * static_cast<double>(tp) / static_cast<double>(cmx.support + col) : 0.0;
    r.per_class.push_back(cmx);
  }
  return r;
}

void check_labels(const std::vector<int>& y, std::size_t C) {
  for (int v : y)
    if (v < 0 || static_cast<std::size_t>(v) >= C) throw UsageError("label index out of range");
}

}  // namespace

MetricReport compute_metrics(const std::vector<int>& y_true, const Eigen::MatrixXd& scores,
                             const std::vector<std::string>& class_labels, int bootstrap_B, std::uint64_t seed) {
  if (y_true.empty()) throw UsageError("cannot compute metrics on an empty prediction set");
  if (static_cast<Eigen::Index>(y_true.size()) != scores.rows())
    throw UsageError("label count does not match score rows");
  if (scores.cols() != static_cast<Eigen::Index>(class_labels.size()))
    throw UsageError("score columns do not match class count");
  check_labels(y_true, class_labels.size());
  std::vector<Outcome> outcomes(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const auto row = scores.row(static_cast<Eigen::Index>(i));
    int best = 0;
    for (Eigen::Index c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = static_cast<int>(c);
    // Rank of the truth under the same ordering: strictly better scores, plus
    // equal scores at lower indices.
    const double t = row[y_true[i]];
    int rank = 0;
    for (Eigen::Index c = 0; c < row.size(); ++c)
      if (row[c] > t || (row[c] == t && c < y_true[i])) ++rank;
    outcomes[i] = {y_true[i], best, rank};
  }
  return report_from_outcomes(outcomes, class_labels, bootstrap_B, seed);
}

MetricReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                             const std::vector<std::string>& class_labels, int bootstrap_B, std::uint64_t seed) {
  if (y_true.size() != y_pred.size()) throw UsageError("label and prediction counts differ");
  check_labels(y_true, class_labels.size());
  check_labels(y_pred, class_labels.size());
  std::vector<Outcome> outcomes(y_true.size());
  for (std::size_t i = 0; i < y_true.size(); ++i)
    outcomes[i] = {y_true[i], y_pred[i], y_true[i] == y_pred[i] ? 0 : 1 << 20};
  return report_from_outcomes(outcomes, class_labels, bootstrap_B, seed);
}

nlohmann::json to_json(const MetricReport& r) {
  auto value = [](const MetricValue& v) { return nlohmann::json{{"mean", v.mean}, {"bootstrap_std", v.bootstrap_std}}; };
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& c : r.per_class)
    per_class.push_back({{"label", c.label}, {"f1", c.f1}, {"recall", c.recall}, {"support", c.support}});
  return {{"accuracy", value(r.accuracy)},
          {"macro_f1", value(r.macro_f1)},
          {"balanced_accuracy", value(r.balanced_accuracy)},
          {"top1", value(r.top1)},
          {"top5", value(r.top5)},
          {"n_windows", r.n_windows},
          {"class_labels", r.class_labels},
          {"confusion", r.confusion},
          {"per_class", per_class}};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

std::string confusion_svg(const MetricReport& r) {
  const auto pct = row_percentages(r.confusion);
  const int C = static_cast<int>(r.class_labels.size());
  const int cell = 56, margin = 140;
  const int size = margin + C * cell + 20;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
    << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << margin << "\" y=\"14\" font-size=\"12\">predicted</text>\n";
  s << "<text x=\"4\" y=\"" << margin - 6 << "\" font-size=\"12\">true</text>\n";
  for (int c = 0; c < C; ++c) {
    const std::string label = xml_escape(r.class_labels[c]);
    const int pos = margin + c * cell + cell / 2;
    s << "<text x=\"" << pos << "\" y=\"" << margin - 8 << "\" text-anchor=\"start\" transform=\"rotate(-45 " << pos
      << ' ' << margin - 8 << ")\">" << label << "</text>\n";
    s << "<text x=\"" << margin - 6 << "\" y=\"" << pos + 4 << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  for (int i = 0; i < C; ++i) {
    for (int j = 0; j < C; ++j) {
      const double p = pct[i][j];
      // White to dark blue by row percentage.
      const int shade = static_cast<int>(std::lround(255.0 - 2.0 * p));
      const int x = margin + j * cell, y = margin + i * cell;
      s << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb("
        << shade << ',' << shade << ",255)\" stroke=\"#888\"/>\n";
      const char* ink = p > 60.0 ? "white" : "black";
      s << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 - 2 << "\" text-anchor=\"middle\" fill=\"" << ink
        << "\">" << r.confusion[i][j] << "</text>\n";
      s << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 11 << "\" text-anchor=\"middle\" fill=\""
        << ink << "\">" << fmt("%.1f%%", p) << "</text>\n";
    }
  }
  s << "</svg>\n";
  return s.str();
}

void emit_confusion(const MetricReport& r, const std::filesystem::path& csv_path,
                    const std::filesystem::path& svg_path) {
  std::ostringstream csv;
  auto header = [&] {
    csv << "true\\pred";
    for (const auto& l : r.class_labels) csv << ',' << csv_field(l);
    csv << '\n';
  };
  header();
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    csv << csv_field(r.class_labels[i]);
    for (long v : r.confusion[i]) csv << ',' << v;
    csv << '\n';
  }
  csv << '\n';
  header();
  const auto pct = row_percentages(r.confusion);
  for (std::size_t i = 0; i < pct.size(); ++i) {
    csv << csv_field(r.class_labels[i]);
    for (double v : pct[i]) csv << ',' << fmt("%.2f", v);
    csv << '\n';
  }
  write_text(csv_path, csv.str());
  write_text(svg_path, confusion_svg(r));
}

}  // namespace spectrahar
