#include "adforge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace adforge::eval {

using nlohmann::ordered_json;

ConfusionCounts confusion(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw LengthMismatch("confusion needs aligned predictions and labels: " +
                         std::to_string(predictions.size()) + " vs " +
                         std::to_string(labels.size()));
  }
  if (predictions.empty()) throw EmptyInput("confusion over zero examples");

  ConfusionCounts counts;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int pred = predictions[i];
    const int label = labels[i];
    if ((pred != 0 && pred != 1) || (label != 0 && label != 1)) {
      throw std::invalid_argument("confusion expects binary values, got " + std::to_string(pred) +
                                  "/" + std::to_string(label) + " at index " + std::to_string(i));
    }
    if (label == 1) {
      (pred == 1 ? counts.tp : counts.fn)++;
    } else {
      (pred == 1 ? counts.fp : counts.tn)++;
    }
  }
  return counts;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

PrfMetrics prf1(const ConfusionCounts& counts) {
  PrfMetrics metrics;
  const auto ratio = [&metrics](std::int64_t num, std::int64_t denom) {
    if (denom <= 0) {
      metrics.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(denom);
  };
  metrics.precision = ratio(counts.tp, counts.tp + counts.fp);
  metrics.recall = ratio(counts.tp, counts.tp + counts.fn);
  if (metrics.precision + metrics.recall <= 0.0) metrics.degenerate = true;
  metrics.f1 = f1_score(metrics.precision, metrics.recall);
  metrics.accuracy = ratio(counts.tp + counts.tn, counts.total());
  return metrics;
}

double detection_accuracy(const std::vector<double>& scores, double threshold) {
  if (scores.empty()) throw EmptyInput("detection accuracy over zero scores");
  const auto flagged = std::count_if(scores.begin(), scores.end(),
                                     [threshold](double s) { return s >= threshold; });
  return static_cast<double>(flagged) / static_cast<double>(scores.size());
}

std::string MatrixRow::label() const {
  std::ostringstream out;
  out << temperature;
  auto rendered = out.str();
  if (rendered.find('.') == std::string::npos) rendered += ".0";
  return method + " (T=" + rendered + ")";
}

DetectionMatrix build_detection_matrix(const std::vector<MatrixRow>& rows,
                                       const std::vector<std::string>& classifiers,
                                       const RunScores& scores, double threshold) {
  DetectionMatrix matrix;
  matrix.rows = rows;
  matrix.columns = classifiers;
  matrix.cells.reserve(rows.size());
  for (const auto& row : rows) {
    const auto per_classifier = scores.find(row);
    std::vector<double> line;
    line.reserve(classifiers.size());
    for (const auto& classifier : classifiers) {
      if (per_classifier == scores.end()) {
        throw MissingCell("no scores for " + row.label() + " under " + classifier);
      }
      const auto cell = per_classifier->second.find(classifier);
      if (cell == per_classifier->second.end() || cell->second.empty()) {
        throw MissingCell("no scores for " + row.label() + " under " + classifier);
      }
      line.push_back(detection_accuracy(cell->second, threshold));
    }
    matrix.cells.push_back(std::move(line));
  }
  return matrix;
}

std::string to_string(Alternative alternative) {
  switch (alternative) {
    case Alternative::two_sided: return "two_sided";
    case Alternative::less: return "less";
    case Alternative::greater: return "greater";
  }
  return "two_sided";
}

std::string to_string(WilcoxonMode mode) {
  return mode == WilcoxonMode::exact ? "exact" : "normal_approx";
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double clamp_p(double p) { return std::clamp(p, 1e-300, 1.0); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    Alternative alternative) {
  if (a.size() != b.size()) {
    throw LengthMismatch("paired test needs equal lengths: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  if (a.size() < 2) throw TooFewPairs("paired test needs at least 2 pairs");

  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) throw AllZeroDifferences("every pair is tied; no signed ranks to test");

  const int n = static_cast<int>(diffs.size());
  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&diffs](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });

  // average ranks over runs of tied |d|; tie sizes feed the variance correction
  std::vector<double> ranks(diffs.size());
  std::vector<int> tie_sizes;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end + 1 < order.size() &&
           std::abs(diffs[order[end + 1]]) == std::abs(diffs[order[start]])) {
      ++end;
    }
    const double avg_rank = (static_cast<double>(start + 1) + static_cast<double>(end + 1)) / 2.0;
    for (std::size_t i = start; i <= end; ++i) ranks[order[i]] = avg_rank;
    tie_sizes.push_back(static_cast<int>(end - start + 1));
    start = end + 1;
  }

  WilcoxonResult result;
  result.n_effective = n;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    (diffs[i] > 0.0 ? result.w_plus : result.w_minus) += ranks[i];
  }

  if (n <= 20) {
    result.mode = WilcoxonMode::exact;
    // subset-sum distribution of W+ over doubled ranks (halves become exact)
    const std::int64_t total_doubled = static_cast<std::int64_t>(n) * (n + 1);
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(total_doubled) + 1, 0);
    ways[0] = 1;
    for (double rank : ranks) {
      const auto doubled = static_cast<std::int64_t>(std::llround(2.0 * rank));
      for (std::int64_t s = total_doubled; s >= doubled; --s) {
        ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - doubled)];
      }
    }
    const double denom = std::pow(2.0, n);
    const auto observed = static_cast<std::int64_t>(std::llround(2.0 * result.w_plus));
    std::uint64_t at_most = 0, at_least = 0;
    for (std::int64_t s = 0; s <= total_doubled; ++s) {
      if (s <= observed) at_most += ways[static_cast<std::size_t>(s)];
      if (s >= observed) at_least += ways[static_cast<std::size_t>(s)];
    }
    const double p_le = static_cast<double>(at_most) / denom;
    const double p_ge = static_cast<double>(at_least) / denom;
    switch (alternative) {
      case Alternative::two_sided:
        result.p_value = clamp_p(2.0 * std::min(p_le, p_ge));
        break;
      case Alternative::greater: result.p_value = clamp_p(p_ge); break;
      case Alternative::less: result.p_value = clamp_p(p_le); break;
    }
  } else {
    result.mode = WilcoxonMode::normal_approx;
    const double nd = n;
    const double mean = nd * (nd + 1.0) / 4.0;
    double tie_term = 0.0;
    for (const int t : tie_sizes) {
      tie_term += static_cast<double>(t) * t * t - t;
    }
    const double variance = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    const double sigma = std::sqrt(std::max(variance, 0.0));
    if (sigma == 0.0) {
      result.p_value = 1.0;
      return result;
    }
    const double diff = result.w_plus - mean;
    switch (alternative) {
      case Alternative::two_sided: {
        const double z = (diff - 0.5 * (diff > 0.0 ? 1.0 : diff < 0.0 ? -1.0 : 0.0)) / sigma;
        result.p_value = clamp_p(2.0 * (1.0 - normal_cdf(std::abs(z))));
        break;
      }
      case Alternative::greater:
        result.p_value = clamp_p(1.0 - normal_cdf((diff - 0.5) / sigma));
        break;
      case Alternative::less:
        result.p_value = clamp_p(normal_cdf((diff + 0.5) / sigma));
        break;
    }
  }
  return result;
}

namespace {

std::string percent_cell(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value * 100.0;
  return out.str();
}

std::string metric_cell(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << value;
  return out.str();
}

std::string p_cell(double value) {
  std::ostringstream out;
  out << std::setprecision(4) << value;
  return out.str();
}

}  // namespace

void render_report(const DetectionMatrix& matrix, const std::vector<PrfReportEntry>& prf,
                   const std::vector<WilcoxonReportEntry>& wilcoxon,
                   const std::filesystem::path& text_path,
                   const std::filesystem::path& json_path) {
  std::ostringstream text;
  text << "Ad detection accuracy (%)\n\n";

  std::size_t label_width = std::string("method").size();
  for (const auto& row : matrix.rows) label_width = std::max(label_width, row.label().size());
  std::vector<std::size_t> widths;
  for (const auto& column : matrix.columns) widths.push_back(std::max<std::size_t>(6, column.size()));

  text << std::left << std::setw(static_cast<int>(label_width)) << "method";
  for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
    text << " | " << std::right << std::setw(static_cast<int>(widths[c])) << matrix.columns[c];
  }
  text << "\n" << std::string(label_width, '-');
  for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
    text << "-+-" << std::string(widths[c], '-');
  }
  text << "\n";
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    text << std::left << std::setw(static_cast<int>(label_width)) << matrix.rows[r].label();
    for (std::size_t c = 0; c < matrix.columns.size(); ++c) {
      text << " | " << std::right << std::setw(static_cast<int>(widths[c]))
           << percent_cell(matrix.cells[r][c]);
    }
    text << "\n";
  }

  if (!prf.empty()) {
    text << "\nClassifier metrics\n\n";
    std::size_t tag_width = std::string("tag").size();
    for (const auto& entry : prf) tag_width = std::max(tag_width, entry.tag.size());
    text << std::left << std::setw(static_cast<int>(tag_width)) << "tag"
         << "  precision  recall  f1     accuracy\n";
    for (const auto& entry : prf) {
      text << std::left << std::setw(static_cast<int>(tag_width)) << entry.tag << "  "
           << std::right << std::setw(9) << metric_cell(entry.metrics.precision) << "  "
           << std::setw(6) << metric_cell(entry.metrics.recall) << "  " << std::setw(5)
           << metric_cell(entry.metrics.f1) << "  " << std::setw(8)
           << metric_cell(entry.metrics.accuracy);
      if (entry.metrics.degenerate) text << "  (degenerate)";
      text << "\n";
    }
  }

  if (!wilcoxon.empty()) {
    text << "\nWilcoxon signed-rank\n\n";
    for (const auto& entry : wilcoxon) {
      text << entry.label << ": W+=" << entry.result.w_plus << " W-=" << entry.result.w_minus
           << " n=" << entry.result.n_effective << " p=" << p_cell(entry.result.p_value) << " ("
           << to_string(entry.result.mode) << ")\n";
    }
  }

  ordered_json report;
  auto& matrix_json = report["matrix"];
  matrix_json["rows"] = ordered_json::array();
  for (const auto& row : matrix.rows) {
    matrix_json["rows"].push_back({{"method", row.method}, {"temperature", row.temperature}});
  }
  matrix_json["columns"] = matrix.columns;
  matrix_json["cells"] = matrix.cells;
  report["prf"] = ordered_json::array();
  for (const auto& entry : prf) {
    report["prf"].push_back({{"tag", entry.tag},
                             {"precision", entry.metrics.precision},
                             {"recall", entry.metrics.recall},
                             {"f1", entry.metrics.f1},
                             {"accuracy", entry.metrics.accuracy},
                             {"degenerate", entry.metrics.degenerate}});
  }
  report["wilcoxon"] = ordered_json::array();
  for (const auto& entry : wilcoxon) {
    report["wilcoxon"].push_back({{"label", entry.label},
                                  {"w_plus", entry.result.w_plus},
                                  {"w_minus", entry.result.w_minus},
                                  {"n_effective", entry.result.n_effective},
                                  {"p_value", entry.result.p_value},
                                  {"mode", to_string(entry.result.mode)}});
  }

  std::ofstream text_file(text_path, std::ios::binary | std::ios::trunc);
  if (!text_file) throw IoError("cannot open " + text_path.string() + " for writing");
  text_file << text.str();
  text_file.flush();
  if (!text_file) throw IoError("write failed: " + text_path.string());

  std::ofstream json_file(json_path, std::ios::binary | std::ios::trunc);
  if (!json_file) throw IoError("cannot open " + json_path.string() + " for writing");
  json_file << report.dump(2) << '\n';
  json_file.flush();
  if (!json_file) throw IoError("write failed: " + json_path.string());
}

}  // namespace adforge::eval
