#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adforge/errors.hpp"

namespace adforge::eval {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Standard contingency tally over aligned binary predictions and labels.
ConfusionCounts confusion(const std::vector<int>& predictions, const std::vector<int>& labels);

struct PrfMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool degenerate = false;  // some denominator was zero; affected metrics are 0
};

PrfMetrics prf1(const ConfusionCounts& counts);

// F1 from precision and recall alone; 0 when both are 0.
double f1_score(double precision, double recall);

// Fraction of scores at or above the threshold. The scores must all come from
// responses known to contain ads, so this is recall on a positive-only set.
double detection_accuracy(const std::vector<double>& scores, double threshold);

struct MatrixRow {
  std::string method;
  double temperature = 0.0;

  std::string label() const;
  bool operator<(const MatrixRow& other) const {
    return method != other.method ? method < other.method : temperature < other.temperature;
  }
  bool operator==(const MatrixRow&) const = default;
};

struct DetectionMatrix {
  std::vector<MatrixRow> rows;
  std::vector<std::string> columns;              // classifier tags
  std::vector<std::vector<double>> cells;        // [row][column], each in [0,1]
};

using RunScores = std::map<MatrixRow, std::map<std::string, std::vector<double>>>;

// One detection_accuracy cell per (row, column); a missing or empty score
// list raises MissingCell naming both.
DetectionMatrix build_detection_matrix(const std::vector<MatrixRow>& rows,
                                       const std::vector<std::string>& classifiers,
                                       const RunScores& scores, double threshold);

enum class Alternative { two_sided, less, greater };
enum class WilcoxonMode { exact, normal_approx };

std::string to_string(Alternative alternative);
std::string to_string(WilcoxonMode mode);

struct WilcoxonResult {
  double w_plus = 0.0;
  double w_minus = 0.0;
  int n_effective = 0;
  double p_value = 1.0;
  WilcoxonMode mode = WilcoxonMode::exact;
};

// Paired signed-rank test on a - b. Zero differences are dropped, tied
// absolute differences get average ranks. Up to 20 effective pairs the p-value
// comes from the full sign-assignment distribution; past that a normal
// approximation with tie-corrected variance and continuity correction.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    Alternative alternative = Alternative::two_sided);

struct PrfReportEntry {
  std::string tag;
  PrfMetrics metrics;
};

struct WilcoxonReportEntry {
  std::string label;
  WilcoxonResult result;
};

// Writes the text table (cells as percentages, two decimals) and the JSON
// report ({"matrix", "prf", "wilcoxon"}) next to each other.
void render_report(const DetectionMatrix& matrix, const std::vector<PrfReportEntry>& prf,
                   const std::vector<WilcoxonReportEntry>& wilcoxon,
                   const std::filesystem::path& text_path,
                   const std::filesystem::path& json_path);

}  // namespace adforge::eval
