#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace longctx {

/// Lowercases, strips unicode punctuation, removes standalone English
/// articles (a, an, the), collapses whitespace. Idempotent.
std::string normalize_text(std::string_view s);

/// 1 iff any normalized gold is a substring of the normalized prediction.
int best_subspan_accuracy(std::string_view prediction,
                          const std::vector<std::string>& golds);

/// 1 iff the normalized strings are equal.
int exact_match(std::string_view prediction, std::string_view gold);

enum class TokenUnit { words, characters };

/// LCS-F1 over token sequences: whitespace tokens for English, characters
/// for Chinese. 0 when either side is empty.
double rouge_l(std::string_view prediction, std::string_view reference,
               TokenUnit unit = TokenUnit::words);

struct MetricReport {
  std::string task;
  std::vector<std::string> group_by;
  /// Ordered cells, percent rounded to 2 decimals.
  std::vector<std::pair<std::string, double>> cells;
  double average = 0.0;

  bool operator==(const MetricReport&) const = default;
};

/// One scored record with its grouping key values.
struct RecordEntry {
  std::map<std::string, std::string> keys;
  double score = 0.0;  // in [0, 1]
};

/// Per-group mean x100 (2 decimals); AVG = unweighted mean of group means.
/// Cells are ordered numerically when every group label has a numeric prefix
/// ("1st" < "5th" < "10th"), lexicographically otherwise.
MetricReport aggregate_report(const std::vector<RecordEntry>& records,
                              const std::vector<std::string>& group_by,
                              const std::string& task);

/// Aligned plain-text rendering; header row ends with AVG.
std::string render_table_text(const MetricReport& report);

/// Side-by-side rendering of reports sharing one column layout; one row per
/// report, labelled.
std::string render_comparison_text(
    const std::vector<std::pair<std::string, MetricReport>>& rows);

nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);

/// "1st", "2nd", "3rd", "4th", ... (Table-style position labels).
std::string ordinal(int n);

}  // namespace longctx
