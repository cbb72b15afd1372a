#include "longctx/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "longctx/util.hpp"

namespace longctx {

using nlohmann::json;

std::string normalize_text(std::string_view s) {
  std::string no_punct;
  no_punct.reserve(s.size());
  for_each_codepoint(s, [&](char32_t cp, std::size_t off, std::size_t len) {
    if (is_unicode_punct(cp)) return;
    if (cp < 0x80) {
      no_punct.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(cp))));
    } else {
      no_punct.append(s.substr(off, len));
    }
  });
  std::string out;
  out.reserve(no_punct.size());
  for (std::string_view word : split_ws(no_punct)) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out.append(word);
  }
  return out;
}

int best_subspan_accuracy(std::string_view prediction,
                          const std::vector<std::string>& golds) {
  std::string pred = normalize_text(prediction);
  for (const auto& g : golds) {
    if (pred.find(normalize_text(g)) != std::string::npos) return 1;
  }
  return 0;
}

int exact_match(std::string_view prediction, std::string_view gold) {
  return normalize_text(prediction) == normalize_text(gold) ? 1 : 0;
}

namespace {

std::vector<std::string> tokenize_for_rouge(std::string_view s, TokenUnit unit) {
  std::vector<std::string> toks;
  if (unit == TokenUnit::words) {
    for (auto w : split_ws(s)) toks.emplace_back(w);
  } else {
    for_each_codepoint(s, [&](char32_t cp, std::size_t off, std::size_t len) {
      if (is_space_cp(cp)) return;
      toks.emplace_back(s.substr(off, len));
    });
  }
  return toks;
}

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double rouge_l(std::string_view prediction, std::string_view reference,
               TokenUnit unit) {
  auto pred = tokenize_for_rouge(prediction, unit);
  auto ref = tokenize_for_rouge(reference, unit);
  if (pred.empty() || ref.empty()) return 0.0;
  std::size_t lcs = lcs_length(pred, ref);
  if (lcs == 0) return 0.0;
  double p = static_cast<double>(lcs) / static_cast<double>(pred.size());
  double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

namespace {

double round2(double x) { return std::round(x * 100.0) / 100.0; }

// Natural ordering: digit runs compare numerically, so "5th" sorts before
// "10th" and "100,25" before "100,100".
bool label_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      long long na = std::stoll(a.substr(i, ie - i));
      long long nb = std::stoll(b.substr(j, je - j));
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::string format2(double x) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2) << x;
  return ss.str();
}

}  // namespace

MetricReport aggregate_report(const std::vector<RecordEntry>& records,
                              const std::vector<std::string>& group_by,
                              const std::string& task) {
  if (records.empty()) throw ConfigError("aggregate_report: no records");

  std::map<std::string, std::pair<double, std::size_t>> groups;
  for (const auto& rec : records) {
    std::string label;
    for (const auto& key : group_by) {
      auto it = rec.keys.find(key);
      if (it == rec.keys.end())
        throw ConfigError("aggregate_report: record missing group key: " + key);
      if (!label.empty()) label += ",";
      label += it->second;
    }
    if (group_by.empty()) label = "all";
    auto& cell = groups[label];
    cell.first += rec.score;
    cell.second += 1;
  }

  MetricReport report;
  report.task = task;
  report.group_by = group_by;
  std::vector<std::string> labels;
  labels.reserve(groups.size());
  for (const auto& [label, _] : groups) labels.push_back(label);
  std::sort(labels.begin(), labels.end(), label_less);

  double sum_means = 0.0;
  for (const auto& label : labels) {
    const auto& [total, n] = groups[label];
    double mean_pct = total / static_cast<double>(n) * 100.0;
    sum_means += mean_pct;
    report.cells.emplace_back(label, round2(mean_pct));
  }
  report.average = round2(sum_means / static_cast<double>(labels.size()));
  return report;
}

std::string render_table_text(const MetricReport& report) {
  if (report.cells.empty()) throw ConfigError("render_table: no records");
  std::ostringstream out;
  out << "task: " << report.task;
  if (!report.group_by.empty()) {
    out << "    group_by:";
    for (const auto& k : report.group_by) out << " " << k;
  }
  out << "\n";

  std::vector<std::string> headers, values;
  for (const auto& [label, score] : report.cells) {
    headers.push_back(label);
    values.push_back(format2(score));
  }
  headers.push_back("AVG");
  values.push_back(format2(report.average));

  for (std::size_t i = 0; i < headers.size(); ++i) {
    std::size_t w = std::max(headers[i].size(), values[i].size()) + 2;
    out << std::left << std::setw(static_cast<int>(w)) << headers[i];
  }
  out << "\n";
  for (std::size_t i = 0; i < headers.size(); ++i) {
    std::size_t w = std::max(headers[i].size(), values[i].size()) + 2;
    out << std::left << std::setw(static_cast<int>(w)) << values[i];
  }
  out << "\n";
  return out.str();
}

std::string render_comparison_text(
    const std::vector<std::pair<std::string, MetricReport>>& rows) {
  if (rows.empty()) throw ConfigError("render_comparison: no reports");
  const MetricReport& first = rows.front().second;
  std::size_t label_w = 0;
  for (const auto& [name, _] : rows) label_w = std::max(label_w, name.size());
  label_w += 2;

  std::ostringstream out;
  out << "task: " << first.task << "\n";
  out << std::left << std::setw(static_cast<int>(label_w)) << "model";
  for (const auto& [label, _] : first.cells)
    out << std::left << std::setw(9) << label;
  out << std::left << std::setw(9) << "AVG" << "\n";
  for (const auto& [name, report] : rows) {
    out << std::left << std::setw(static_cast<int>(label_w)) << name;
    for (const auto& [label, score] : report.cells)
      out << std::left << std::setw(9) << format2(score);
    out << std::left << std::setw(9) << format2(report.average) << "\n";
  }
  return out.str();
}

json report_to_json(const MetricReport& report) {
  json cells = json::object();
  for (const auto& [label, score] : report.cells) cells[label] = score;
  return json{{"task", report.task},
              {"group_by", report.group_by},
              {"cells", cells},
              {"average", report.average}};
}

MetricReport report_from_json(const json& j) {
  MetricReport r;
  r.task = j.at("task").get<std::string>();
  r.group_by = j.at("group_by").get<std::vector<std::string>>();
  std::vector<std::string> labels;
  for (auto it = j.at("cells").begin(); it != j.at("cells").end(); ++it)
    labels.push_back(it.key());
  std::sort(labels.begin(), labels.end(), label_less);
  for (const auto& label : labels)
    r.cells.emplace_back(label, j.at("cells").at(label).get<double>());
  r.average = j.at("average").get<double>();
  return r;
}

std::string ordinal(int n) {
  int mod100 = n % 100;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    switch (n % 10) {
      case 1: suffix = "st"; break;
      case 2: suffix = "nd"; break;
      case 3: suffix = "rd"; break;
      default: break;
    }
  }
  return std::to_string(n) + suffix;
}

}  // namespace longctx
