#pragma once

#include <string>
#include <vector>

#include "egonet/eventlog.hpp"
#include "json.hpp"

namespace egonet {

/// Quantile by linear interpolation between order statistics at p*(n-1)
/// (the common "type 7" rule). `sorted` must be ascending and non-empty.
double quantile(const std::vector<double>& sorted, double p);

struct FilterResult {
  std::vector<double> kept;
  // False when there were too few samples (< 4) to filter.
  bool filtered = false;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Drops samples outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; keeps input order.
FilterResult filter_outliers(const std::vector<double>& samples);

struct ReportRow {
  std::string task;
  std::string condition;
  std::string measure;
  std::size_t samples = 0;
  std::size_t kept = 0;
  double mean = 0.0;
  double median = 0.0;
  // Population standard deviation of the kept samples.
  double sd = 0.0;
  // Outlier membership decided on log values; aggregates stay untransformed.
  bool log_transformed = false;
  bool filtered = false;
};

struct AnalysisReport {
  std::vector<ReportRow> rows;
  std::vector<std::string> warnings;
  std::size_t logs_used = 0;
};

/// Empty string when complete, otherwise why not: every pass and task that
/// starts must also end.
std::string log_problem(const EventLog& log);

/// Aggregates measured passes only, per task kind, condition and measure.
/// Incomplete logs are skipped with a warning. Throws InputError when no
/// complete log remains.
AnalysisReport analyze(const std::vector<EventLog>& logs);

/// Reads every *.ndjson / *.jsonl file in a directory (sorted by name).
/// Unreadable files become warnings. Throws InputError("no logs found ...")
/// when the directory holds no log files.
AnalysisReport analyze_directory(const std::string& dir);

std::string report_csv(const AnalysisReport& report);
nlohmann::json report_json(const AnalysisReport& report);

/// Questionnaire records as CSV: log index, instrument, context, then the items verbatim.
std::string questionnaires_csv(const std::vector<EventLog>& logs);

}  // namespace egonet
