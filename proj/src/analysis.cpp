#include "egonet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>

#include "egonet/errors.hpp"

namespace egonet {

namespace {

using Getter = std::function<std::optional<double>(const TaskResult&)>;

struct Measure {
  const char* name;
  Getter get;
  bool log_time;
  bool filter;
};

std::vector<Measure> measures_for(TaskKind kind) {
  const Measure time{"completion_time", [](const TaskResult& r) { return std::optional<double>(r.completion_time); }, true, true};
  const Measure angle{"angle_deviation_degrees", [](const TaskResult& r) { return r.angle_deviation_degrees; }, false, true};
  switch (kind) {
    case TaskKind::FiN:
    case TaskKind::FoP:
      return {time};
    case TaskKind::FCN:
      return {time,
              {"correctness_rate", [](const TaskResult& r) { return r.correctness_rate; }, false, true},
              {"miss_rate", [](const TaskResult& r) { return r.miss_rate; }, false, true},
              {"false_positive_rate", [](const TaskResult& r) { return r.false_positive_rate; }, false, true}};
    case TaskKind::END:
      return {{"judgement_error", [](const TaskResult& r) { return r.judgement_error; }, false, true},
              {"signed_judgement_error", [](const TaskResult& r) { return r.signed_judgement_error; }, false, true}};
    case TaskKind::FiP:
      return {time,
              {"path_correct",
               [](const TaskResult& r) {
                 return r.path_correct ? std::optional<double>(*r.path_correct ? 1.0 : 0.0) : std::nullopt;
               },
               false, false},
              {"path_deviation", [](const TaskResult& r) { return r.path_deviation; }, false, true}};
    case TaskKind::SO_OD:
    case TaskKind::SO_DD:
    case TaskKind::SO_DO:
      return {angle};
  }
  return {};
}

std::vector<bool> inlier_mask(const std::vector<double>& values, FilterResult& info) {
  std::vector<bool> keep(values.size(), true);
  if (values.size() < 4) return keep;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  info.q1 = quantile(sorted, 0.25);
  info.q3 = quantile(sorted, 0.75);
  const double iqr = info.q3 - info.q1;
  const double lo = info.q1 - 1.5 * iqr;
  const double hi = info.q3 + 1.5 * iqr;
  for (std::size_t i = 0; i < values.size(); ++i) keep[i] = values[i] >= lo && values[i] <= hi;
  info.filtered = true;
  return keep;
}

std::string format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw ParameterError("quantile of an empty sample");
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

FilterResult filter_outliers(const std::vector<double>& samples) {
  FilterResult out;
  const auto keep = inlier_mask(samples, out);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (keep[i]) out.kept.push_back(samples[i]);
  }
  return out;
}

std::string log_problem(const EventLog& log) {
  std::set<std::size_t> open_passes;
  std::set<std::pair<std::size_t, std::size_t>> open_tasks;
  try {
    for (const LogRecord& r : log.records()) {
      if (r.kind == "pass.start") {
        open_passes.insert(r.payload.at("pass").get<std::size_t>());
      } else if (r.kind == "pass.end") {
        if (!open_passes.erase(r.payload.at("pass").get<std::size_t>())) return "pass.end without pass.start";
      } else if (r.kind == "task.start") {
        open_tasks.insert({r.payload.at("pass").get<std::size_t>(), r.payload.at("index").get<std::size_t>()});
      } else if (r.kind == "task.end") {
        if (!open_tasks.erase({r.payload.at("pass").get<std::size_t>(), r.payload.at("index").get<std::size_t>()})) {
          return "task.end without task.start";
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return std::string("malformed record: ") + e.what();
  }
  if (!open_tasks.empty()) return std::to_string(open_tasks.size()) + " task(s) never ended";
  if (!open_passes.empty()) return std::to_string(open_passes.size()) + " pass(es) never ended";
  return "";
}

AnalysisReport analyze(const std::vector<EventLog>& logs) {
  AnalysisReport report;
  // (task order, condition, measure index) -> samples
  std::map<std::tuple<std::size_t, int, std::size_t>, std::vector<double>> samples;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const std::string problem = log_problem(logs[i]);
    if (!problem.empty()) {
      report.warnings.push_back("log " + std::to_string(i) + " skipped: " + problem);
      continue;
    }
    std::vector<PassResults> passes;
    try {
      passes = logged_results(logs[i]);
    } catch (const Error& e) {
      report.warnings.push_back("log " + std::to_string(i) + " skipped: " + e.what());
      continue;
    }
    ++report.logs_used;
    for (const PassResults& pass : passes) {
      if (pass.info.role != PassRole::Measured) continue;
      for (const TaskResult& r : pass.results) {
        const auto ms = measures_for(r.kind);
        for (std::size_t m = 0; m < ms.size(); ++m) {
          if (const auto v = ms[m].get(r)) {
            samples[{static_cast<std::size_t>(r.kind), static_cast<int>(pass.info.condition), m}].push_back(*v);
          }
        }
      }
    }
  }
  if (report.logs_used == 0) throw InputError("no complete logs to analyze");

  for (const auto& [key, values] : samples) {
    const auto [kind_index, condition, m] = key;
    const TaskKind kind = static_cast<TaskKind>(kind_index);
    const Measure measure = measures_for(kind)[m];
    ReportRow row;
    row.task = to_string(kind);
    row.condition = to_string(static_cast<ViewCondition>(condition));
    row.measure = measure.name;
    row.samples = values.size();

    std::vector<double> kept = values;
    if (measure.filter) {
      const bool positive = std::all_of(values.begin(), values.end(), [](double v) { return v > 0.0; });
      row.log_transformed = measure.log_time && positive;
      if (measure.log_time && !positive) {
        report.warnings.push_back(row.task + "/" + row.condition + ": non-positive completion times, log transform skipped");
      }
      std::vector<double> basis = values;
      if (row.log_transformed) {
        for (double& v : basis) v = std::log(v);
      }
      FilterResult info;
      const auto keep = inlier_mask(basis, info);
      row.filtered = info.filtered;
      kept.clear();
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (keep[i]) kept.push_back(values[i]);
      }
    }
    row.kept = kept.size();
    std::sort(kept.begin(), kept.end());
    double sum = 0.0;
    for (double v : kept) sum += v;
    row.mean = sum / static_cast<double>(kept.size());
    row.median = quantile(kept, 0.5);
    double ss = 0.0;
    for (double v : kept) ss += (v - row.mean) * (v - row.mean);
    row.sd = std::sqrt(ss / static_cast<double>(kept.size()));
    report.rows.push_back(std::move(row));
  }
  return report;
}

AnalysisReport analyze_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError("no logs found: " + dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const auto ext = entry.path().extension();
    if (entry.is_regular_file() && (ext == ".ndjson" || ext == ".jsonl")) files.push_back(entry.path());
  }
  if (files.empty()) throw InputError("no logs found in " + dir);
  std::sort(files.begin(), files.end());

  std::vector<EventLog> logs;
  std::vector<std::string> warnings;
  for (const auto& f : files) {
    try {
      logs.push_back(EventLog::read(f.string()));
    } catch (const Error& e) {
      warnings.push_back(f.filename().string() + " unreadable: " + e.what());
    }
  }
  if (logs.empty()) throw InputError("no readable logs found in " + dir);
  AnalysisReport report = analyze(logs);
  report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
  return report;
}

std::string report_csv(const AnalysisReport& report) {
  std::string out = "task,condition,measure,samples,kept,mean,median,sd,log_transformed,filtered\n";
  for (const ReportRow& r : report.rows) {
    out += r.task + "," + r.condition + "," + r.measure + "," + std::to_string(r.samples) + "," + std::to_string(r.kept) +
           "," + format(r.mean) + "," + format(r.median) + "," + format(r.sd) + "," + (r.log_transformed ? "1" : "0") +
           "," + (r.filtered ? "1" : "0") + "\n";
  }
  return out;
}

nlohmann::json report_json(const AnalysisReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ReportRow& r : report.rows) {
    rows.push_back({{"task", r.task},
                    {"condition", r.condition},
                    {"measure", r.measure},
                    {"samples", r.samples},
                    {"kept", r.kept},
                    {"mean", r.mean},
                    {"median", r.median},
                    {"sd", r.sd},
                    {"log_transformed", r.log_transformed},
                    {"filtered", r.filtered}});
  }
  return {{"rows", std::move(rows)},
          {"warnings", report.warnings},
          {"logs_used", report.logs_used},
          {"config", {{"outlier_rule", "1.5*IQR"}, {"quantiles", "linear interpolation (type 7)"}, {"sd", "population"}}}};
}

std::string questionnaires_csv(const std::vector<EventLog>& logs) {
  std::string out = "log,session_seconds,instrument,context,items\n";
  for (std::size_t i = 0; i < logs.size(); ++i) {
    for (const LogRecord& r : logs[i].records()) {
      if (r.kind != "questionnaire") continue;
      std::string items;
      for (const auto& v : r.payload.at("items")) {
        if (!items.empty()) items += ';';
        items += std::to_string(v.get<int>());
      }
      out += std::to_string(i) + "," + format(r.session_seconds) + "," + r.payload.at("instrument").get<std::string>() +
             "," + csv_quote(r.payload.value("context", nlohmann::json::object()).dump()) + "," + items + "\n";
    }
  }
  return out;
}

}  // namespace egonet
