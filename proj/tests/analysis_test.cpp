#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "egonet/analysis.hpp"
#include "egonet/errors.hpp"

using namespace egonet;

namespace {

struct SyntheticPass {
  ViewCondition condition;
  PassRole role;
  std::vector<TaskResult> results;
};

// A log shaped like a recorder's output, minus the input records.
EventLog synthetic(const std::vector<SyntheticPass>& passes, bool truncate_last = false) {
  EventLog log;
  double t = 0.0;
  log.append({t, std::nullopt, "session.start", {{"mode", "synthetic"}}});
  for (std::size_t p = 0; p < passes.size(); ++p) {
    const auto& sp = passes[p];
    log.append({t, std::nullopt, "pass.start",
                {{"pass", p}, {"condition", to_string(sp.condition)}, {"graph_id", "g"}, {"role", to_string(sp.role)}}});
    for (std::size_t i = 0; i < sp.results.size(); ++i) {
      log.append({t, std::nullopt, "task.start", {{"pass", p}, {"index", i}, {"kind", to_string(sp.results[i].kind)}}});
      if (truncate_last && p + 1 == passes.size() && i + 1 == sp.results.size()) return log;
      t += sp.results[i].completion_time;
      log.append({t, std::nullopt, "task.end",
                  {{"pass", p}, {"index", i}, {"result", result_to_json(sp.results[i])}}});
    }
    log.append({t, std::nullopt, "pass.end", {{"pass", p}}});
  }
  log.append({t, std::nullopt, "session.end", nlohmann::json::object()});
  return log;
}

TaskResult timed(TaskKind k, double seconds) {
  TaskResult r;
  r.kind = k;
  r.completion_time = seconds;
  return r;
}

TaskResult end_result(double error) {
  TaskResult r = timed(TaskKind::END, 5.0);
  r.judgement_error = error;
  r.signed_judgement_error = -error;
  return r;
}

const ReportRow& row(const AnalysisReport& rep, const std::string& task, const std::string& cond, const std::string& m) {
  for (const ReportRow& r : rep.rows) {
    if (r.task == task && r.condition == cond && r.measure == m) return r;
  }
  throw std::runtime_error("missing row " + task + "/" + cond + "/" + m);
}

// Five participants. Baseline FiN times carry one extreme value; highlight
// FoP times are skewed but not outliers on the log scale; END errors are
// filtered on the raw scale. Training passes carry junk that must be ignored.
std::vector<EventLog> study_logs() {
  const std::vector<double> fin{10, 12, 11, 13, 100};
  const std::vector<double> fop{1, 2, 3, 4, 10};
  const std::vector<double> end{0.1, 0.2, 0.3, 0.4, 5.0};
  std::vector<EventLog> logs;
  for (std::size_t i = 0; i < 5; ++i) {
    logs.push_back(synthetic({
        {ViewCondition::Baseline, PassRole::Training, {timed(TaskKind::FiN, 999.0)}},
        {ViewCondition::Baseline, PassRole::Measured, {timed(TaskKind::FiN, fin[i]), end_result(end[i])}},
        {ViewCondition::EgoHighlight, PassRole::Measured, {timed(TaskKind::FoP, fop[i])}},
    }));
  }
  return logs;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
  const std::vector<double> x{1, 2, 3, 4, 100};
  CHECK(quantile(x, 0.25) == 2.0);
  CHECK(quantile(x, 0.5) == 3.0);
  CHECK(quantile(x, 0.75) == 4.0);
  CHECK(quantile({1, 2, 3, 4}, 0.25) == 1.75);
  CHECK(quantile({7}, 0.9) == 7.0);
  CHECK_THROWS_AS(quantile({}, 0.5), ParameterError);
}

TEST_CASE("IQR filter examples") {
  // Q1 = 2, Q3 = 4, fences at -1 and 7.
  const auto f = filter_outliers({1, 2, 3, 4, 100});
  CHECK(f.filtered);
  CHECK(f.kept == std::vector<double>{1, 2, 3, 4});

  CHECK(filter_outliers({5, 5, 5, 5, 5}).kept.size() == 5);

  const auto few = filter_outliers({1, 1000, 2});
  CHECK_FALSE(few.filtered);
  CHECK(few.kept.size() == 3);

  // Mirrored data loses the same number of points on each side.
  const std::vector<double> sym{-50, -3, -2, -1, 0, 1, 2, 3, 50};
  const auto s = filter_outliers(sym);
  CHECK(s.kept == std::vector<double>{-3, -2, -1, 0, 1, 2, 3});
}

TEST_CASE("synthetic logs reproduce hand-computed aggregates") {
  const AnalysisReport rep = analyze(study_logs());
  CHECK(rep.logs_used == 5);

  // ln times: 2.3026 2.3979 2.4849 2.5649 4.6052 -> Q1 2.3979, Q3 2.5649,
  // upper fence 2.8155, so 100 s is dropped.
  const ReportRow& fin = row(rep, "FiN", "baseline", "completion_time");
  CHECK(fin.samples == 5);
  CHECK(fin.kept == 4);
  CHECK(fin.log_transformed);
  CHECK(std::abs(fin.mean - 11.5) < 1e-9);
  CHECK(std::abs(fin.median - 11.5) < 1e-9);
  CHECK(std::abs(fin.sd - std::sqrt(1.25)) < 1e-9);

  // On raw values 10 would be an outlier (fence 7); on the log scale
  // (fence ln 2 + 1.5 ln 2 = 2.426 > ln 10 = 2.303) it stays.
  const ReportRow& fop = row(rep, "FoP", "highlight", "completion_time");
  CHECK(fop.kept == 5);
  CHECK(std::abs(fop.mean - 4.0) < 1e-9);
  CHECK(std::abs(fop.median - 3.0) < 1e-9);
  CHECK(std::abs(fop.sd - std::sqrt(10.0)) < 1e-9);

  // Errors are filtered untransformed: Q1 0.2, Q3 0.4, fence 0.7.
  const ReportRow& err = row(rep, "END", "baseline", "judgement_error");
  CHECK_FALSE(err.log_transformed);
  CHECK(err.kept == 4);
  CHECK(std::abs(err.mean - 0.25) < 1e-9);
  CHECK(std::abs(err.median - 0.25) < 1e-9);
  const ReportRow& signed_err = row(rep, "END", "baseline", "signed_judgement_error");
  CHECK(std::abs(signed_err.mean + 0.25) < 1e-9);

  // Training passes never enter the report.
  for (const ReportRow& r : rep.rows) CHECK(r.mean < 999.0);
}

TEST_CASE("a single sample is its own mean and median") {
  const AnalysisReport rep =
      analyze({synthetic({{ViewCondition::EgoBubble, PassRole::Measured, {timed(TaskKind::FiN, 7.25)}}})});
  const ReportRow& r = row(rep, "FiN", "bubble", "completion_time");
  CHECK(r.mean == 7.25);
  CHECK(r.median == 7.25);
  CHECK(r.sd == 0.0);
  CHECK_FALSE(r.filtered);
}

TEST_CASE("duplicating the log set leaves the aggregates unchanged") {
  const auto once = analyze(study_logs());
  auto twice_logs = study_logs();
  for (const EventLog& l : study_logs()) twice_logs.push_back(l);
  const auto twice = analyze(twice_logs);
  REQUIRE(once.rows.size() == twice.rows.size());
  for (std::size_t i = 0; i < once.rows.size(); ++i) {
    CHECK(std::abs(once.rows[i].mean - twice.rows[i].mean) < 1e-9);
    CHECK(std::abs(once.rows[i].median - twice.rows[i].median) < 1e-9);
    CHECK(std::abs(once.rows[i].sd - twice.rows[i].sd) < 1e-9);
    CHECK(twice.rows[i].kept == 2 * once.rows[i].kept);
  }
}

TEST_CASE("incomplete logs are skipped with a warning") {
  auto logs = study_logs();
  logs.push_back(synthetic({{ViewCondition::Baseline, PassRole::Measured, {timed(TaskKind::FiN, 1000.0)}}}, true));
  CHECK_FALSE(log_problem(logs.back()).empty());
  const AnalysisReport rep = analyze(logs);
  CHECK(rep.logs_used == 5);
  CHECK(rep.warnings.size() == 1);
  CHECK(row(rep, "FiN", "baseline", "completion_time").samples == 5);

  CHECK_THROWS_AS(analyze({logs.back()}), InputError);
}

TEST_CASE("non-positive times disable the log transform") {
  std::vector<EventLog> logs;
  for (double t : {0.0, 1.0, 2.0, 3.0}) {
    logs.push_back(synthetic({{ViewCondition::Baseline, PassRole::Measured, {timed(TaskKind::FiN, t)}}}));
  }
  const AnalysisReport rep = analyze(logs);
  CHECK_FALSE(row(rep, "FiN", "baseline", "completion_time").log_transformed);
  CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("CSV export") {
  const std::string csv = report_csv(analyze(study_logs()));
  CHECK(csv.rfind("task,condition,measure,samples,kept,mean,median,sd,log_transformed,filtered\n", 0) == 0);
  CHECK(csv.find("FiN,baseline,completion_time,5,4,11.5,11.5,") != std::string::npos);
  const auto j = report_json(analyze(study_logs()));
  CHECK(j.at("rows").size() == analyze(study_logs()).rows.size());
}

TEST_CASE("analyze_directory needs at least one log file") {
  const auto dir = std::filesystem::temp_directory_path() / "egonet_analysis_empty";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  try {
    analyze_directory(dir.string());
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("no logs found") != std::string::npos);
  }
  CHECK_THROWS_AS(analyze_directory((dir / "missing").string()), InputError);

  const auto logs = study_logs();
  for (std::size_t i = 0; i < logs.size(); ++i) logs[i].write((dir / ("p" + std::to_string(i) + ".ndjson")).string());
  CHECK(analyze_directory(dir.string()).logs_used == 5);
  std::filesystem::remove_all(dir);
}
