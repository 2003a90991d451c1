#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "egonet/session.hpp"
#include "json.hpp"

namespace egonet {

struct LogRecord {
  double session_seconds = 0.0;
  // ISO-8601 UTC; null in simulated sessions so their logs stay reproducible.
  std::optional<std::string> wall_time;
  std::string kind;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const LogRecord&) const = default;
};

/// Append-only record list stored as line-delimited JSON.
class EventLog {
 public:
  // Throws ParameterError when session_seconds would decrease.
  void append(LogRecord record);
  const std::vector<LogRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

  std::string to_ndjson() const;
  // Throws InputError naming the offending line.
  static EventLog from_ndjson(const std::string& text);

  void write(const std::string& path) const;
  static EventLog read(const std::string& path);

  bool operator==(const EventLog&) const = default;

 private:
  std::vector<LogRecord> records_;
};

nlohmann::json record_to_json(const LogRecord& r);
LogRecord record_from_json(const nlohmann::json& j);

std::string wall_clock_now();

enum class PassRole { Training, Measured };
std::string to_string(PassRole r);
PassRole parse_pass_role(const std::string& name);

struct PassInfo {
  std::size_t pass = 0;
  ViewCondition condition = ViewCondition::Baseline;
  std::string graph_id;
  PassRole role = PassRole::Measured;
};

/// Runs a PassEngine and mirrors it into a log: one "input" record per input,
/// then "task.start" / "task.end" / "pass.end" records derived from the
/// engine's notices. "input" records alone are enough to replay the pass.
class PassRecorder {
 public:
  PassRecorder(PassEngine& engine, EventLog& log, PassInfo info, bool stamp_wall_time = false);

  std::vector<Notice> begin(double time);
  std::vector<Notice> feed(const TimedInput& in);

  PassEngine& engine() { return engine_; }
  const PassInfo& info() const { return info_; }

 private:
  void record(double time, std::string kind, nlohmann::json payload);
  void record_notices(double time, const std::vector<Notice>& notices);

  PassEngine& engine_;
  EventLog& log_;
  PassInfo info_;
  bool stamp_wall_time_;
};

// Resolves a logged graph id to its scene.
using SceneLookup = std::function<const Scene&(const std::string& graph_id)>;

struct PassResults {
  PassInfo info;
  std::vector<TaskResult> results;
  bool operator==(const PassResults& o) const { return results == o.results && info.pass == o.info.pass; }
};

/// Results as written in the log's "task.end" records, grouped by pass.
std::vector<PassResults> logged_results(const EventLog& log);

/// Re-runs every pass of the log through fresh engines from its "input"
/// records only. Throws InputError when a pass cannot be replayed.
std::vector<PassResults> replay(const EventLog& log, const SceneLookup& scenes);

}  // namespace egonet
