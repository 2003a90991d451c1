#include "egonet/study.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "egonet/errors.hpp"
#include "egonet/json_util.hpp"
#include "egonet/rng.hpp"

namespace egonet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::array<ViewCondition, 3> kConditions{ViewCondition::Baseline, ViewCondition::EgoHighlight,
                                                   ViewCondition::EgoBubble};

nlohmann::json cell_json(const PlanCell& c) { return {{"condition", to_string(c.condition)}, {"graph", c.graph}}; }

PlanCell cell_from(const nlohmann::json& j) {
  return {parse_condition(j.at("condition").get<std::string>()), j.at("graph").get<int>()};
}

}  // namespace

// ---- event log --------------------------------------------------------------------

void EventLog::append(LogRecord record) {
  if (!std::isfinite(record.session_seconds)) throw ParameterError("log record time must be finite");
  if (!records_.empty() && record.session_seconds < records_.back().session_seconds) {
    throw ParameterError("log record at " + std::to_string(record.session_seconds) + " s precedes the previous record");
  }
  records_.push_back(std::move(record));
}

nlohmann::json record_to_json(const LogRecord& r) {
  return {{"session_seconds", r.session_seconds},
          {"wall_time", r.wall_time ? nlohmann::json(*r.wall_time) : nlohmann::json(nullptr)},
          {"kind", r.kind},
          {"payload", r.payload}};
}

LogRecord record_from_json(const nlohmann::json& j) {
  return decode("log record", [&] {
    LogRecord r;
    r.session_seconds = j.at("session_seconds").get<double>();
    if (j.contains("wall_time") && !j.at("wall_time").is_null()) r.wall_time = j.at("wall_time").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.payload = j.value("payload", nlohmann::json::object());
    return r;
  });
}

std::string EventLog::to_ndjson() const {
  std::string out;
  for (const LogRecord& r : records_) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

EventLog EventLog::from_ndjson(const std::string& text) {
  EventLog log;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      log.append(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("log line " + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw InputError("log line " + std::to_string(number) + ": " + e.what());
    }
  }
  return log;
}

void EventLog::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write log file " + path);
  out << to_ndjson();
  if (!out) throw Error("failed writing log file " + path);
}

EventLog EventLog::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read log file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_ndjson(buf.str());
}

std::string wall_clock_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

std::string to_string(PassRole r) { return r == PassRole::Training ? "training" : "measured"; }

PassRole parse_pass_role(const std::string& name) {
  if (name == "training") return PassRole::Training;
  if (name == "measured") return PassRole::Measured;
  throw InputError("unknown pass role '" + name + "'");
}

// ---- recorder ------------------------------------------------------------------

PassRecorder::PassRecorder(PassEngine& engine, EventLog& log, PassInfo info, bool stamp_wall_time)
    : engine_(engine), log_(log), info_(std::move(info)), stamp_wall_time_(stamp_wall_time) {}

void PassRecorder::record(double time, std::string kind, nlohmann::json payload) {
  LogRecord r{time, std::nullopt, std::move(kind), std::move(payload)};
  if (stamp_wall_time_) r.wall_time = wall_clock_now();
  log_.append(std::move(r));
}

std::vector<Notice> PassRecorder::begin(double time) {
  record(time, "pass.start",
         {{"pass", info_.pass},
          {"condition", to_string(info_.condition)},
          {"graph_id", info_.graph_id},
          {"role", to_string(info_.role)},
          {"tasks", tasks_to_json(engine_.tasks())}});
  auto notices = engine_.begin(time);
  record_notices(time, notices);
  return notices;
}

std::vector<Notice> PassRecorder::feed(const TimedInput& in) {
  auto notices = engine_.handle(in);
  record(in.time, "input", {{"type", input_type(in.input)}, {"payload", input_payload(in.input)}});
  record_notices(in.time, notices);
  return notices;
}

void PassRecorder::record_notices(double time, const std::vector<Notice>& notices) {
  for (const Notice& n : notices) {
    std::visit(overloaded{
                   [&](const TaskPrompted& p) {
                     record(time, "task.start",
                            {{"pass", info_.pass}, {"index", p.index}, {"kind", to_string(p.task.kind)}, {"at", p.time}});
                   },
                   [&](const TaskCompleted& c) {
                     record(time, "task.end",
                            {{"pass", info_.pass},
                             {"index", c.index},
                             {"at", c.time},
                             {"condition", to_string(info_.condition)},
                             {"graph_id", info_.graph_id},
                             {"role", to_string(info_.role)},
                             {"result", result_to_json(c.result)}});
                   },
                   [&](const PassFinished&) { record(time, "pass.end", {{"pass", info_.pass}}); },
                   [](const auto&) {},
               },
               n);
  }
}

std::vector<PassResults> logged_results(const EventLog& log) {
  std::vector<PassResults> out;
  for (const LogRecord& r : log.records()) {
    decode("log record", [&] {
      if (r.kind == "pass.start") {
        PassResults p;
        p.info = {r.payload.at("pass").get<std::size_t>(), parse_condition(r.payload.at("condition").get<std::string>()),
                  r.payload.at("graph_id").get<std::string>(), parse_pass_role(r.payload.at("role").get<std::string>())};
        out.push_back(std::move(p));
      } else if (r.kind == "task.end") {
        if (out.empty()) throw InputError("task.end outside a pass");
        out.back().results.push_back(result_from_json(r.payload.at("result")));
      }
      return 0;
    });
  }
  return out;
}

std::vector<PassResults> replay(const EventLog& log, const SceneLookup& scenes) {
  std::vector<PassResults> out;
  std::optional<PassEngine> engine;
  for (const LogRecord& r : log.records()) {
    try {
      if (r.kind == "pass.start") {
        PassResults p;
        p.info = {r.payload.at("pass").get<std::size_t>(), parse_condition(r.payload.at("condition").get<std::string>()),
                  r.payload.at("graph_id").get<std::string>(), parse_pass_role(r.payload.at("role").get<std::string>())};
        engine.emplace(scenes(p.info.graph_id), tasks_from_json(r.payload.at("tasks")), p.info.condition);
        engine->begin(r.session_seconds);
        out.push_back(std::move(p));
      } else if (r.kind == "input") {
        if (!engine) throw InputError("input record outside a pass");
        engine->handle({r.session_seconds, input_from_json(r.payload.at("type").get<std::string>(), r.payload.at("payload"))});
        out.back().results = engine->state().results;
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("log cannot be replayed: ") + e.what());
    } catch (const ProtocolError& e) {
      throw InputError(std::string("log cannot be replayed: ") + e.what());
    }
  }
  return out;
}

// ---- plan --------------------------------------------------------------------------

StudyPlan build_plan(std::size_t participants, std::uint64_t seed) {
  if (participants == 0) throw ParameterError("a study plan needs at least one participant");
  Rng rng(seed);
  std::vector<std::size_t> condition_perm{0, 1, 2};
  std::vector<int> graph_perm{0, 1, 2};
  std::vector<std::size_t> row_perm{0, 1, 2};
  rng.shuffle(condition_perm);
  rng.shuffle(graph_perm);
  rng.shuffle(row_perm);

  StudyPlan plan;
  plan.participants = participants;
  plan.seed = seed;
  for (std::size_t i = 0; i < kSquareSize; ++i) {
    const std::size_t r = row_perm[i];
    for (std::size_t c = 0; c < kSquareSize; ++c) {
      plan.square[i][c] = {kConditions[condition_perm[(r + c) % 3]], graph_perm[(2 * r + c) % 3]};
    }
  }
  for (std::size_t p = 0; p < participants; ++p) {
    const std::size_t row = p % kSquareSize;
    plan.rows.push_back({p, row, std::vector<PlanCell>(plan.square[row].begin(), plan.square[row].end())});
  }
  return plan;
}

std::string training_graph_id(int graph) { return "small-" + std::to_string(graph); }
std::string measured_graph_id(int graph) { return "large-" + std::to_string(graph); }

nlohmann::json plan_to_json(const StudyPlan& plan) {
  nlohmann::json square = nlohmann::json::array();
  for (const SquareRow& row : plan.square) {
    nlohmann::json cells = nlohmann::json::array();
    for (const PlanCell& c : row) cells.push_back(cell_json(c));
    square.push_back(std::move(cells));
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const PlanRow& row : plan.rows) {
    nlohmann::json cells = nlohmann::json::array();
    for (const PlanCell& c : row.cells) {
      nlohmann::json cell = cell_json(c);
      cell["training_graph"] = training_graph_id(c.graph);
      cell["measured_graph"] = measured_graph_id(c.graph);
      cells.push_back(std::move(cell));
    }
    rows.push_back({{"participant", row.participant}, {"square_row", row.square_row}, {"cells", std::move(cells)}});
  }
  return {{"participants", plan.participants}, {"seed", plan.seed}, {"square", std::move(square)}, {"rows", std::move(rows)}};
}

StudyPlan plan_from_json(const nlohmann::json& j) {
  return decode("study plan", [&] {
    StudyPlan plan;
    plan.participants = j.at("participants").get<std::size_t>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    const auto& square = j.at("square");
    if (square.size() != kSquareSize) throw InputError("plan square must have 3 rows");
    for (std::size_t r = 0; r < kSquareSize; ++r) {
      if (square[r].size() != kSquareSize) throw InputError("plan square rows must have 3 cells");
      for (std::size_t c = 0; c < kSquareSize; ++c) plan.square[r][c] = cell_from(square[r][c]);
    }
    for (const auto& row : j.at("rows")) {
      PlanRow pr{row.at("participant").get<std::size_t>(), row.at("square_row").get<std::size_t>(), {}};
      for (const auto& c : row.at("cells")) pr.cells.push_back(cell_from(c));
      plan.rows.push_back(std::move(pr));
    }
    return plan;
  });
}

// ---- material and sessions ------------------------------------------------------------

const Scene& StudyMaterial::scene(const std::string& graph_id) const {
  const auto it = scenes.find(graph_id);
  if (it == scenes.end()) throw InputError("no scene for graph '" + graph_id + "'");
  return it->second;
}

SceneLookup StudyMaterial::lookup() const {
  return [this](const std::string& id) -> const Scene& { return scene(id); };
}

StudyMaterial prepare_material(std::uint64_t seed, const LayoutParams& layout) {
  constexpr int kMaxAttempts = 1000;
  StudyMaterial m;
  Rng seeds(seed);
  for (int g = 0; g < static_cast<int>(kSquareSize); ++g) {
    for (const auto& [id, n] : {std::pair{training_graph_id(g), kSmallNodes}, std::pair{measured_graph_id(g), kLargeNodes}}) {
      bool done = false;
      for (int attempt = 0; attempt < kMaxAttempts && !done; ++attempt) {
        const std::uint64_t graph_seed = seeds.next();
        const std::uint64_t task_seed = seeds.next();
        const Graph graph = generate_ba({n, kEdgesPerNode, graph_seed});
        try {
          // Tasks only depend on topology, so screen the graph before paying for a layout.
          generate_tasks(graph, std::vector<Vec3>(n), task_seed);
        } catch (const GenerationError&) {
          continue;
        }
        LayoutParams params = layout;
        params.seed = graph_seed;
        Scene scene = build_scene({graph, {n, kEdgesPerNode, graph_seed}}, params);
        m.tasks.emplace(id, generate_tasks(scene.graph(), scene.positions, task_seed));
        m.scenes.emplace(id, std::move(scene));
        done = true;
      }
      if (!done) throw GenerationError("no graph seed admits a full task set for " + id);
    }
  }
  return m;
}

EventLog run_session(const PlanRow& row, const StudyMaterial& material, SessionMode mode) {
  if (mode == SessionMode::Interactive) {
    throw ParameterError("interactive sessions need a participant at a client; run them through `egonet serve`");
  }
  EventLog log;
  nlohmann::json cells = nlohmann::json::array();
  for (const PlanCell& c : row.cells) cells.push_back(cell_json(c));
  log.append({0.0, std::nullopt, "session.start",
              {{"participant", row.participant}, {"square_row", row.square_row}, {"cells", cells}, {"mode", "simulated"}}});
  if (row.cells.empty()) return log;

  log.append({0.0, std::nullopt, "tutorial", {{"status", "stub"}}});
  double t = 0.0;
  std::size_t pass = 0;
  for (const PlanCell& cell : row.cells) {
    for (const PassRole role : {PassRole::Training, PassRole::Measured}) {
      const std::string id = role == PassRole::Training ? training_graph_id(cell.graph) : measured_graph_id(cell.graph);
      PassEngine engine(material.scene(id), material.tasks.at(id), cell.condition);
      PassRecorder recorder(engine, log, {pass++, cell.condition, id, role});
      t = drive_agent(recorder, agent_for(cell.condition), t);
    }
  }
  log.append({t, std::nullopt, "session.end", nlohmann::json::object()});
  return log;
}

EventLog simulate_pass(const Scene& scene, const TaskSet& tasks, ViewCondition condition, AgentKind agent,
                       const std::string& graph_id) {
  check_agent_condition(agent, condition);
  EventLog log;
  log.append({0.0, std::nullopt, "session.start", {{"mode", "simulated"}, {"agent", to_string(agent)}}});
  PassEngine engine(scene, tasks, condition);
  PassRecorder recorder(engine, log, {0, condition, graph_id, PassRole::Measured});
  const double end = drive_agent(recorder, agent, 0.0);
  log.append({end, std::nullopt, "session.end", nlohmann::json::object()});
  return log;
}

void record_questionnaire(EventLog& log, double session_seconds, const Questionnaire& q, const nlohmann::json& context) {
  validate_questionnaire(q);
  log.append({session_seconds, std::nullopt, "questionnaire",
              {{"instrument", to_string(q.instrument)}, {"items", q.items}, {"context", context}}});
}

}  // namespace egonet
