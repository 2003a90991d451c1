#include "egonet/protocol.hpp"

#include <cmath>

#include "egonet/errors.hpp"
#include "egonet/json_util.hpp"
#include "egonet/study.hpp"

namespace egonet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

using json = nlohmann::json;

// Converts any decoding failure into a ProtocolError naming the message type.
template <class F>
auto guard(const std::string& type, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ProtocolError("malformed " + type + " payload: " + e.what());
  } catch (const InputError& e) {
    throw ProtocolError("malformed " + type + " payload: " + e.what());
  }
}

json moved_to_json(const std::map<NodeId, Vec3>& moved) {
  json arr = json::array();
  for (const auto& [node, pos] : moved) arr.push_back({{"node", node}, {"pos", vec_to_json(pos)}});
  return arr;
}

}  // namespace

json message_to_json(const Message& m) {
  return {{"type", m.type}, {"seq", m.seq}, {"session_seconds", m.session_seconds}, {"payload", m.payload}};
}

Message message_from_json(const json& j) {
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  return guard("envelope", [&] {
    Message m;
    m.type = j.at("type").get<std::string>();
    m.seq = j.value("seq", std::uint64_t{0});
    m.session_seconds = j.value("session_seconds", 0.0);
    if (!std::isfinite(m.session_seconds)) throw ProtocolError("session_seconds must be finite");
    m.payload = j.value("payload", json::object());
    if (!m.payload.is_object()) throw ProtocolError("payload must be an object");
    return m;
  });
}

std::string encode(const Message& m) { return message_to_json(m).dump(); }

Message decode(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("not JSON: ") + e.what());
  }
  return message_from_json(j);
}

const std::vector<std::string>& client_message_types() {
  static const std::vector<std::string> types{"hello",           "tick",          "input.fly",          "input.head",
                                              "input.pointer",   "action.select", "action.deselect",    "action.jump",
                                              "action.bookmark", "action.switch_view", "task.submit", "questionnaire.submit"};
  return types;
}

const std::vector<std::string>& server_message_types() {
  static const std::vector<std::string> types{"scene.init",    "view.state", "anim.update", "task.prompt",
                                              "task.complete", "hud.info",   "error"};
  return types;
}

Message client_message(const ClientMessage& m, std::uint64_t seq, double session_seconds) {
  return std::visit(overloaded{
                        [&](const Hello& h) { return Message{"hello", seq, session_seconds, {{"client", h.client}}}; },
                        [&](const Input& in) { return Message{input_type(in), seq, session_seconds, input_payload(in)}; },
                    },
                    m);
}

ClientMessage parse_client_message(const Message& m) {
  if (m.type == "hello") {
    return guard(m.type, [&] { return ClientMessage{Hello{m.payload.value("client", std::string{})}}; });
  }
  return guard(m.type, [&] { return ClientMessage{input_from_json(m.type, m.payload)}; });
}

Message server_message(const ServerMessage& m, std::uint64_t seq, double t) {
  return std::visit(
      overloaded{
          [&](const SceneInit& s) {
            json positions = json::array();
            for (const Vec3& p : s.positions) positions.push_back(vec_to_json(p));
            return Message{"scene.init",
                           seq,
                           t,
                           {{"graph", s.graph},
                            {"positions", std::move(positions)},
                            {"node_radius", s.node_radius},
                            {"condition", to_string(s.condition)},
                            {"pose", pose_to_json(s.pose)},
                            {"task_count", s.task_count}}};
          },
          [&](const ViewStateMsg& v) { return Message{"view.state", seq, t, view_to_json(v.view)}; },
          [&](const AnimUpdate& a) {
            return Message{"anim.update",
                           seq,
                           t,
                           {{"pose", pose_to_json(a.pose)}, {"progress", a.progress}, {"moved", moved_to_json(a.moved)}}};
          },
          [&](const TaskPrompt& p) { return Message{"task.prompt", seq, t, {{"index", p.index}, {"task", p.task}}}; },
          [&](const TaskComplete& c) {
            return Message{"task.complete", seq, t, {{"index", c.index}, {"result", result_to_json(c.result)}}};
          },
          [&](const HudInfo& h) {
            return Message{"hud.info",
                           seq,
                           t,
                           {{"task_index", h.task_index},
                            {"task_count", h.task_count},
                            {"clock_running", h.clock_running},
                            {"elapsed", h.elapsed},
                            {"fop_highlight", h.fop_highlight},
                            {"selection", h.selection},
                            {"finished", h.finished}}};
          },
          [&](const ErrorMsg& e) {
            return Message{"error",
                           seq,
                           t,
                           {{"message", e.message}, {"ref_seq", e.ref_seq ? json(*e.ref_seq) : json(nullptr)}}};
          },
      },
      m);
}

ServerMessage parse_server_message(const Message& m) {
  const json& p = m.payload;
  return guard(m.type, [&]() -> ServerMessage {
    if (m.type == "scene.init") {
      SceneInit s;
      s.graph = p.at("graph");
      for (const auto& v : p.at("positions")) s.positions.push_back(vec_from_json(v));
      s.node_radius = p.at("node_radius").get<double>();
      s.condition = parse_condition(p.at("condition").get<std::string>());
      s.pose = pose_from_json(p.at("pose"));
      s.task_count = p.at("task_count").get<std::size_t>();
      return s;
    }
    if (m.type == "view.state") return ViewStateMsg{view_from_json(p)};
    if (m.type == "anim.update") {
      AnimUpdate a;
      a.pose = pose_from_json(p.at("pose"));
      a.progress = p.at("progress").get<double>();
      for (const auto& d : p.at("moved")) a.moved.emplace(d.at("node").get<NodeId>(), vec_from_json(d.at("pos")));
      return a;
    }
    if (m.type == "task.prompt") return TaskPrompt{p.at("index").get<std::size_t>(), p.at("task")};
    if (m.type == "task.complete") return TaskComplete{p.at("index").get<std::size_t>(), result_from_json(p.at("result"))};
    if (m.type == "hud.info") {
      return HudInfo{p.at("task_index").get<std::size_t>(), p.at("task_count").get<std::size_t>(),
                     p.at("clock_running").get<bool>(),     p.at("elapsed").get<double>(),
                     p.at("fop_highlight").get<std::size_t>(), p.at("selection").get<std::vector<NodeId>>(),
                     p.at("finished").get<bool>()};
    }
    if (m.type == "error") {
      ErrorMsg e{p.at("message").get<std::string>(), std::nullopt};
      if (!p.at("ref_seq").is_null()) e.ref_seq = p.at("ref_seq").get<std::uint64_t>();
      return e;
    }
    throw ProtocolError("unknown server message type '" + m.type + "'");
  });
}

// ---- session ------------------------------------------------------------------

ProtocolSession::ProtocolSession(const Scene& scene, TaskSet tasks, ViewCondition condition, PassInfo info,
                                 bool stamp_wall_time)
    : scene_(&scene),
      engine_(scene, std::move(tasks), condition),
      recorder_(engine_, log_, std::move(info), stamp_wall_time),
      stamp_wall_time_(stamp_wall_time) {}

HudInfo ProtocolSession::hud(const PassEngine& e) const {
  const PassState& s = e.state();
  return {s.task_index,
          e.tasks().size(),
          s.clock_running,
          s.clock_running ? s.time - s.task_start : 0.0,
          s.fop_highlight,
          s.selection,
          e.finished()};
}

AnimUpdate ProtocolSession::anim(const PassEngine& e) const {
  AnimUpdate a{e.state().pose, e.move_progress(), {}};
  const auto drawn = e.drawn_positions();
  for (std::size_t v = 0; v < drawn.size(); ++v) {
    if (!(drawn[v] == scene_->positions[v])) a.moved.emplace(static_cast<NodeId>(v), drawn[v]);
  }
  return a;
}

std::vector<Message> ProtocolSession::start(double now) {
  if (started_) throw ProtocolError("session already started");
  started_ = true;
  const PassInfo& info = recorder_.info();
  LogRecord r{now, std::nullopt, "session.start",
              {{"mode", "interactive"}, {"condition", to_string(info.condition)}, {"graph_id", info.graph_id}}};
  if (stamp_wall_time_) r.wall_time = wall_clock_now();
  log_.append(std::move(r));
  const auto notices = recorder_.begin(now);
  last_time_ = now;

  std::vector<Message> msgs;
  msgs.push_back(out(SceneInit{graph_to_json(scene_->graph_file), scene_->positions, scene_->calibration.node_radius,
                               engine_.condition(), engine_.state().pose, engine_.tasks().size()},
                     now));
  msgs.push_back(out(ViewStateMsg{engine_.state().view}, now));
  for (Message& m : translate(notices, now)) msgs.push_back(std::move(m));
  msgs.push_back(out(hud(engine_), now));
  return msgs;
}

std::vector<Message> ProtocolSession::translate(const std::vector<Notice>& notices, double t) {
  std::vector<Message> msgs;
  for (const Notice& n : notices) {
    std::visit(overloaded{
                   [&](const TaskPrompted& p) { msgs.push_back(out(TaskPrompt{p.index, task_public_json(p.task)}, t)); },
                   [&](const TaskCompleted& c) { msgs.push_back(out(TaskComplete{c.index, c.result}, t)); },
                   [&](const ViewChanged& v) { msgs.push_back(out(ViewStateMsg{v.view}, t)); },
                   [&](const MoveStarted& m) { msgs.push_back(out(ViewStateMsg{m.to}, t)); },
                   [&](const MoveFinished& m) { msgs.push_back(out(ViewStateMsg{m.view}, t)); },
                   [](const PassFinished&) {},
               },
               n);
  }
  return msgs;
}

std::vector<Message> ProtocolSession::handle(const Message& msg, std::optional<double> now) {
  const double t = now ? *now : msg.session_seconds;
  try {
    if (!started_) throw ProtocolError("session has not started");
    if (closed_) throw ProtocolError("session is closed");
    const ClientMessage cm = parse_client_message(msg);
    if (std::holds_alternative<Hello>(cm)) {
      std::vector<Message> msgs;
      msgs.push_back(out(SceneInit{graph_to_json(scene_->graph_file), scene_->positions, scene_->calibration.node_radius,
                                   engine_.condition(), engine_.state().pose, engine_.tasks().size()},
                         t));
      msgs.push_back(out(ViewStateMsg{engine_.state().view}, t));
      if (const TaskSpec* task = engine_.active_task()) {
        msgs.push_back(out(TaskPrompt{engine_.state().task_index, task_public_json(*task)}, t));
      }
      msgs.push_back(out(hud(engine_), t));
      return msgs;
    }
    const Input& in = std::get<Input>(cm);
    if (std::holds_alternative<TickInput>(in)) return tick(t);
    if (!std::isfinite(t) || t < last_time_) throw ProtocolError("message time runs backwards");

    const auto notices = recorder_.feed({t, in});
    last_time_ = t;
    if (const auto* q = std::get_if<Questionnaire>(&in)) {
      record_questionnaire(log_, t, *q, {{"pass", recorder_.info().pass}, {"condition", to_string(engine_.condition())}});
    }
    std::vector<Message> msgs = translate(notices, t);
    msgs.push_back(out(anim(engine_), t));
    msgs.push_back(out(hud(engine_), t));
    return msgs;
  } catch (const ProtocolError& e) {
    return {out(ErrorMsg{e.what(), msg.seq}, t)};
  } catch (const InputError& e) {
    return {out(ErrorMsg{e.what(), msg.seq}, t)};
  }
}

std::vector<Message> ProtocolSession::tick(double now) {
  if (!started_ || closed_ || !std::isfinite(now) || now < last_time_) return {};
  PassEngine probe = engine_;
  const auto notices = probe.handle({now, TickInput{}});
  last_time_ = now;
  std::vector<Message> msgs;
  if (!notices.empty()) {
    // Something happened: make it part of the authoritative, replayable record.
    recorder_.feed({now, TickInput{}});
    msgs = translate(notices, now);
    msgs.push_back(out(anim(engine_), now));
    msgs.push_back(out(hud(engine_), now));
    return msgs;
  }
  const PassState& s = probe.state();
  if (s.move || s.axis_x != 0.0 || s.axis_y != 0.0) msgs.push_back(out(anim(probe), now));
  return msgs;
}

void ProtocolSession::close(double now) {
  if (closed_ || !started_) return;
  closed_ = true;
  const double t = std::max(now, log_.records().empty() ? now : log_.records().back().session_seconds);
  log_.append({t, stamp_wall_time_ ? std::optional(wall_clock_now()) : std::nullopt, "session.end", json::object()});
}

}  // namespace egonet
