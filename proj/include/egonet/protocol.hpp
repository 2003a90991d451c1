#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "egonet/eventlog.hpp"
#include "egonet/session.hpp"
#include "json.hpp"

namespace egonet {

// Every message on the wire, one JSON object per line.
struct Message {
  std::string type;
  std::uint64_t seq = 0;
  double session_seconds = 0.0;
  nlohmann::json payload = nlohmann::json::object();
  bool operator==(const Message&) const = default;
};

nlohmann::json message_to_json(const Message& m);
// Throws ProtocolError on anything that is not a well-formed envelope.
Message message_from_json(const nlohmann::json& j);
std::string encode(const Message& m);
Message decode(const std::string& line);

const std::vector<std::string>& client_message_types();
const std::vector<std::string>& server_message_types();

// ---- client side --------------------------------------------------------------

struct Hello {
  std::string client;
  bool operator==(const Hello&) const = default;
};

using ClientMessage = std::variant<Hello, Input>;

Message client_message(const ClientMessage& m, std::uint64_t seq, double session_seconds);
// Throws ProtocolError on unknown types or malformed payloads.
ClientMessage parse_client_message(const Message& m);

// ---- server side --------------------------------------------------------------

struct SceneInit {
  nlohmann::json graph;
  std::vector<Vec3> positions;
  double node_radius = 1.0;
  ViewCondition condition = ViewCondition::Baseline;
  Pose pose;
  std::size_t task_count = 0;
  bool operator==(const SceneInit&) const = default;
};

struct ViewStateMsg {
  EgoViewState view;
  bool operator==(const ViewStateMsg&) const = default;
};

// Pose plus the nodes whose drawn position differs from the layout.
struct AnimUpdate {
  Pose pose;
  double progress = 1.0;
  std::map<NodeId, Vec3> moved;
  bool operator==(const AnimUpdate&) const = default;
};

// Only the fields a participant may see.
struct TaskPrompt {
  std::size_t index = 0;
  nlohmann::json task;
  bool operator==(const TaskPrompt&) const = default;
};

struct TaskComplete {
  std::size_t index = 0;
  TaskResult result;
  bool operator==(const TaskComplete&) const = default;
};

struct HudInfo {
  std::size_t task_index = 0;
  std::size_t task_count = 0;
  bool clock_running = false;
  double elapsed = 0.0;
  std::size_t fop_highlight = 0;
  std::vector<NodeId> selection;
  bool finished = false;
  bool operator==(const HudInfo&) const = default;
};

struct ErrorMsg {
  std::string message;
  std::optional<std::uint64_t> ref_seq;
  bool operator==(const ErrorMsg&) const = default;
};

using ServerMessage = std::variant<SceneInit, ViewStateMsg, AnimUpdate, TaskPrompt, TaskComplete, HudInfo, ErrorMsg>;

Message server_message(const ServerMessage& m, std::uint64_t seq, double session_seconds);
ServerMessage parse_server_message(const Message& m);

// ---- session ------------------------------------------------------------------

/// One pass served over the protocol. Valid inputs go through a PassRecorder,
/// so the log replays to the same results. Ticks are probed on a copy of the
/// engine and only logged when they change something observable (a finished
/// jump or a completed task); otherwise the authoritative state is untouched.
class ProtocolSession {
 public:
  ProtocolSession(const Scene& scene, TaskSet tasks, ViewCondition condition, PassInfo info, bool stamp_wall_time = false);

  std::vector<Message> start(double now);
  // Input time is `now` when given (server clock), else the message's own.
  std::vector<Message> handle(const Message& msg, std::optional<double> now = std::nullopt);
  std::vector<Message> tick(double now);
  // Appends session.end; further messages are rejected.
  void close(double now);

  const PassEngine& engine() const { return engine_; }
  const EventLog& log() const { return log_; }
  bool finished() const { return engine_.finished(); }

 private:
  std::vector<Message> translate(const std::vector<Notice>& notices, double t);
  Message out(const ServerMessage& m, double t) { return server_message(m, next_seq_++, t); }
  HudInfo hud(const PassEngine& e) const;
  AnimUpdate anim(const PassEngine& e) const;

  const Scene* scene_;
  PassEngine engine_;
  EventLog log_;
  PassRecorder recorder_;
  bool stamp_wall_time_;
  bool started_ = false;
  bool closed_ = false;
  double last_time_ = 0.0;
  std::uint64_t next_seq_ = 1;
};

}  // namespace egonet
