#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "egonet/egoview.hpp"
#include "egonet/navigation.hpp"
#include "egonet/scene.hpp"
#include "egonet/tasks.hpp"
#include "json.hpp"

namespace egonet {

// ---- inputs -------------------------------------------------------------

struct TickInput {
  bool operator==(const TickInput&) const = default;
};
struct FlyInput {
  double axis_x = 0.0;
  double axis_y = 0.0;
  bool operator==(const FlyInput&) const = default;
};
struct HeadInput {
  Quat orientation{};
  bool operator==(const HeadInput&) const = default;
};
struct PointerInput {
  Ray ray{};
  bool operator==(const PointerInput&) const = default;
};
struct SelectAction {
  NodeId node = 0;
  bool operator==(const SelectAction&) const = default;
};
struct DeselectAction {
  NodeId node = 0;
  bool operator==(const DeselectAction&) const = default;
};
struct JumpAction {
  NodeId node = 0;
  bool operator==(const JumpAction&) const = default;
};
struct BookmarkAction {
  NodeId node = 0;
  bool operator==(const BookmarkAction&) const = default;
};
struct SwitchViewAction {
  bool operator==(const SwitchViewAction&) const = default;
};
// Kind-specific response: estimate for END, path for FiP, ray for SO tasks
// (the current controller ray when absent). FCN submits its selection.
struct SubmitAction {
  TaskKind kind = TaskKind::FCN;
  std::optional<long long> estimate;
  std::vector<NodeId> path;
  std::optional<Ray> ray;
  bool operator==(const SubmitAction&) const = default;
};

enum class Instrument { SSQ, TLX };
std::string to_string(Instrument i);
Instrument parse_instrument(const std::string& name);

// SSQ: 16 items rated 0..3. TLX: 6 raw subscales 0..100.
struct Questionnaire {
  Instrument instrument = Instrument::SSQ;
  std::vector<int> items;
  bool operator==(const Questionnaire&) const = default;
};
// Throws InputError on a wrong item count or out-of-range value.
void validate_questionnaire(const Questionnaire& q);

using Input = std::variant<TickInput, FlyInput, HeadInput, PointerInput, SelectAction, DeselectAction, JumpAction,
                           BookmarkAction, SwitchViewAction, SubmitAction, Questionnaire>;

struct TimedInput {
  double time = 0.0;  // session seconds
  Input input;
  bool operator==(const TimedInput&) const = default;
};

// Wire names ("input.fly", "action.select", ...) shared by logs and the protocol.
std::string input_type(const Input& in);
nlohmann::json input_payload(const Input& in);
// Throws InputError on an unknown type or malformed payload.
Input input_from_json(const std::string& type, const nlohmann::json& payload);

// ---- notices --------------------------------------------------------------

struct TaskPrompted {
  double time = 0.0;
  std::size_t index = 0;
  TaskSpec task;
};
struct TaskCompleted {
  double time = 0.0;
  std::size_t index = 0;
  TaskResult result;
};
struct ViewChanged {
  EgoViewState view;
};
struct MoveStarted {
  MoveAnimation anim;
  EgoViewState from;
  EgoViewState to;
};
struct MoveFinished {
  EgoViewState view;
};
struct PassFinished {};

using Notice = std::variant<TaskPrompted, TaskCompleted, ViewChanged, MoveStarted, MoveFinished, PassFinished>;

// ---- engine -----------------------------------------------------------------

struct ActiveMove {
  MoveAnimation anim;
  EgoViewState from;
  EgoViewState to;
  bool operator==(const ActiveMove&) const = default;
};

struct PassState {
  double time = 0.0;
  Pose pose;
  double axis_x = 0.0;
  double axis_y = 0.0;
  // Pose and time where the current fly velocity took effect. Positions are
  // always extrapolated from here, so splitting an interval with extra ticks
  // never changes the result.
  Pose fly_anchor;
  double fly_anchor_time = 0.0;
  // None while standing at the overview position.
  std::optional<NodeId> user_node;
  EgoViewState view;
  std::optional<ActiveMove> move;

  std::size_t task_index = 0;
  double task_start = 0.0;
  bool clock_running = false;
  std::vector<NodeId> clicks;
  std::vector<NodeId> selection;
  std::size_t fop_highlight = 0;

  std::vector<NodeId> bookmarks;
  std::vector<TaskResult> results;
  std::vector<Questionnaire> questionnaires;

  bool operator==(const PassState&) const = default;
};

/// Authoritative state machine for one pass through the task set under one
/// condition. Every transition is a function of (state, input, input time);
/// time is continuous and flying is extrapolated from the last velocity change,
/// so a replay of the same inputs reproduces the same state bit for bit no
/// matter how many ticks were interleaved.
///
/// Ego conditions navigate by jumps only, the baseline by flying only.
/// Inputs that break the task protocol throw ProtocolError and leave the
/// state untouched.
class PassEngine {
 public:
  PassEngine(const Scene& scene, TaskSet tasks, ViewCondition condition);

  // Prompts the first task. Must be called once before handle().
  std::vector<Notice> begin(double time);
  std::vector<Notice> handle(const TimedInput& in);

  const PassState& state() const { return state_; }
  const TaskSet& tasks() const { return tasks_; }
  ViewCondition condition() const { return condition_; }
  const Scene& scene() const { return *scene_; }
  bool finished() const { return state_.task_index >= tasks_.size(); }
  const TaskSpec* active_task() const { return finished() ? nullptr : &tasks_[state_.task_index]; }

  // Node positions as drawn right now, mid-morph during a jump.
  std::vector<Vec3> drawn_positions() const;
  // Normalized, un-eased progress of the active jump (1 when idle).
  double move_progress() const;

 private:
  void advance(double t, std::vector<Notice>& out);
  void integrate_fly(double t);
  void anchor_fly();
  void finish_move(std::vector<Notice>& out);
  void dispatch(const Input& in, std::vector<Notice>& out);
  void select(NodeId node, std::vector<Notice>& out);
  void submit(const SubmitAction& s, std::vector<Notice>& out);
  void start_move(NodeId node, std::vector<Notice>& out);
  void place_at(std::optional<NodeId> node, std::vector<Notice>& out);
  void prompt(std::vector<Notice>& out);
  void complete(TaskResult result, std::vector<Notice>& out);
  std::optional<double> fop_arrival_time(double horizon) const;
  bool fop_waiting_for_arrival() const;
  EgoViewState view_at(std::optional<NodeId> node) const;
  Vec3 drawn_position(NodeId v) const;
  bool ego() const { return condition_ != ViewCondition::Baseline; }

  const Scene* scene_;
  TaskSet tasks_;
  ViewCondition condition_;
  PassState state_;
  bool begun_ = false;
};

/// Earliest tau >= 0 at which p + v*tau lies within radius of c, if any.
std::optional<double> sphere_entry_time(const Vec3& p, const Vec3& v, const Vec3& c, double radius);

/// Velocity produced by a fly input at the given pose (after the unit-disc clamp).
Vec3 fly_velocity(const Pose& pose, double axis_x, double axis_y, double max_speed);

}  // namespace egonet
