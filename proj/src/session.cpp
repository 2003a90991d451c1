#include "egonet/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "egonet/errors.hpp"
#include "egonet/json_util.hpp"

namespace egonet {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

NodeId node_field(const nlohmann::json& payload) { return payload.at("node").get<NodeId>(); }

Quat normalized_quat(const Quat& q) {
  const double n = q.norm();
  if (!std::isfinite(n) || n == 0.0) throw ProtocolError("head orientation must be a non-zero finite quaternion");
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Ray normalized_ray(const Ray& r) {
  if (!is_finite(r.origin) || !is_finite(r.direction) || norm2(r.direction) == 0.0) {
    throw ProtocolError("pointer ray needs a finite origin and a non-zero direction");
  }
  return {r.origin, normalized(r.direction)};
}

}  // namespace

// ---- questionnaires --------------------------------------------------------

std::string to_string(Instrument i) { return i == Instrument::SSQ ? "SSQ" : "TLX"; }

Instrument parse_instrument(const std::string& name) {
  if (name == "SSQ") return Instrument::SSQ;
  if (name == "TLX") return Instrument::TLX;
  throw InputError("unknown questionnaire instrument '" + name + "' (expected SSQ|TLX)");
}

void validate_questionnaire(const Questionnaire& q) {
  const std::size_t count = q.instrument == Instrument::SSQ ? 16 : 6;
  const int hi = q.instrument == Instrument::SSQ ? 3 : 100;
  if (q.items.size() != count) {
    throw InputError(to_string(q.instrument) + " needs " + std::to_string(count) + " items, got " +
                     std::to_string(q.items.size()));
  }
  for (std::size_t i = 0; i < q.items.size(); ++i) {
    if (q.items[i] < 0 || q.items[i] > hi) {
      throw InputError(to_string(q.instrument) + " item " + std::to_string(i + 1) + " = " + std::to_string(q.items[i]) +
                       " outside 0.." + std::to_string(hi));
    }
  }
}

// ---- wire encoding -----------------------------------------------------------

std::string input_type(const Input& in) {
  return std::visit(overloaded{
                        [](const TickInput&) -> std::string { return "tick"; },
                        [](const FlyInput&) -> std::string { return "input.fly"; },
                        [](const HeadInput&) -> std::string { return "input.head"; },
                        [](const PointerInput&) -> std::string { return "input.pointer"; },
                        [](const SelectAction&) -> std::string { return "action.select"; },
                        [](const DeselectAction&) -> std::string { return "action.deselect"; },
                        [](const JumpAction&) -> std::string { return "action.jump"; },
                        [](const BookmarkAction&) -> std::string { return "action.bookmark"; },
                        [](const SwitchViewAction&) -> std::string { return "action.switch_view"; },
                        [](const SubmitAction&) -> std::string { return "task.submit"; },
                        [](const Questionnaire&) -> std::string { return "questionnaire.submit"; },
                    },
                    in);
}

nlohmann::json input_payload(const Input& in) {
  using nlohmann::json;
  return std::visit(overloaded{
                        [](const TickInput&) { return json::object(); },
                        [](const FlyInput& f) { return json{{"axis_x", f.axis_x}, {"axis_y", f.axis_y}}; },
                        [](const HeadInput& h) { return json{{"orientation", quat_to_json(h.orientation)}}; },
                        [](const PointerInput& p) { return ray_to_json(p.ray); },
                        [](const SelectAction& a) { return json{{"node", a.node}}; },
                        [](const DeselectAction& a) { return json{{"node", a.node}}; },
                        [](const JumpAction& a) { return json{{"node", a.node}}; },
                        [](const BookmarkAction& a) { return json{{"node", a.node}}; },
                        [](const SwitchViewAction&) { return json::object(); },
                        [](const SubmitAction& s) {
                          json j{{"kind", to_string(s.kind)}};
                          if (s.estimate) j["estimate"] = *s.estimate;
                          if (!s.path.empty()) j["path"] = s.path;
                          if (s.ray) j["ray"] = ray_to_json(*s.ray);
                          return j;
                        },
                        [](const Questionnaire& q) {
                          return json{{"instrument", to_string(q.instrument)}, {"items", q.items}};
                        },
                    },
                    in);
}

Input input_from_json(const std::string& type, const nlohmann::json& payload) {
  return decode(type + " payload", [&]() -> Input {
    if (!payload.is_object()) throw InputError(type + " payload must be an object");
    if (type == "tick") return TickInput{};
    if (type == "input.fly") return FlyInput{payload.at("axis_x").get<double>(), payload.at("axis_y").get<double>()};
    if (type == "input.head") return HeadInput{quat_from_json(payload.at("orientation"))};
    if (type == "input.pointer") return PointerInput{ray_from_json(payload)};
    if (type == "action.select") return SelectAction{node_field(payload)};
    if (type == "action.deselect") return DeselectAction{node_field(payload)};
    if (type == "action.jump") return JumpAction{node_field(payload)};
    if (type == "action.bookmark") return BookmarkAction{node_field(payload)};
    if (type == "action.switch_view") return SwitchViewAction{};
    if (type == "task.submit") {
      SubmitAction s;
      s.kind = parse_task_kind(payload.at("kind").get<std::string>());
      if (payload.contains("estimate") && !payload.at("estimate").is_null()) {
        s.estimate = payload.at("estimate").get<long long>();
      }
      s.path = payload.value("path", std::vector<NodeId>{});
      if (payload.contains("ray") && !payload.at("ray").is_null()) s.ray = ray_from_json(payload.at("ray"));
      return s;
    }
    if (type == "questionnaire.submit") {
      return Questionnaire{parse_instrument(payload.at("instrument").get<std::string>()),
                           payload.at("items").get<std::vector<int>>()};
    }
    throw InputError("unknown input type '" + type + "'");
  });
}

// ---- kinematics helpers --------------------------------------------------------

Vec3 fly_velocity(const Pose& pose, double axis_x, double axis_y, double max_speed) {
  const double magnitude = std::hypot(axis_x, axis_y);
  if (magnitude > 1.0) {
    axis_x /= magnitude;
    axis_y /= magnitude;
  }
  return (pose.forward() * axis_y + pose.right() * axis_x) * max_speed;
}

std::optional<double> sphere_entry_time(const Vec3& p, const Vec3& v, const Vec3& c, double radius) {
  const Vec3 f = p - c;
  const double cc = norm2(f) - radius * radius;
  if (cc <= 0.0) return 0.0;
  const double a = norm2(v);
  if (a == 0.0) return std::nullopt;
  const double b = 2.0 * dot(f, v);
  const double disc = b * b - 4.0 * a * cc;
  if (disc < 0.0) return std::nullopt;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  if (q == 0.0) return std::nullopt;
  const double t0 = std::min(q / a, cc / q);
  // Outside the sphere both roots share a sign; negative means moving away.
  if (t0 < 0.0) return std::nullopt;
  return t0;
}

// ---- engine -------------------------------------------------------------------

PassEngine::PassEngine(const Scene& scene, TaskSet tasks, ViewCondition condition)
    : scene_(&scene), tasks_(std::move(tasks)), condition_(condition) {
  validate_tasks(scene.graph(), tasks_);
  state_.pose = scene.overview;
  state_.view.condition = condition;
}

std::vector<Notice> PassEngine::begin(double time) {
  if (begun_) throw ProtocolError("pass already started");
  if (!std::isfinite(time)) throw ProtocolError("non-finite session time");
  begun_ = true;
  state_.time = time;
  anchor_fly();
  std::vector<Notice> out;
  prompt(out);
  return out;
}

std::vector<Notice> PassEngine::handle(const TimedInput& in) {
  if (!begun_) throw ProtocolError("pass has not started");
  if (!std::isfinite(in.time) || in.time < state_.time) {
    throw ProtocolError("input time " + std::to_string(in.time) + " precedes session time " + std::to_string(state_.time));
  }
  const PassState backup = state_;
  std::vector<Notice> out;
  try {
    advance(in.time, out);
    dispatch(in.input, out);
    advance(state_.time, out);
  } catch (...) {
    state_ = backup;
    throw;
  }
  return out;
}

bool PassEngine::fop_waiting_for_arrival() const {
  const TaskSpec* t = active_task();
  return t && t->kind == TaskKind::FoP && !ego() && state_.clock_running && state_.fop_highlight == t->path.size();
}

std::optional<double> PassEngine::fop_arrival_time(double horizon) const {
  const Vec3 end = scene_->positions[active_task()->path.back()];
  // Measured from the fly anchor so that intermediate ticks cannot shift the result.
  const Vec3 v = fly_velocity(state_.fly_anchor, state_.axis_x, state_.axis_y, scene_->calibration.max_fly_speed);
  const auto entry = sphere_entry_time(state_.fly_anchor.position, v, end, kArrivalRadii * scene_->calibration.node_radius);
  if (!entry) return std::nullopt;
  const double arrival = std::max(state_.time, state_.fly_anchor_time + *entry);
  if (arrival > horizon) return std::nullopt;
  return arrival;
}

void PassEngine::anchor_fly() {
  state_.fly_anchor = state_.pose;
  state_.fly_anchor_time = state_.time;
}

void PassEngine::integrate_fly(double t) {
  if (state_.axis_x == 0.0 && state_.axis_y == 0.0) return;
  const Pose moved = fly_step(state_.fly_anchor, state_.axis_x, state_.axis_y, t - state_.fly_anchor_time, scene_->nav_params());
  state_.pose.position = moved.position;
  state_.pose.controller_ray.origin = moved.controller_ray.origin;
  // The HUD follows the nearest node while flying.
  double best = std::numeric_limits<double>::infinity();
  for (NodeId v = 0; v < scene_->positions.size(); ++v) {
    const double d = norm2(scene_->positions[v] - state_.pose.position);
    if (d < best) {
      best = d;
      state_.user_node = v;
    }
  }
}

void PassEngine::advance(double t, std::vector<Notice>& out) {
  for (;;) {
    if (state_.move && state_.move->anim.end_time() <= t) {
      state_.time = std::max(state_.time, state_.move->anim.end_time());
      finish_move(out);
      continue;
    }
    if (!state_.move && fop_waiting_for_arrival()) {
      if (const auto arrival = fop_arrival_time(t)) {
        integrate_fly(*arrival);
        state_.time = *arrival;
        TaskResult r;
        r.kind = TaskKind::FoP;
        r.completion_time = state_.time - state_.task_start;
        r.selected_nodes = state_.clicks;
        complete(std::move(r), out);
        continue;
      }
    }
    break;
  }
  if (state_.move) {
    state_.pose = jump_sample(state_.move->anim, state_.pose, t);
  } else {
    integrate_fly(t);
  }
  state_.time = t;
}

void PassEngine::finish_move(std::vector<Notice>& out) {
  ActiveMove move = std::move(*state_.move);
  state_.move.reset();
  state_.pose = jump_sample(move.anim, state_.pose, move.anim.end_time());
  state_.user_node = move.anim.target_node;
  state_.view = move.to;
  anchor_fly();
  out.push_back(MoveFinished{state_.view});

  const TaskSpec* t = active_task();
  if (t && t->kind == TaskKind::FoP && state_.clock_running && state_.fop_highlight == t->path.size() &&
      move.anim.target_node == t->path.back()) {
    TaskResult r;
    r.kind = TaskKind::FoP;
    r.completion_time = state_.time - state_.task_start;
    r.selected_nodes = state_.clicks;
    complete(std::move(r), out);
  }
}

EgoViewState PassEngine::view_at(std::optional<NodeId> node) const {
  if (!node || !ego()) {
    EgoViewState v;
    v.condition = condition_;
    return v;
  }
  return apply_condition(scene_->graph(), scene_->positions, condition_, node, scene_->bubble_radius_for(*node));
}

void PassEngine::start_move(NodeId node, std::vector<Notice>& out) {
  if (state_.move) finish_move(out);
  if (finished()) return;
  if (state_.user_node == node && state_.pose.position == scene_->positions[node]) return;
  ActiveMove move{start_jump(state_.time, state_.pose, node, scene_->positions[node]), state_.view, view_at(node)};
  out.push_back(MoveStarted{move.anim, move.from, move.to});
  state_.move = std::move(move);
}

void PassEngine::place_at(std::optional<NodeId> node, std::vector<Notice>& out) {
  if (state_.move) finish_move(out);
  const Vec3 target = node ? scene_->positions[*node] : scene_->overview.position;
  const Vec3 shift = target - state_.pose.position;
  state_.pose.position = target;
  state_.pose.controller_ray.origin += shift;
  state_.axis_x = state_.axis_y = 0.0;
  state_.user_node = node;
  state_.view = view_at(node);
  anchor_fly();
  out.push_back(ViewChanged{state_.view});
}

void PassEngine::prompt(std::vector<Notice>& out) {
  const TaskSpec& t = tasks_[state_.task_index];
  state_.task_start = state_.time;
  state_.clicks.clear();
  state_.selection.clear();
  state_.fop_highlight = 0;
  state_.clock_running = t.kind != TaskKind::FoP && t.kind != TaskKind::SO_OD;
  state_.axis_x = state_.axis_y = 0.0;
  anchor_fly();
  // FiP and SO_DD continue from where the previous task left the user.
  if (t.kind != TaskKind::FiP && t.kind != TaskKind::SO_DD) {
    place_at(t.kind == TaskKind::SO_OD ? std::nullopt : t.anchor, out);
  }
  out.push_back(TaskPrompted{state_.time, state_.task_index, t});
}

void PassEngine::complete(TaskResult result, std::vector<Notice>& out) {
  out.push_back(TaskCompleted{state_.time, state_.task_index, result});
  state_.results.push_back(std::move(result));
  ++state_.task_index;
  state_.clock_running = false;
  if (finished()) {
    state_.axis_x = state_.axis_y = 0.0;
    out.push_back(PassFinished{});
  } else {
    prompt(out);
  }
}

Vec3 PassEngine::drawn_position(NodeId v) const {
  const auto eff = [&](const EgoViewState& view) {
    const auto it = view.displaced_positions.find(v);
    return it == view.displaced_positions.end() ? scene_->positions[v] : it->second;
  };
  if (!state_.move) return eff(state_.view);
  const Vec3 a = eff(state_.move->from);
  const Vec3 b = eff(state_.move->to);
  return a == b ? a : blend(a, b, ease(state_.move->anim.progress(state_.time)));
}

std::vector<Vec3> PassEngine::drawn_positions() const {
  if (!state_.move) return effective_positions(state_.view, scene_->positions);
  return morph(state_.move->from, state_.move->to, scene_->positions, state_.move->anim.progress(state_.time));
}

double PassEngine::move_progress() const { return state_.move ? state_.move->anim.progress(state_.time) : 1.0; }

void PassEngine::select(NodeId node, std::vector<Notice>& out) {
  const TaskSpec* t = active_task();
  if (!t) return;
  switch (t->kind) {
    case TaskKind::FiN:
      state_.clicks.push_back(node);
      if (node == t->target) {
        TaskResult r;
        r.kind = TaskKind::FiN;
        r.completion_time = state_.time - state_.task_start;
        r.selected_nodes = state_.clicks;
        complete(std::move(r), out);
      }
      break;
    case TaskKind::FCN:
      state_.clicks.push_back(node);
      if (std::find(state_.selection.begin(), state_.selection.end(), node) == state_.selection.end()) {
        state_.selection.insert(std::upper_bound(state_.selection.begin(), state_.selection.end(), node), node);
      }
      break;
    case TaskKind::FoP:
      if (!state_.clock_running) {
        if (node != t->path.front()) break;
        // Clicking the start node starts the clock and puts the user on it.
        state_.clicks.push_back(node);
        place_at(node, out);
        state_.clock_running = true;
        state_.task_start = state_.time;
        state_.fop_highlight = 1;
        break;
      }
      {
        const std::size_t next = fop_progress(t->path, state_.fop_highlight, node);
        if (next == state_.fop_highlight) break;
        state_.clicks.push_back(node);
        state_.fop_highlight = next;
        if (ego()) start_move(node, out);
      }
      break;
    default:
      break;
  }
}

void PassEngine::submit(const SubmitAction& s, std::vector<Notice>& out) {
  const TaskSpec* t = active_task();
  if (!t) throw ProtocolError("no active task; the pass is complete");
  if (s.kind != t->kind) throw ProtocolError("submission for inactive task " + to_string(s.kind) + " (active: " + to_string(t->kind) + ")");
  TaskResult r;
  r.kind = t->kind;
  const auto angle = [&](NodeId target) {
    const Ray ray = normalized_ray(s.ray.value_or(state_.pose.controller_ray));
    r.ray = ray;
    r.angle_deviation_degrees = score_so(ray, drawn_position(target));
  };
  switch (t->kind) {
    case TaskKind::FiN:
    case TaskKind::FoP:
      throw ProtocolError(to_string(t->kind) + " completes automatically and takes no submission");
    case TaskKind::FCN: {
      const FcnScore sc = score_fcn(state_.selection, t->truth);
      r.selected_nodes = state_.selection;
      r.correctness_rate = sc.correctness_rate;
      r.miss_rate = sc.miss_rate;
      r.false_positive_rate = sc.false_positive_rate;
      break;
    }
    case TaskKind::END: {
      if (!s.estimate) throw ProtocolError("END submission needs an integer estimate");
      const EndScore sc = score_end(*s.estimate, t->truth_degree);
      r.reported_estimate = s.estimate;
      r.judgement_error = sc.judgement_error;
      r.signed_judgement_error = sc.signed_error;
      break;
    }
    case TaskKind::SO_OD:
      if (!state_.clock_running) throw ProtocolError("SO_OD has not been started; switch to the detail view first");
      angle(*t->target);
      break;
    case TaskKind::FiP: {
      const FipScore sc = score_fip(s.path, scene_->graph(), t->path);
      r.reported_path = s.path;
      r.path_correct = sc.path_correct;
      r.path_deviation = sc.path_deviation;
      break;
    }
    case TaskKind::SO_DD:
    case TaskKind::SO_DO:
      angle(*t->target);
      break;
  }
  r.completion_time = state_.time - state_.task_start;
  complete(std::move(r), out);
}

void PassEngine::dispatch(const Input& in, std::vector<Notice>& out) {
  const auto require_node = [&](NodeId v) {
    if (!scene_->graph().contains(v)) throw ProtocolError("unknown node id " + std::to_string(v));
  };
  const auto in_so_task = [&] {
    const TaskSpec* t = active_task();
    return t && (t->kind == TaskKind::SO_OD || t->kind == TaskKind::SO_DD || t->kind == TaskKind::SO_DO);
  };
  std::visit(overloaded{
                 [](const TickInput&) {},
                 [&](const FlyInput& f) {
                   if (ego()) throw ProtocolError("flying is only available in the baseline condition");
                   if (!std::isfinite(f.axis_x) || !std::isfinite(f.axis_y)) throw ProtocolError("non-finite fly input");
                   if (in_so_task() && (f.axis_x != 0.0 || f.axis_y != 0.0)) {
                     throw ProtocolError("navigation is disabled during SO tasks");
                   }
                   anchor_fly();
                   state_.axis_x = std::clamp(f.axis_x, -1.0, 1.0);
                   state_.axis_y = std::clamp(f.axis_y, -1.0, 1.0);
                 },
                 [&](const HeadInput& h) {
                   state_.pose.orientation = normalized_quat(h.orientation);
                   anchor_fly();
                 },
                 [&](const PointerInput& p) {
                   state_.pose.controller_ray = normalized_ray(p.ray);
                   anchor_fly();
                 },
                 [&](const SelectAction& a) {
                   require_node(a.node);
                   select(a.node, out);
                 },
                 [&](const DeselectAction& a) {
                   require_node(a.node);
                   const TaskSpec* t = active_task();
                   if (t && t->kind == TaskKind::FCN) {
                     const auto it = std::find(state_.selection.begin(), state_.selection.end(), a.node);
                     if (it != state_.selection.end()) state_.selection.erase(it);
                   }
                 },
                 [&](const JumpAction& a) {
                   require_node(a.node);
                   if (!ego()) throw ProtocolError("jumping is not available in the baseline condition");
                   if (in_so_task()) throw ProtocolError("navigation is disabled during SO tasks");
                   const TaskSpec* t = active_task();
                   if (t && t->kind == TaskKind::FoP) {
                     select(a.node, out);
                   } else {
                     start_move(a.node, out);
                   }
                 },
                 [&](const BookmarkAction& a) {
                   require_node(a.node);
                   state_.bookmarks.push_back(a.node);
                 },
                 [&](const SwitchViewAction&) {
                   const TaskSpec* t = active_task();
                   if (!t || t->kind != TaskKind::SO_OD || state_.clock_running) {
                     throw ProtocolError("view switching is disabled during study tasks except to start SO_OD");
                   }
                   place_at(t->anchor, out);
                   state_.clock_running = true;
                   state_.task_start = state_.time;
                 },
                 [&](const SubmitAction& s) { submit(s, out); },
                 [&](const Questionnaire& q) {
                   validate_questionnaire(q);
                   state_.questionnaires.push_back(q);
                 },
             },
             in);
}

}  // namespace egonet
