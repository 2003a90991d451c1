#include "egonet/agent.hpp"

#include "egonet/errors.hpp"

namespace egonet {

std::string to_string(AgentKind a) { return a == AgentKind::Jumper ? "jumper" : "flyer"; }

AgentKind parse_agent(const std::string& name) {
  if (name == "jumper") return AgentKind::Jumper;
  if (name == "flyer") return AgentKind::Flyer;
  throw InputError("unknown agent '" + name + "' (expected jumper|flyer)");
}

void check_agent_condition(AgentKind agent, ViewCondition condition) {
  const bool ego = condition != ViewCondition::Baseline;
  if (agent == AgentKind::Jumper && !ego) {
    throw ParameterError("the jumper agent needs an ego condition (highlight or bubble); the baseline only flies");
  }
  if (agent == AgentKind::Flyer && ego) {
    throw ParameterError("the flyer agent needs the baseline condition; ego conditions navigate by jumps");
  }
}

AgentKind agent_for(ViewCondition condition) {
  return condition == ViewCondition::Baseline ? AgentKind::Flyer : AgentKind::Jumper;
}

double drive_agent(PassRecorder& recorder, AgentKind agent, double start_time) {
  PassEngine& engine = recorder.engine();
  check_agent_condition(agent, engine.condition());
  const Scene& scene = engine.scene();

  double t = start_time;
  recorder.begin(t);
  const auto feed = [&](Input in) { recorder.feed({t, std::move(in)}); };
  const auto point_at = [&](NodeId target) {
    const Vec3 origin = engine.state().pose.position;
    const Ray ray{origin, normalized(engine.drawn_positions()[target] - origin)};
    feed(PointerInput{ray});
    return ray;
  };
  const auto fly_to = [&](NodeId node) {
    const Vec3 goal = scene.positions[node];
    feed(HeadInput{Quat::look_along(goal - engine.state().pose.position)});
    feed(FlyInput{0.0, 1.0});
    const Pose& pose = engine.state().pose;
    const Vec3 v = fly_velocity(pose, 0.0, 1.0, scene.calibration.max_fly_speed);
    const auto arrival = sphere_entry_time(pose.position, v, goal, kArrivalRadii * scene.calibration.node_radius);
    if (!arrival) throw Error("flyer cannot reach node " + std::to_string(node));
    t += *arrival;
  };

  while (!engine.finished()) {
    const TaskSpec task = *engine.active_task();
    const std::size_t index = engine.state().task_index;
    t += kSelectSeconds;
    switch (task.kind) {
      case TaskKind::FiN:
        feed(SelectAction{*task.target});
        break;
      case TaskKind::FCN:
        for (std::size_t i = 0; i < task.truth.size(); ++i) {
          if (i > 0) t += kSelectSeconds;
          feed(SelectAction{task.truth[i]});
        }
        t += kSelectSeconds;
        feed(SubmitAction{TaskKind::FCN, std::nullopt, {}, std::nullopt});
        break;
      case TaskKind::END:
        feed(SubmitAction{TaskKind::END, static_cast<long long>(task.truth_degree), {}, std::nullopt});
        break;
      case TaskKind::SO_OD: {
        feed(SwitchViewAction{});
        t += kSelectSeconds;
        const Ray ray = point_at(*task.target);
        feed(SubmitAction{TaskKind::SO_OD, std::nullopt, {}, ray});
        break;
      }
      case TaskKind::FiP:
        feed(SubmitAction{TaskKind::FiP, std::nullopt, task.path, std::nullopt});
        break;
      case TaskKind::FoP:
        feed(SelectAction{task.path.front()});
        for (std::size_t i = 1; i < task.path.size(); ++i) {
          t += kSelectSeconds;
          feed(SelectAction{task.path[i]});
          if (agent == AgentKind::Jumper) {
            t += kJumpDuration;
            feed(TickInput{});
          } else {
            fly_to(task.path[i]);
            feed(i + 1 < task.path.size() ? Input{FlyInput{0.0, 0.0}} : Input{TickInput{}});
          }
        }
        break;
      case TaskKind::SO_DD:
      case TaskKind::SO_DO: {
        const Ray ray = point_at(*task.target);
        feed(SubmitAction{task.kind, std::nullopt, {}, ray});
        break;
      }
    }
    if (engine.state().task_index == index) throw Error("agent failed to complete task " + to_string(task.kind));
  }
  return t;
}

}  // namespace egonet
