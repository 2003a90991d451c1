#pragma once

// Shared scenes for the session, study and protocol tests. Built once per
// process because a layout costs a noticeable fraction of a second.

#include <vector>

#include "egonet/errors.hpp"
#include "egonet/graph.hpp"
#include "egonet/scene.hpp"
#include "egonet/tasks.hpp"

namespace egonet::fixture {

struct SceneTasks {
  Scene scene;
  TaskSet tasks;
};

// First seed from `first` whose graph admits a full task set.
inline SceneTasks make(std::size_t n, std::uint64_t first) {
  for (std::uint64_t seed = first;; ++seed) {
    const Graph g = generate_ba({n, 2, seed});
    try {
      generate_tasks(g, std::vector<Vec3>(n), seed);
    } catch (const GenerationError&) {
      continue;
    }
    LayoutParams params;
    params.seed = seed;
    Scene scene = build_scene({g, {n, 2, seed}}, params);
    TaskSet tasks = generate_tasks(scene.graph(), scene.positions, seed);
    return {std::move(scene), std::move(tasks)};
  }
}

inline const SceneTasks& small() {
  static const SceneTasks f = make(165, 1);
  return f;
}

// Same tasks, except that FoP follows the scene's calibrated reference path
// (and both later SO tasks refer to it).
inline TaskSet with_reference_fop(const Scene& scene, TaskSet tasks) {
  const auto& path = scene.calibration.reference_path;
  for (TaskSpec& t : tasks) {
    if (t.kind == TaskKind::FoP) t.path = path;
    if (t.kind == TaskKind::SO_DD) {
      t.anchor = path.back();
      t.target = path.front();
    }
    if (t.kind == TaskKind::SO_DO) t.target = path.back();
  }
  return tasks;
}

}  // namespace egonet::fixture
