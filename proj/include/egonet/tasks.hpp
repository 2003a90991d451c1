#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egonet/graph.hpp"
#include "egonet/navigation.hpp"
#include "egonet/vec3.hpp"
#include "json.hpp"

namespace egonet {

enum class TaskKind { FiN, FCN, END, SO_OD, FiP, FoP, SO_DD, SO_DO };

inline constexpr std::array<TaskKind, 8> kTaskOrder{TaskKind::FiN,  TaskKind::FCN, TaskKind::END,   TaskKind::SO_OD,
                                                    TaskKind::FiP,  TaskKind::FoP, TaskKind::SO_DD, TaskKind::SO_DO};

std::string to_string(TaskKind k);
TaskKind parse_task_kind(const std::string& name);

// Degree and size windows a generated instance must satisfy.
inline constexpr std::size_t kFinDegreeMin = 14, kFinDegreeMax = 44;
inline constexpr std::size_t kFcnCommonMin = 1, kFcnCommonMax = 5;
inline constexpr std::size_t kEndDegreeMin = 21, kEndDegreeMax = 53;
inline constexpr std::size_t kFipPathMin = 4, kFipPathMax = 5;
inline constexpr std::size_t kFopPathNodes = 5;

/// One task instance. Field meaning depends on kind:
///   anchor: node the user starts on (none = starts in the overview).
///   target: FiN neighbor to find, FCN second node, SO_OD/FiP end node,
///           SO_DD the FoP start, SO_DO the FoP end.
///   path:   SO_OD/FiP canonical shortest path, FoP path to follow.
///   truth:  FCN common neighbors.
struct TaskSpec {
  TaskKind kind = TaskKind::FiN;
  std::optional<NodeId> anchor;
  std::optional<NodeId> target;
  std::string target_label;
  std::vector<NodeId> path;
  std::vector<NodeId> truth;
  std::size_t truth_degree = 0;

  bool operator==(const TaskSpec&) const = default;
};

using TaskSet = std::vector<TaskSpec>;

/// One instance per kind in kTaskOrder. SO_OD and FiP share their node pair;
/// SO_DD and SO_DO point back along the FoP path. Entities are kept disjoint
/// across tasks when the graph allows it. Positions are only checked for size:
/// the constraints are purely topological. Throws GenerationError naming the
/// first unmet constraint.
TaskSet generate_tasks(const Graph& g, const std::vector<Vec3>& positions, std::uint64_t seed);

/// Checks that a task set satisfies every constraint on g.
void validate_tasks(const Graph& g, const TaskSet& tasks);

struct FcnScore {
  double correctness_rate = 0.0;
  double miss_rate = 0.0;
  // Wrong picks among all picks.
  double false_positive_rate = 0.0;
};
FcnScore score_fcn(const std::vector<NodeId>& selected, const std::vector<NodeId>& truth);

struct EndScore {
  double judgement_error = 0.0;  // |estimate - truth| / truth
  double signed_error = 0.0;     // negative when under-estimated
};
EndScore score_end(long long estimate, std::size_t truth_degree);

struct FipScore {
  bool path_correct = false;
  std::optional<double> path_deviation;
};
FipScore score_fip(const std::vector<NodeId>& reported, const Graph& g, const std::vector<NodeId>& truth_path);

double score_so(const Ray& ray, const Vec3& target_position);

/// Index of the next highlighted FoP node after a click. Only the currently
/// highlighted node advances; everything else leaves the index unchanged.
std::size_t fop_progress(const std::vector<NodeId>& path, std::size_t highlighted, NodeId clicked);

struct TaskResult {
  TaskKind kind = TaskKind::FiN;
  double completion_time = 0.0;
  std::vector<NodeId> selected_nodes;
  std::optional<long long> reported_estimate;
  std::vector<NodeId> reported_path;
  std::optional<Ray> ray;
  std::optional<double> correctness_rate;
  std::optional<double> miss_rate;
  std::optional<double> false_positive_rate;
  std::optional<double> judgement_error;
  std::optional<double> signed_judgement_error;
  std::optional<bool> path_correct;
  std::optional<double> path_deviation;
  std::optional<double> angle_deviation_degrees;

  bool operator==(const TaskResult&) const = default;
};

nlohmann::json ray_to_json(const Ray& r);
Ray ray_from_json(const nlohmann::json& j);

nlohmann::json task_to_json(const TaskSpec& t);
TaskSpec task_from_json(const nlohmann::json& j);
// Fields a participant may see: no truth sets, degrees or FiP paths.
nlohmann::json task_public_json(const TaskSpec& t);

nlohmann::json tasks_to_json(const TaskSet& tasks);
TaskSet tasks_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const TaskResult& r);
TaskResult result_from_json(const nlohmann::json& j);

}  // namespace egonet
