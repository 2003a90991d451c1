#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "egonet/egoview.hpp"
#include "egonet/agent.hpp"
#include "egonet/eventlog.hpp"
#include "egonet/scene.hpp"
#include "egonet/tasks.hpp"
#include "json.hpp"

namespace egonet {

inline constexpr std::size_t kSquareSize = 3;

struct PlanCell {
  ViewCondition condition = ViewCondition::Baseline;
  // 0..2; graph g pairs training graph "small-g" with measured graph "large-g".
  int graph = 0;
  bool operator==(const PlanCell&) const = default;
};

using SquareRow = std::array<PlanCell, kSquareSize>;

struct PlanRow {
  std::size_t participant = 0;
  std::size_t square_row = 0;
  std::vector<PlanCell> cells;
  bool operator==(const PlanRow&) const = default;
};

struct StudyPlan {
  std::size_t participants = 0;
  std::uint64_t seed = 0;
  // Canonical Graeco-Latin square: conditions and graphs each form a Latin
  // square and every (condition, graph) pair appears exactly once.
  std::array<SquareRow, kSquareSize> square{};
  std::vector<PlanRow> rows;
  bool operator==(const StudyPlan&) const = default;
};

/// Superimposes conditions (r + c) mod 3 and graphs (2r + c) mod 3, then
/// relabels conditions, graphs and row order with seeded permutations.
/// Participant p gets square row p mod 3.
StudyPlan build_plan(std::size_t participants, std::uint64_t seed);

std::string training_graph_id(int graph);
std::string measured_graph_id(int graph);

nlohmann::json plan_to_json(const StudyPlan& plan);
StudyPlan plan_from_json(const nlohmann::json& j);

/// Scenes by graph id plus one task set per scene.
struct StudyMaterial {
  std::map<std::string, Scene> scenes;
  std::map<std::string, TaskSet> tasks;

  const Scene& scene(const std::string& graph_id) const;
  SceneLookup lookup() const;
};

inline constexpr std::size_t kSmallNodes = 165;
inline constexpr std::size_t kLargeNodes = 415;
inline constexpr std::size_t kEdgesPerNode = 2;

/// Three small and three large graphs with layouts and task sets. Graph seeds
/// that admit no valid task set are skipped deterministically.
StudyMaterial prepare_material(std::uint64_t seed, const LayoutParams& layout = {});

enum class SessionMode { Interactive, SimulatedAgent };

/// Session for one plan row: tutorial stub, then per cell a training pass on
/// the small graph and a measured pass on the large one. Simulated sessions
/// use the agent matching each condition. Interactive sessions need a human
/// and run through the protocol server, so they are rejected here.
EventLog run_session(const PlanRow& row, const StudyMaterial& material, SessionMode mode);

/// Single measured pass, as used by the simulate command.
EventLog simulate_pass(const Scene& scene, const TaskSet& tasks, ViewCondition condition, AgentKind agent,
                       const std::string& graph_id = "scene");

/// Validates the responses and appends a "questionnaire" record.
void record_questionnaire(EventLog& log, double session_seconds, const Questionnaire& q, const nlohmann::json& context);

}  // namespace egonet
