#pragma once

#include <vector>

#include "egonet/graph.hpp"
#include "egonet/layout.hpp"
#include "egonet/navigation.hpp"
#include "json.hpp"

namespace egonet {

/// Per-scene navigation constants. Absolute layout units are arbitrary, so
/// speeds and radii are derived from the scene itself.
struct Calibration {
  // Reference 5-node path flown in kReferenceFlightSeconds at full speed.
  std::vector<NodeId> reference_path;
  double max_fly_speed = 1.0;
  // Sphere radius used for picking and for proximity arrival.
  double node_radius = 1.0;
  // Fixed bubble radius; 0 selects the per-user-node rule.
  double bubble_radius = 0.0;
  double teleport_duration = 2.0;

  bool operator==(const Calibration&) const = default;
};

inline constexpr double kReferenceFlightSeconds = 25.0;
inline constexpr double kNodeRadiusFraction = 0.05;  // of the median edge length
// Baseline flyers reach a node when within this many node radii of it.
inline constexpr double kArrivalRadii = 1.5;

struct Scene {
  GraphFile graph_file;
  std::vector<Vec3> positions;
  LayoutParams layout_params;
  Calibration calibration;
  Pose overview;

  const Graph& graph() const { return graph_file.graph; }
  double bubble_radius_for(NodeId user) const;
  NavParams nav_params() const { return {calibration.max_fly_speed, calibration.teleport_duration}; }

  bool operator==(const Scene&) const = default;
};

/// Canonical shortest path from the lowest-id node that has a node 4 hops
/// away to the lowest-id such node. Throws GenerationError when the diameter
/// is below 4.
std::vector<NodeId> reference_path(const Graph& g);

double path_length(const std::vector<Vec3>& positions, const std::vector<NodeId>& path);

Calibration calibrate(const Graph& g, const std::vector<Vec3>& positions);

/// Runs the layout and calibrates. Throws DisconnectedError on a disconnected graph.
Scene build_scene(GraphFile graph, const LayoutParams& params);

/// Calibrates around given positions (no layout run).
Scene scene_from_positions(GraphFile graph, std::vector<Vec3> positions, const LayoutParams& params);

/// {"graph", "positions", "layout_params", "calibration", "overview"}
nlohmann::json scene_to_json(const Scene& s);
Scene scene_from_json(const nlohmann::json& j);

nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace egonet
