#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "egonet/graph.hpp"
#include "egonet/vec3.hpp"
#include "json.hpp"

namespace egonet {

enum class ViewCondition { Baseline, EgoHighlight, EgoBubble };

std::string to_string(ViewCondition c);
// Accepts "baseline" | "highlight" | "bubble" (and the enum spellings).
ViewCondition parse_condition(const std::string& name);

using Segment = std::pair<Vec3, Vec3>;

/// Per-condition adaptation of the shared layout around the user-node.
struct EgoViewState {
  ViewCondition condition = ViewCondition::Baseline;
  std::optional<NodeId> user_node;
  // Neighbors drawn with the yellow halo (ascending ids).
  std::vector<NodeId> highlight_set;
  // Links to direct neighbors, redundant once those are highlighted.
  std::vector<Edge> hidden_edges;
  // Only nodes moved off their layout position.
  std::map<NodeId, Vec3> displaced_positions;
  // Visible edges that cross the bubble, with their surviving sub-segments.
  std::map<Edge, std::vector<Segment>> clipped_edges;
  double bubble_radius = 0.0;

  bool operator==(const EgoViewState&) const = default;
};

/// Baseline: identity. EgoHighlight: halo on neighbors, user-incident links
/// hidden. EgoBubble: EgoHighlight plus neighbors moved onto a Fibonacci
/// sphere around the user-node and visible edges clipped at that sphere.
/// Throws ParameterError when an ego condition has no user_node.
EgoViewState apply_condition(const Graph& g, const std::vector<Vec3>& positions, ViewCondition condition,
                             std::optional<NodeId> user_node, double bubble_radius);

/// Bubble radius rule: half the median incident-edge length, clamped to [2, 10].
double default_bubble_radius(const Graph& g, const std::vector<Vec3>& positions, NodeId user_node);

inline constexpr double kBubbleRadiusScale = 0.5;
inline constexpr double kBubbleRadiusMin = 2.0;
inline constexpr double kBubbleRadiusMax = 10.0;

/// k points spread on a sphere: y_i = 1 - 2(i + 0.5)/k, azimuth i * pi(3 - sqrt 5).
std::vector<Vec3> fibonacci_sphere(std::size_t k, double radius, const Vec3& center);

/// Greedy slot assignment: neighbors in ascending id each take the free slot
/// closest in angle to their original direction from the user.
std::map<NodeId, std::size_t> assign_bubble_slots(const std::map<NodeId, Vec3>& neighbor_positions,
                                                  const Vec3& user_pos, const std::vector<Vec3>& slots);

/// Portions of segment p0-p1 outside the sphere: 0, 1 or 2 sub-segments.
std::vector<Segment> clip_edge_to_sphere(const Vec3& p0, const Vec3& p1, const Vec3& center, double r);

/// Parameter intervals [t0, t1] in [0, 1] of the segment that lie outside the sphere.
std::vector<std::pair<double, double>> outside_intervals(const Vec3& p0, const Vec3& p1, const Vec3& center, double r);

/// Where each node is drawn under a view: displaced position or base position.
std::vector<Vec3> effective_positions(const EgoViewState& view, const std::vector<Vec3>& base_positions);

/// Eased interpolation of effective positions between two view states.
std::vector<Vec3> morph(const EgoViewState& from, const EgoViewState& to, const std::vector<Vec3>& base_positions,
                        double t);

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  bool operator==(const Rgb&) const = default;
  std::array<int, 3> to_bytes() const;
};

/// Hop-distance ramp from red (distance <= 1) to yellow (max_distance).
Rgb geodesic_color(int distance, int max_distance);

struct DimSet {
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;
};

/// Everything outside the hovered node's direct neighborhood.
DimSet lowlight_set(const Graph& g, NodeId hovered);

nlohmann::json view_to_json(const EgoViewState& view);
EgoViewState view_from_json(const nlohmann::json& j);

}  // namespace egonet
