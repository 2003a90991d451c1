#pragma once

#include <optional>
#include <vector>

#include "egonet/graph.hpp"
#include "egonet/vec3.hpp"

namespace egonet {

struct Ray {
  Vec3 origin{};
  Vec3 direction{0.0, 0.0, -1.0};

  bool operator==(const Ray&) const = default;
};

/// User head pose plus the controller's pointing ray. The view looks along
/// the orientation's -z axis; +x is to the right.
struct Pose {
  Vec3 position{};
  Quat orientation{};
  Ray controller_ray{};

  Vec3 forward() const { return orientation.rotate({0.0, 0.0, -1.0}); }
  Vec3 right() const { return orientation.rotate({1.0, 0.0, 0.0}); }

  bool operator==(const Pose&) const = default;
};

struct NavParams {
  // Layout units per second; calibrated per scene.
  double max_fly_speed = 1.0;
  double teleport_duration = 2.0;
  bool operator==(const NavParams&) const = default;
};

inline constexpr double kJumpDuration = 3.0;
// Time a simulated agent needs to aim and click before each navigation step.
inline constexpr double kSelectSeconds = 0.75;

/// Moves along and perpendicular to the view direction. The input vector is
/// clamped to unit length so speed never exceeds max_fly_speed; orientation is
/// untouched and the controller ray travels with the user.
Pose fly_step(const Pose& pose, double axis_x, double axis_y, double dt, const NavParams& params);

/// Smootherstep 6t^5 - 15t^4 + 10t^3, clamped to [0, 1].
double ease(double t);

/// Eased translation between two positions over a fixed duration. Used for
/// node-to-node jumps and overview/detail teleports alike.
struct MoveAnimation {
  Vec3 start{};
  Vec3 target{};
  double start_time = 0.0;
  double duration = kJumpDuration;
  std::optional<NodeId> target_node;

  // Normalized, un-eased progress in [0, 1].
  double progress(double now) const;
  bool finished(double now) const { return progress(now) >= 1.0; }
  double end_time() const { return start_time + duration; }

  bool operator==(const MoveAnimation&) const = default;
};

MoveAnimation start_jump(double session_time, const Pose& pose, NodeId target_node, const Vec3& target_position);

/// Position lerp(start, target, ease(progress)); everything else in `pose`
/// passes through bitwise.
Pose jump_sample(const MoveAnimation& anim, const Pose& pose, double session_time);

/// Eased move between arbitrary poses (overview <-> detail). duration <= 0 is
/// an instantaneous teleport. Orientation stays under user control.
MoveAnimation teleport(double session_time, const Pose& pose, const Pose& target_pose, double duration);

inline constexpr double kOverviewDistanceFactor = 2.5;
inline constexpr double kOverviewMinRadius = 1.0;

/// Stands on +z at 2.5x the bounding radius from the centroid, looking at it.
Pose overview_pose(const std::vector<Vec3>& positions);

/// Angle in degrees between a ray and the direction from its origin to target.
/// Throws ParameterError when target coincides with the ray origin.
double angular_deviation(const Vec3& ray_origin, const Vec3& ray_direction, const Vec3& target);

/// Nearest node whose sphere of node_radius the ray hits (ties: lower id).
std::optional<NodeId> pick_node(const Ray& ray, const std::vector<Vec3>& positions, double node_radius);

}  // namespace egonet
