#include "egonet/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "egonet/errors.hpp"

namespace egonet {

Pose fly_step(const Pose& pose, double axis_x, double axis_y, double dt, const NavParams& params) {
  if (axis_x == 0.0 && axis_y == 0.0) return pose;
  const double magnitude = std::hypot(axis_x, axis_y);
  if (magnitude > 1.0) {
    axis_x /= magnitude;
    axis_y /= magnitude;
  }
  const Vec3 step = (pose.forward() * axis_y + pose.right() * axis_x) * (dt * params.max_fly_speed);
  Pose out = pose;
  out.position += step;
  out.controller_ray.origin += step;
  return out;
}

double ease(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

double MoveAnimation::progress(double now) const {
  if (duration <= 0.0) return 1.0;
  return std::clamp((now - start_time) / duration, 0.0, 1.0);
}

MoveAnimation start_jump(double session_time, const Pose& pose, NodeId target_node, const Vec3& target_position) {
  return {pose.position, target_position, session_time, kJumpDuration, target_node};
}

Pose jump_sample(const MoveAnimation& anim, const Pose& pose, double session_time) {
  const double s = ease(anim.progress(session_time));
  Pose out = pose;
  out.position = blend(anim.start, anim.target, s);
  out.controller_ray.origin = pose.controller_ray.origin + (out.position - pose.position);
  return out;
}

MoveAnimation teleport(double session_time, const Pose& pose, const Pose& target_pose, double duration) {
  return {pose.position, target_pose.position, session_time, std::max(0.0, duration), std::nullopt};
}

Pose overview_pose(const std::vector<Vec3>& positions) {
  if (positions.empty()) throw ParameterError("overview_pose needs at least one position");
  Vec3 c{};
  for (const Vec3& p : positions) c += p;
  c = c / static_cast<double>(positions.size());
  double radius = 0.0;
  for (const Vec3& p : positions) radius = std::max(radius, distance(p, c));
  radius = std::max(radius, kOverviewMinRadius);

  Pose pose;
  pose.position = c + Vec3{0.0, 0.0, kOverviewDistanceFactor * radius};
  pose.orientation = Quat{};  // looks down -z, toward the centroid
  pose.controller_ray = {pose.position, {0.0, 0.0, -1.0}};
  return pose;
}

double angular_deviation(const Vec3& ray_origin, const Vec3& ray_direction, const Vec3& target) {
  const Vec3 to_target = target - ray_origin;
  if (norm2(to_target) == 0.0) throw ParameterError("target coincides with the ray origin; direction undefined");
  if (norm2(ray_direction) == 0.0) throw ParameterError("zero-length ray direction");
  const double c = std::clamp(dot(normalized(ray_direction), normalized(to_target)), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

std::optional<NodeId> pick_node(const Ray& ray, const std::vector<Vec3>& positions, double node_radius) {
  const Vec3 dir = normalized(ray.direction);
  std::optional<NodeId> best;
  double best_t = std::numeric_limits<double>::infinity();
  const double r2 = node_radius * node_radius;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec3 oc = positions[i] - ray.origin;
    const double along = dot(oc, dir);
    const double miss2 = norm2(oc) - along * along;
    if (miss2 > r2) continue;
    const double half_chord = std::sqrt(r2 - miss2);
    const double exit = along + half_chord;
    if (exit < 0.0) continue;  // behind the origin
    const double entry = std::max(0.0, along - half_chord);
    if (entry < best_t) {
      best_t = entry;
      best = static_cast<NodeId>(i);
    }
  }
  return best;
}

}  // namespace egonet
