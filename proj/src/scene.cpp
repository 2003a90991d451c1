#include "egonet/scene.hpp"

#include <algorithm>

#include "egonet/egoview.hpp"
#include "egonet/errors.hpp"
#include "egonet/json_util.hpp"
#include "egonet/tasks.hpp"

namespace egonet {

double Scene::bubble_radius_for(NodeId user) const {
  if (calibration.bubble_radius > 0.0) return calibration.bubble_radius;
  return default_bubble_radius(graph(), positions, user);
}

std::vector<NodeId> reference_path(const Graph& g) {
  const int hops = static_cast<int>(kFopPathNodes) - 1;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    const auto dist = geodesic_distances(g, s);
    const auto it = std::find(dist.begin(), dist.end(), hops);
    if (it != dist.end()) return shortest_path(g, s, static_cast<NodeId>(it - dist.begin()));
  }
  throw GenerationError("scene graph has no shortest path with " + std::to_string(kFopPathNodes) +
                        " nodes; cannot calibrate the fly speed");
}

double path_length(const std::vector<Vec3>& positions, const std::vector<NodeId>& path) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) total += distance(positions.at(path[i]), positions.at(path[i + 1]));
  return total;
}

Calibration calibrate(const Graph& g, const std::vector<Vec3>& positions) {
  Calibration c;
  c.reference_path = reference_path(g);
  const double len = path_length(positions, c.reference_path);
  if (!(len > 0.0)) throw ParameterError("reference path has zero length");
  c.max_fly_speed = len / kReferenceFlightSeconds;

  std::vector<double> lengths;
  lengths.reserve(g.edge_count());
  for (const Edge& e : g.edges()) lengths.push_back(distance(positions[e.u], positions[e.v]));
  std::nth_element(lengths.begin(), lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2), lengths.end());
  c.node_radius = kNodeRadiusFraction * lengths[lengths.size() / 2];
  return c;
}

Scene build_scene(GraphFile graph, const LayoutParams& params) {
  if (!graph.graph.is_connected()) throw DisconnectedError("scene graph must be connected");
  auto positions = run_layout(graph.graph, params);
  return scene_from_positions(std::move(graph), std::move(positions), params);
}

Scene scene_from_positions(GraphFile graph, std::vector<Vec3> positions, const LayoutParams& params) {
  if (positions.size() != graph.graph.node_count()) throw ParameterError("positions do not match graph size");
  if (!graph.graph.is_connected()) throw DisconnectedError("scene graph must be connected");
  Scene s;
  s.calibration = calibrate(graph.graph, positions);
  s.overview = overview_pose(positions);
  s.graph_file = std::move(graph);
  s.positions = std::move(positions);
  s.layout_params = params;
  return s;
}

nlohmann::json pose_to_json(const Pose& p) {
  return {{"position", vec_to_json(p.position)},
          {"orientation", quat_to_json(p.orientation)},
          {"ray", {{"origin", vec_to_json(p.controller_ray.origin)}, {"direction", vec_to_json(p.controller_ray.direction)}}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  return decode("pose", [&] {
    Pose p;
    p.position = vec_from_json(j.at("position"));
    p.orientation = quat_from_json(j.at("orientation"));
    p.controller_ray = {vec_from_json(j.at("ray").at("origin")), vec_from_json(j.at("ray").at("direction"))};
    return p;
  });
}

nlohmann::json scene_to_json(const Scene& s) {
  nlohmann::json pos = nlohmann::json::array();
  for (const Vec3& p : s.positions) pos.push_back(vec_to_json(p));
  const Calibration& c = s.calibration;
  return {{"graph", graph_to_json(s.graph_file)},
          {"positions", std::move(pos)},
          {"layout_params", s.layout_params},
          {"calibration",
           {{"reference_path", c.reference_path},
            {"max_fly_speed", c.max_fly_speed},
            {"node_radius", c.node_radius},
            {"bubble_radius", c.bubble_radius},
            {"teleport_duration", c.teleport_duration}}},
          {"overview", pose_to_json(s.overview)}};
}

Scene scene_from_json(const nlohmann::json& j) {
  return decode("scene", [&] {
    Scene s;
    s.graph_file = graph_from_json(j.at("graph"));
    for (const auto& p : j.at("positions")) s.positions.push_back(vec_from_json(p));
    if (s.positions.size() != s.graph().node_count()) {
      throw InputError("scene has " + std::to_string(s.positions.size()) + " positions for " +
                       std::to_string(s.graph().node_count()) + " nodes");
    }
    for (const Vec3& p : s.positions) {
      if (!is_finite(p)) throw InputError("scene contains a non-finite position");
    }
    s.layout_params = j.at("layout_params").get<LayoutParams>();
    if (!j.contains("calibration")) throw InputError("scene has no navigation calibration");
    const auto& c = j.at("calibration");
    s.calibration.reference_path = c.at("reference_path").get<std::vector<NodeId>>();
    s.calibration.max_fly_speed = c.at("max_fly_speed").get<double>();
    s.calibration.node_radius = c.at("node_radius").get<double>();
    s.calibration.bubble_radius = c.value("bubble_radius", 0.0);
    s.calibration.teleport_duration = c.value("teleport_duration", 2.0);
    if (!(s.calibration.max_fly_speed > 0.0)) throw InputError("calibration max_fly_speed must be positive");
    if (!(s.calibration.node_radius > 0.0)) throw InputError("calibration node_radius must be positive");
    for (NodeId v : s.calibration.reference_path) s.graph().require(v);
    s.overview = pose_from_json(j.at("overview"));
    return s;
  });
}

}  // namespace egonet
