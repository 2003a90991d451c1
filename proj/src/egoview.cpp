#include "egonet/egoview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "egonet/errors.hpp"
#include "egonet/json_util.hpp"
#include "egonet/navigation.hpp"

namespace egonet {

namespace {

// Sub-segments shorter than this (relative to the sphere radius) are
// numerical slivers from chords touching the surface.
constexpr double kSliverFraction = 1e-9;

double angle_between(const Vec3& a, const Vec3& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return std::numbers::pi / 2.0;
  return std::acos(std::clamp(dot(a, b) / (na * nb), -1.0, 1.0));
}

}  // namespace

std::string to_string(ViewCondition c) {
  switch (c) {
    case ViewCondition::Baseline:
      return "baseline";
    case ViewCondition::EgoHighlight:
      return "highlight";
    case ViewCondition::EgoBubble:
      return "bubble";
  }
  return "baseline";
}

ViewCondition parse_condition(const std::string& name) {
  if (name == "baseline" || name == "Baseline") return ViewCondition::Baseline;
  if (name == "highlight" || name == "EgoHighlight") return ViewCondition::EgoHighlight;
  if (name == "bubble" || name == "EgoBubble") return ViewCondition::EgoBubble;
  throw InputError("unknown view condition '" + name + "' (expected baseline|highlight|bubble)");
}

std::vector<Vec3> fibonacci_sphere(std::size_t k, double radius, const Vec3& center) {
  if (k == 0) throw ParameterError("fibonacci_sphere needs k >= 1");
  if (!(radius > 0.0)) throw ParameterError("fibonacci_sphere needs radius > 0");
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> points;
  points.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double y = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    const double ring = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double phi = static_cast<double>(i) * golden_angle;
    points.push_back(center + Vec3{ring * std::cos(phi), y, ring * std::sin(phi)} * radius);
  }
  return points;
}

std::map<NodeId, std::size_t> assign_bubble_slots(const std::map<NodeId, Vec3>& neighbor_positions,
                                                  const Vec3& user_pos, const std::vector<Vec3>& slots) {
  if (neighbor_positions.size() != slots.size()) {
    throw ParameterError("slot count " + std::to_string(slots.size()) + " does not match neighbor count " +
                         std::to_string(neighbor_positions.size()));
  }
  std::vector<char> taken(slots.size(), 0);
  std::map<NodeId, std::size_t> out;
  for (const auto& [node, pos] : neighbor_positions) {
    const Vec3 dir = pos - user_pos;
    std::size_t best = slots.size();
    double best_angle = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (taken[s]) continue;
      const double a = angle_between(dir, slots[s] - user_pos);
      if (a < best_angle) {
        best_angle = a;
        best = s;
      }
    }
    taken[best] = 1;
    out.emplace(node, best);
  }
  return out;
}

std::vector<std::pair<double, double>> outside_intervals(const Vec3& p0, const Vec3& p1, const Vec3& center,
                                                         double r) {
  if (!(r > 0.0)) throw ParameterError("sphere radius must be positive");
  const Vec3 d = p1 - p0;
  const Vec3 f = p0 - center;
  const double a = norm2(d);
  const double c = norm2(f) - r * r;
  if (a == 0.0) {
    if (c > 0.0) return {{0.0, 0.0}};
    return {};
  }
  const double b = 2.0 * dot(f, d);
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) {
    // Line misses or grazes the sphere: entirely outside.
    return {{0.0, 1.0}};
  }
  // Numerically stable roots.
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  double t0 = q / a;
  double t1 = c / q;
  if (t0 > t1) std::swap(t0, t1);

  if (t1 <= 0.0 || t0 >= 1.0) return {{0.0, 1.0}};
  std::vector<std::pair<double, double>> out;
  if (t0 > 0.0) out.emplace_back(0.0, t0);
  if (t1 < 1.0) out.emplace_back(t1, 1.0);
  return out;
}

std::vector<Segment> clip_edge_to_sphere(const Vec3& p0, const Vec3& p1, const Vec3& center, double r) {
  const Vec3 d = p1 - p0;
  std::vector<Segment> out;
  for (const auto& [ta, tb] : outside_intervals(p0, p1, center, r)) {
    const Vec3 a = ta == 0.0 ? p0 : p0 + d * ta;
    const Vec3 b = tb == 1.0 ? p1 : p0 + d * tb;
    if (norm2(d) > 0.0 && distance(a, b) <= kSliverFraction * r) continue;
    out.emplace_back(a, b);
  }
  return out;
}

double default_bubble_radius(const Graph& g, const std::vector<Vec3>& positions, NodeId user_node) {
  const auto adj = g.neighbors(user_node);
  if (adj.empty()) return kBubbleRadiusMin;
  std::vector<double> lengths;
  lengths.reserve(adj.size());
  for (NodeId w : adj) lengths.push_back(distance(positions[user_node], positions[w]));
  std::sort(lengths.begin(), lengths.end());
  const std::size_t n = lengths.size();
  const double median = n % 2 ? lengths[n / 2] : 0.5 * (lengths[n / 2 - 1] + lengths[n / 2]);
  return std::clamp(kBubbleRadiusScale * median, kBubbleRadiusMin, kBubbleRadiusMax);
}

EgoViewState apply_condition(const Graph& g, const std::vector<Vec3>& positions, ViewCondition condition,
                             std::optional<NodeId> user_node, double bubble_radius) {
  EgoViewState view;
  view.condition = condition;
  if (condition == ViewCondition::Baseline) return view;

  if (!user_node) throw ParameterError(to_string(condition) + " requires a user node");
  const NodeId user = *user_node;
  g.require(user);
  if (positions.size() != g.node_count()) throw ParameterError("positions do not match graph size");
  view.user_node = user;

  const auto adj = g.neighbors(user);
  view.highlight_set.assign(adj.begin(), adj.end());
  for (NodeId w : adj) view.hidden_edges.emplace_back(user, w);
  std::sort(view.hidden_edges.begin(), view.hidden_edges.end());
  if (condition == ViewCondition::EgoHighlight) return view;

  if (!(bubble_radius > 0.0)) throw ParameterError("bubble radius must be positive");
  view.bubble_radius = bubble_radius;
  const Vec3 center = positions[user];
  if (!adj.empty()) {
    std::map<NodeId, Vec3> original;
    for (NodeId w : adj) original.emplace(w, positions[w]);
    const auto slots = fibonacci_sphere(adj.size(), bubble_radius, center);
    for (const auto& [node, slot] : assign_bubble_slots(original, center, slots)) {
      view.displaced_positions.emplace(node, slots[slot]);
    }
  }

  const auto placed = [&](NodeId v) {
    const auto it = view.displaced_positions.find(v);
    return it == view.displaced_positions.end() ? positions[v] : it->second;
  };
  for (const Edge& e : g.edges()) {
    if (e.incident_to(user)) continue;
    const Vec3 a = placed(e.u);
    const Vec3 b = placed(e.v);
    auto pieces = clip_edge_to_sphere(a, b, center, bubble_radius);
    const bool untouched = pieces.size() == 1 && pieces[0].first == a && pieces[0].second == b;
    if (!untouched) view.clipped_edges.emplace(e, std::move(pieces));
  }
  return view;
}

std::vector<Vec3> effective_positions(const EgoViewState& view, const std::vector<Vec3>& base_positions) {
  std::vector<Vec3> out = base_positions;
  for (const auto& [node, pos] : view.displaced_positions) out[node] = pos;
  return out;
}

std::vector<Vec3> morph(const EgoViewState& from, const EgoViewState& to, const std::vector<Vec3>& base_positions,
                        double t) {
  const double s = ease(std::clamp(t, 0.0, 1.0));
  const auto a = effective_positions(from, base_positions);
  const auto b = effective_positions(to, base_positions);
  std::vector<Vec3> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] == b[i] ? a[i] : blend(a[i], b[i], s);
  return out;
}

std::array<int, 3> Rgb::to_bytes() const {
  const auto byte = [](double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); };
  return {byte(r), byte(g), byte(b)};
}

Rgb geodesic_color(int distance, int max_distance) {
  double green = 0.0;
  if (max_distance > 1) {
    green = std::clamp(static_cast<double>(distance - 1) / static_cast<double>(max_distance - 1), 0.0, 1.0);
  } else if (distance > 1) {
    green = 1.0;
  }
  return {1.0, green, 0.0};
}

DimSet lowlight_set(const Graph& g, NodeId hovered) {
  const auto adj = g.neighbors(hovered);
  DimSet dim;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (v != hovered && !std::binary_search(adj.begin(), adj.end(), v)) dim.nodes.push_back(v);
  }
  for (const Edge& e : g.edges()) {
    if (!e.incident_to(hovered)) dim.edges.push_back(e);
  }
  return dim;
}

nlohmann::json view_to_json(const EgoViewState& view) {
  nlohmann::json hidden = nlohmann::json::array();
  for (const Edge& e : view.hidden_edges) hidden.push_back({e.u, e.v});
  nlohmann::json displaced = nlohmann::json::array();
  for (const auto& [node, pos] : view.displaced_positions) displaced.push_back({{"node", node}, {"pos", vec_to_json(pos)}});
  nlohmann::json clipped = nlohmann::json::array();
  for (const auto& [edge, pieces] : view.clipped_edges) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& [a, b] : pieces) segs.push_back({vec_to_json(a), vec_to_json(b)});
    clipped.push_back({{"edge", {edge.u, edge.v}}, {"segments", std::move(segs)}});
  }
  return {
      {"condition", to_string(view.condition)},
      {"user_node", view.user_node ? nlohmann::json(*view.user_node) : nlohmann::json(nullptr)},
      {"highlight", view.highlight_set},
      {"hidden_edges", std::move(hidden)},
      {"displaced", std::move(displaced)},
      {"clipped", std::move(clipped)},
      {"bubble_radius", view.bubble_radius},
  };
}

EgoViewState view_from_json(const nlohmann::json& j) {
  EgoViewState view;
  view.condition = parse_condition(j.at("condition").get<std::string>());
  if (!j.at("user_node").is_null()) view.user_node = j.at("user_node").get<NodeId>();
  view.highlight_set = j.at("highlight").get<std::vector<NodeId>>();
  for (const auto& e : j.at("hidden_edges")) view.hidden_edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
  for (const auto& d : j.at("displaced")) view.displaced_positions.emplace(d.at("node").get<NodeId>(), vec_from_json(d.at("pos")));
  for (const auto& c : j.at("clipped")) {
    std::vector<Segment> pieces;
    for (const auto& s : c.at("segments")) pieces.emplace_back(vec_from_json(s.at(0)), vec_from_json(s.at(1)));
    view.clipped_edges.emplace(Edge(c.at("edge").at(0).get<NodeId>(), c.at("edge").at(1).get<NodeId>()), std::move(pieces));
  }
  view.bubble_radius = j.at("bubble_radius").get<double>();
  return view;
}

}  // namespace egonet
