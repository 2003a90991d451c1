#include "egonet/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "egonet/errors.hpp"
#include "egonet/json_util.hpp"
#include "egonet/rng.hpp"

namespace egonet {

namespace {

constexpr std::array<const char*, 8> kKindNames{"FiN", "FCN", "END", "SO_OD", "FiP", "FoP", "SO_DD", "SO_DO"};

using NodeList = std::vector<NodeId>;

// Draws uniformly among candidates whose entities avoid every node already
// used by an earlier task; falls back to all candidates when none do.
class Picker {
 public:
  explicit Picker(std::uint64_t seed) : rng_(seed) {}

  Rng& rng() { return rng_; }

  template <typename C>
  C pick(std::vector<C> candidates, const std::function<NodeList(const C&)>& entities) {
    rng_.shuffle(candidates);
    for (const C& c : candidates) {
      const NodeList nodes = entities(c);
      if (std::none_of(nodes.begin(), nodes.end(), [&](NodeId v) { return used_.count(v) > 0; })) {
        claim(nodes);
        return c;
      }
    }
    claim(entities(candidates.front()));
    return candidates.front();
  }

  void claim(const NodeList& nodes) { used_.insert(nodes.begin(), nodes.end()); }

 private:
  Rng rng_;
  std::set<NodeId> used_;
};

NodeList nodes_with_degree(const Graph& g, std::size_t lo, std::size_t hi) {
  NodeList out;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    const std::size_t d = g.degree(v);
    if (d >= lo && d <= hi) out.push_back(v);
  }
  return out;
}

using Pair = std::pair<NodeId, NodeId>;

std::vector<Pair> pairs_with_common_neighbors(const Graph& g, std::size_t lo, std::size_t hi) {
  std::vector<Pair> out;
  std::vector<std::size_t> count(g.node_count(), 0);
  NodeList touched;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    touched.clear();
    for (NodeId w : g.neighbors(u)) {
      for (NodeId v : g.neighbors(w)) {
        if (v <= u) continue;
        if (count[v]++ == 0) touched.push_back(v);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (NodeId v : touched) {
      if (count[v] >= lo && count[v] <= hi) out.emplace_back(u, v);
      count[v] = 0;
    }
  }
  return out;
}

// Unordered pairs u < v whose hop distance lies in [lo, hi].
std::vector<Pair> pairs_at_distance(const Graph& g, int lo, int hi) {
  std::vector<Pair> out;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    const auto dist = geodesic_distances(g, u);
    for (NodeId v = u + 1; v < g.node_count(); ++v) {
      if (dist[v] >= lo && dist[v] <= hi) out.emplace_back(u, v);
    }
  }
  return out;
}

Pair orient(const Pair& p, Rng& rng) { return rng.index(2) ? Pair{p.second, p.first} : p; }

std::string window(std::size_t lo, std::size_t hi) { return "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]"; }

void check(bool ok, TaskKind kind, const std::string& what) {
  if (!ok) throw GenerationError(to_string(kind) + ": " + what);
}

nlohmann::json opt_node(const std::optional<NodeId>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> opt_get(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string to_string(TaskKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

TaskKind parse_task_kind(const std::string& name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) return static_cast<TaskKind>(i);
  }
  throw InputError("unknown task kind '" + name + "'");
}

TaskSet generate_tasks(const Graph& g, const std::vector<Vec3>& positions, std::uint64_t seed) {
  if (positions.size() != g.node_count()) throw ParameterError("positions do not match graph size");
  Picker picker(seed);
  TaskSet tasks;

  {
    const NodeList hubs = nodes_with_degree(g, kFinDegreeMin, kFinDegreeMax);
    check(!hubs.empty(), TaskKind::FiN, "no hub with degree in " + window(kFinDegreeMin, kFinDegreeMax));
    const NodeId hub = picker.pick<NodeId>(hubs, [](NodeId v) { return NodeList{v}; });
    const auto adj = g.neighbors(hub);
    const NodeId target = picker.pick<NodeId>(NodeList(adj.begin(), adj.end()), [](NodeId v) { return NodeList{v}; });
    TaskSpec t;
    t.kind = TaskKind::FiN;
    t.anchor = hub;
    t.target = target;
    t.target_label = g.label(target);
    tasks.push_back(std::move(t));
  }
  {
    const auto pairs = pairs_with_common_neighbors(g, kFcnCommonMin, kFcnCommonMax);
    check(!pairs.empty(), TaskKind::FCN,
          "no node pair with " + window(kFcnCommonMin, kFcnCommonMax) + " common neighbors");
    const Pair p = orient(picker.pick<Pair>(pairs, [](const Pair& q) { return NodeList{q.first, q.second}; }),
                          picker.rng());
    TaskSpec t;
    t.kind = TaskKind::FCN;
    t.anchor = p.first;
    t.target = p.second;
    t.truth = common_neighbors(g, p.first, p.second);
    tasks.push_back(std::move(t));
  }
  {
    const NodeList hubs = nodes_with_degree(g, kEndDegreeMin, kEndDegreeMax);
    check(!hubs.empty(), TaskKind::END, "no hub with degree in " + window(kEndDegreeMin, kEndDegreeMax));
    const NodeId hub = picker.pick<NodeId>(hubs, [](NodeId v) { return NodeList{v}; });
    TaskSpec t;
    t.kind = TaskKind::END;
    t.anchor = hub;
    t.truth_degree = g.degree(hub);
    tasks.push_back(std::move(t));
  }
  {
    const auto pairs =
        pairs_at_distance(g, static_cast<int>(kFipPathMin) - 1, static_cast<int>(kFipPathMax) - 1);
    check(!pairs.empty(), TaskKind::FiP, "no node pair whose shortest path has " + window(kFipPathMin, kFipPathMax) + " nodes");
    const Pair p = orient(picker.pick<Pair>(pairs, [](const Pair& q) { return NodeList{q.first, q.second}; }),
                          picker.rng());
    TaskSpec so;
    so.kind = TaskKind::SO_OD;
    so.anchor = p.first;
    so.target = p.second;
    so.path = shortest_path(g, p.first, p.second);
    TaskSpec fip = so;
    fip.kind = TaskKind::FiP;
    tasks.push_back(std::move(so));
    tasks.push_back(std::move(fip));
  }
  {
    const auto pairs = pairs_at_distance(g, kFopPathNodes - 1, kFopPathNodes - 1);
    check(!pairs.empty(), TaskKind::FoP, "no shortest path with " + std::to_string(kFopPathNodes) + " nodes");
    const Pair p = orient(
        picker.pick<Pair>(pairs, [&](const Pair& q) { return shortest_path(g, q.first, q.second); }), picker.rng());
    TaskSpec fop;
    fop.kind = TaskKind::FoP;
    fop.path = shortest_path(g, p.first, p.second);
    TaskSpec dd;
    dd.kind = TaskKind::SO_DD;
    dd.anchor = fop.path.back();
    dd.target = fop.path.front();
    TaskSpec dov;
    dov.kind = TaskKind::SO_DO;
    dov.target = fop.path.back();
    tasks.push_back(std::move(fop));
    tasks.push_back(std::move(dd));
    tasks.push_back(std::move(dov));
  }
  return tasks;
}

void validate_tasks(const Graph& g, const TaskSet& tasks) {
  const auto fail = [](const std::string& why) { throw InputError("invalid task set: " + why); };
  if (tasks.size() != kTaskOrder.size()) fail("expected " + std::to_string(kTaskOrder.size()) + " tasks");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].kind != kTaskOrder[i]) fail("task " + std::to_string(i) + " should be " + to_string(kTaskOrder[i]));
  }
  const auto node = [&](const std::optional<NodeId>& v, const char* what) {
    if (!v) fail(std::string(what) + " missing");
    if (!g.contains(*v)) fail(std::string(what) + " is not a node of the scene graph");
    return *v;
  };
  const auto in = [](std::size_t x, std::size_t lo, std::size_t hi) { return x >= lo && x <= hi; };

  const TaskSpec& fin = tasks[0];
  const NodeId fin_hub = node(fin.anchor, "FiN hub");
  const NodeId fin_target = node(fin.target, "FiN target");
  if (!in(g.degree(fin_hub), kFinDegreeMin, kFinDegreeMax)) fail("FiN hub degree out of range");
  if (!g.has_edge(fin_hub, fin_target)) fail("FiN target is not a neighbor of the hub");
  if (fin.target_label != g.label(fin_target)) fail("FiN target label mismatch");

  const TaskSpec& fcn = tasks[1];
  const NodeId a = node(fcn.anchor, "FCN first node");
  const NodeId b = node(fcn.target, "FCN second node");
  if (a == b) fail("FCN pair must be two distinct nodes");
  if (fcn.truth != common_neighbors(g, a, b)) fail("FCN truth set differs from the graph");
  if (!in(fcn.truth.size(), kFcnCommonMin, kFcnCommonMax)) fail("FCN common-neighbor count out of range");

  const TaskSpec& end = tasks[2];
  const NodeId end_hub = node(end.anchor, "END hub");
  if (end.truth_degree != g.degree(end_hub)) fail("END truth degree differs from the graph");
  if (!in(end.truth_degree, kEndDegreeMin, kEndDegreeMax)) fail("END hub degree out of range");

  for (std::size_t i : {3u, 4u}) {
    const TaskSpec& t = tasks[i];
    const NodeId s = node(t.anchor, "path start");
    const NodeId e = node(t.target, "path end");
    if (s == e) fail(to_string(t.kind) + " start and end coincide");
    if (t.path != shortest_path(g, s, e)) fail(to_string(t.kind) + " path is not the canonical shortest path");
    if (!in(t.path.size(), kFipPathMin, kFipPathMax)) fail(to_string(t.kind) + " path length out of range");
  }
  if (tasks[3].anchor != tasks[4].anchor || tasks[3].target != tasks[4].target) fail("SO_OD and FiP must share their pair");

  const TaskSpec& fop = tasks[5];
  if (fop.path.size() != kFopPathNodes) fail("FoP path must have " + std::to_string(kFopPathNodes) + " nodes");
  for (NodeId v : fop.path) {
    if (!g.contains(v)) fail("FoP path node outside the graph");
  }
  if (fop.path != shortest_path(g, fop.path.front(), fop.path.back())) fail("FoP path is not a canonical shortest path");
  if (tasks[6].anchor != fop.path.back() || tasks[6].target != fop.path.front()) fail("SO_DD must point from the FoP end to its start");
  if (tasks[7].anchor.has_value() || tasks[7].target != fop.path.back()) fail("SO_DO must point from the overview to the FoP end");
}

FcnScore score_fcn(const std::vector<NodeId>& selected, const std::vector<NodeId>& truth) {
  const std::set<NodeId> t(truth.begin(), truth.end());
  const std::set<NodeId> s(selected.begin(), selected.end());
  if (t.empty()) throw ParameterError("FCN truth set is empty");
  std::size_t hits = 0;
  for (NodeId v : s) hits += t.count(v);
  const double nt = static_cast<double>(t.size());
  FcnScore out;
  out.correctness_rate = static_cast<double>(hits) / nt;
  out.miss_rate = static_cast<double>(t.size() - hits) / nt;
  out.false_positive_rate = static_cast<double>(s.size() - hits) / static_cast<double>(std::max<std::size_t>(1, s.size()));
  return out;
}

EndScore score_end(long long estimate, std::size_t truth_degree) {
  if (estimate < 0) throw InputError("degree estimate must be non-negative");
  if (truth_degree == 0) throw ParameterError("END truth degree must be at least 1");
  const double truth = static_cast<double>(truth_degree);
  const double diff = static_cast<double>(estimate) - truth;
  return {std::abs(diff) / truth, diff / truth};
}

FipScore score_fip(const std::vector<NodeId>& reported, const Graph& g, const std::vector<NodeId>& truth_path) {
  if (truth_path.size() < 2) throw ParameterError("FiP truth path needs at least two nodes");
  FipScore out;
  if (reported.size() < 2 || reported.front() != truth_path.front() || reported.back() != truth_path.back()) return out;
  for (std::size_t i = 0; i + 1 < reported.size(); ++i) {
    if (!g.contains(reported[i]) || !g.contains(reported[i + 1])) return out;
    if (!g.has_edge(reported[i], reported[i + 1])) return out;
  }
  out.path_correct = true;
  out.path_deviation = static_cast<double>(reported.size() - 1) / static_cast<double>(truth_path.size() - 1);
  return out;
}

double score_so(const Ray& ray, const Vec3& target_position) {
  return angular_deviation(ray.origin, ray.direction, target_position);
}

std::size_t fop_progress(const std::vector<NodeId>& path, std::size_t highlighted, NodeId clicked) {
  if (highlighted < path.size() && path[highlighted] == clicked) return highlighted + 1;
  return highlighted;
}

nlohmann::json ray_to_json(const Ray& r) { return {{"origin", vec_to_json(r.origin)}, {"direction", vec_to_json(r.direction)}}; }

Ray ray_from_json(const nlohmann::json& j) {
  return decode("ray", [&] { return Ray{vec_from_json(j.at("origin")), vec_from_json(j.at("direction"))}; });
}

nlohmann::json task_to_json(const TaskSpec& t) {
  return {{"kind", to_string(t.kind)},
          {"anchor", opt_node(t.anchor)},
          {"target", opt_node(t.target)},
          {"target_label", t.target_label},
          {"path", t.path},
          {"truth", t.truth},
          {"truth_degree", t.truth_degree}};
}

TaskSpec task_from_json(const nlohmann::json& j) {
  return decode("task", [&] {
    TaskSpec t;
    t.kind = parse_task_kind(j.at("kind").get<std::string>());
    t.anchor = opt_get<NodeId>(j, "anchor");
    t.target = opt_get<NodeId>(j, "target");
    t.target_label = j.value("target_label", "");
    t.path = j.value("path", NodeList{});
    t.truth = j.value("truth", NodeList{});
    t.truth_degree = j.value("truth_degree", std::size_t{0});
    return t;
  });
}

nlohmann::json task_public_json(const TaskSpec& t) {
  nlohmann::json j{{"kind", to_string(t.kind)}, {"anchor", opt_node(t.anchor)}};
  switch (t.kind) {
    case TaskKind::FiN:
      j["target_label"] = t.target_label;
      break;
    case TaskKind::FCN:
    case TaskKind::SO_OD:
    case TaskKind::FiP:
      j["target"] = opt_node(t.target);
      break;
    case TaskKind::FoP:
      j["path"] = t.path;
      break;
    case TaskKind::END:
    case TaskKind::SO_DD:
    case TaskKind::SO_DO:
      break;
  }
  return j;
}

nlohmann::json tasks_to_json(const TaskSet& tasks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TaskSpec& t : tasks) arr.push_back(task_to_json(t));
  return {{"tasks", std::move(arr)}};
}

TaskSet tasks_from_json(const nlohmann::json& j) {
  return decode("task set", [&] {
    TaskSet out;
    for (const auto& t : j.at("tasks")) out.push_back(task_from_json(t));
    return out;
  });
}

nlohmann::json result_to_json(const TaskResult& r) {
  return {{"kind", to_string(r.kind)},
          {"completion_time", r.completion_time},
          {"selected_nodes", r.selected_nodes},
          {"reported_estimate", opt(r.reported_estimate)},
          {"reported_path", r.reported_path},
          {"ray", r.ray ? ray_to_json(*r.ray) : nlohmann::json(nullptr)},
          {"correctness_rate", opt(r.correctness_rate)},
          {"miss_rate", opt(r.miss_rate)},
          {"false_positive_rate", opt(r.false_positive_rate)},
          {"judgement_error", opt(r.judgement_error)},
          {"signed_judgement_error", opt(r.signed_judgement_error)},
          {"path_correct", opt(r.path_correct)},
          {"path_deviation", opt(r.path_deviation)},
          {"angle_deviation_degrees", opt(r.angle_deviation_degrees)}};
}

TaskResult result_from_json(const nlohmann::json& j) {
  return decode("task result", [&] {
    TaskResult r;
    r.kind = parse_task_kind(j.at("kind").get<std::string>());
    r.completion_time = j.at("completion_time").get<double>();
    r.selected_nodes = j.value("selected_nodes", NodeList{});
    r.reported_estimate = opt_get<long long>(j, "reported_estimate");
    r.reported_path = j.value("reported_path", NodeList{});
    if (j.contains("ray") && !j.at("ray").is_null()) r.ray = ray_from_json(j.at("ray"));
    r.correctness_rate = opt_get<double>(j, "correctness_rate");
    r.miss_rate = opt_get<double>(j, "miss_rate");
    r.false_positive_rate = opt_get<double>(j, "false_positive_rate");
    r.judgement_error = opt_get<double>(j, "judgement_error");
    r.signed_judgement_error = opt_get<double>(j, "signed_judgement_error");
    r.path_correct = opt_get<bool>(j, "path_correct");
    r.path_deviation = opt_get<double>(j, "path_deviation");
    r.angle_deviation_degrees = opt_get<double>(j, "angle_deviation_degrees");
    return r;
  });
}

}  // namespace egonet
