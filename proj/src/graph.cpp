#include "egonet/graph.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

#include "egonet/errors.hpp"
#include "egonet/rng.hpp"

namespace egonet {

Graph::Graph(std::size_t node_count, std::vector<Edge> edges, std::vector<std::string> labels)
    : edges_(std::move(edges)), adjacency_(node_count), labels_(std::move(labels)) {
  for (const Edge& e : edges_) {
    if (e.u == e.v) throw ParameterError("self-loop on node " + std::to_string(e.u));
    if (e.v >= node_count) throw UnknownNodeError(e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw ParameterError("duplicate edge");
  }
  for (const Edge& e : edges_) {
    adjacency_[e.u].push_back(e.v);
    adjacency_[e.v].push_back(e.u);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

  if (labels_.empty()) {
    labels_.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) labels_.push_back("n" + std::to_string(i));
  }
  if (labels_.size() != node_count) throw ParameterError("label count does not match node count");
  std::vector<std::string> sorted = labels_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ParameterError("duplicate node label");
  }
}

void Graph::require(NodeId v) const {
  if (!contains(v)) throw UnknownNodeError(v);
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  require(v);
  return adjacency_[v];
}

std::size_t Graph::degree(NodeId v) const {
  require(v);
  return adjacency_[v].size();
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (!contains(a) || !contains(b)) return false;
  const auto& adj = adjacency_[a];
  return std::binary_search(adj.begin(), adj.end(), b);
}

const std::string& Graph::label(NodeId v) const {
  require(v);
  return labels_[v];
}

std::optional<NodeId> Graph::find_label(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<NodeId>(it - labels_.begin());
}

bool Graph::is_connected() const {
  if (node_count() == 0) return true;
  const auto dist = geodesic_distances(*this, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d == kUnreachable; });
}

Graph Graph::with_labels(std::vector<std::string> labels) const {
  return Graph(node_count(), edges_, std::move(labels));
}

Graph generate_ba(const GeneratorParams& params) {
  const auto [n, m, seed] = params;
  if (m < 1 || n <= m) {
    throw ParameterError("generate_ba requires n > m >= 1 (got n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(m * (n - m));

  // Every edge endpoint, so a uniform draw is degree-proportional.
  std::vector<NodeId> repeated;
  repeated.reserve(2 * m * (n - m));

  std::vector<NodeId> targets(m);
  for (std::size_t i = 0; i < m; ++i) targets[i] = static_cast<NodeId>(i);

  std::vector<char> chosen(n, 0);
  for (std::size_t source = m; source < n; ++source) {
    const auto s = static_cast<NodeId>(source);
    for (NodeId t : targets) {
      edges.emplace_back(s, t);
      repeated.push_back(t);
      repeated.push_back(s);
    }
    targets.clear();
    while (targets.size() < m) {
      const NodeId pick = repeated[rng.index(repeated.size())];
      if (!chosen[pick]) {
        chosen[pick] = 1;
        targets.push_back(pick);
      }
    }
    for (NodeId t : targets) chosen[t] = 0;
    std::sort(targets.begin(), targets.end());
  }

  return assign_labels(Graph(n, std::move(edges)), seed);
}

Graph assign_labels(const Graph& g, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  if (n > kLabelCapacity) {
    throw CapacityError("label space exhausted: " + std::to_string(n) + " nodes > " + std::to_string(kLabelCapacity));
  }
  // Partial Fisher-Yates over the label index space.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::uint32_t> pool(kLabelCapacity);
  for (std::size_t i = 0; i < kLabelCapacity; ++i) pool[i] = static_cast<std::uint32_t>(i);

  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.index(kLabelCapacity - i);
    std::swap(pool[i], pool[j]);
    const std::uint32_t code = pool[i];
    const std::uint32_t number = code % 99 + 1;
    const std::uint32_t letters = code / 99;
    std::string label;
    label += static_cast<char>('A' + letters / 26);
    label += static_cast<char>('A' + letters % 26);
    label += std::to_string(number);
    labels.push_back(std::move(label));
  }
  return g.with_labels(std::move(labels));
}

std::vector<NodeId> neighbors(const Graph& g, NodeId v) {
  const auto adj = g.neighbors(v);
  return {adj.begin(), adj.end()};
}

std::size_t degree(const Graph& g, NodeId v) { return g.degree(v); }

std::vector<NodeId> common_neighbors(const Graph& g, NodeId u, NodeId v) {
  g.require(u);
  g.require(v);
  if (u == v) throw ParameterError("common_neighbors requires two distinct nodes");
  const auto a = g.neighbors(u);
  const auto b = g.neighbors(v);
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  std::erase_if(out, [&](NodeId w) { return w == u || w == v; });
  return out;
}

std::vector<int> geodesic_distances(const Graph& g, NodeId source) {
  g.require(source);
  std::vector<int> dist(g.node_count(), kUnreachable);
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const NodeId cur = queue.front();
    queue.pop_front();
    for (NodeId w : g.neighbors(cur)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[cur] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::vector<NodeId> shortest_path(const Graph& g, NodeId u, NodeId v) {
  g.require(u);
  g.require(v);
  // Distances to v, then a greedy walk from u taking the smallest id that
  // stays on a shortest path.
  const auto to_target = geodesic_distances(g, v);
  if (to_target[u] == kUnreachable) {
    throw DisconnectedError("no path between " + std::to_string(u) + " and " + std::to_string(v));
  }
  std::vector<NodeId> path{u};
  NodeId cur = u;
  while (cur != v) {
    for (NodeId w : g.neighbors(cur)) {
      if (to_target[w] == to_target[cur] - 1) {
        cur = w;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

int diameter(const Graph& g) {
  int best = 0;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    for (int d : geodesic_distances(g, s)) {
      if (d == kUnreachable) throw DisconnectedError("diameter of a disconnected graph is undefined");
      best = std::max(best, d);
    }
  }
  return best;
}

nlohmann::json graph_to_json(const GraphFile& file) {
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : file.graph.edges()) edges.push_back({e.u, e.v});
  return {
      {"n", file.graph.node_count()},
      {"m", file.provenance.m},
      {"seed", file.provenance.seed},
      {"labels", file.graph.labels()},
      {"edges", std::move(edges)},
  };
}

GraphFile graph_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw InputError("edge entries must be [u, v] pairs");
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    auto labels = j.value("labels", std::vector<std::string>{});
    GeneratorParams provenance{n, j.value("m", std::size_t{0}), j.value("seed", std::uint64_t{0})};
    return {Graph(n, std::move(edges), std::move(labels)), provenance};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed graph JSON: ") + e.what());
  }
}

}  // namespace egonet
