#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace egonet {

using NodeId = std::uint32_t;

/// Undirected edge, always stored with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  Edge() = default;
  Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

  bool incident_to(NodeId n) const { return u == n || v == n; }
  NodeId other(NodeId n) const { return n == u ? v : u; }

  auto operator<=>(const Edge&) const = default;
};

/// Immutable undirected simple graph over dense node ids 0..N-1.
///
/// Construction validates: ids in range, no self-loops, no duplicate edges,
/// unique labels. Connectivity is *not* required here (layout tests use
/// disconnected toy graphs); generators and scene loading check it with
/// is_connected().
class Graph {
 public:
  Graph() = default;

  // Labels default to "n<id>" when empty.
  Graph(std::size_t node_count, std::vector<Edge> edges, std::vector<std::string> labels = {});

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  // Sorted ascending.
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& labels() const { return labels_; }

  bool contains(NodeId v) const { return v < adjacency_.size(); }
  void require(NodeId v) const;

  // Ascending neighbor ids.
  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const;
  bool has_edge(NodeId a, NodeId b) const;

  const std::string& label(NodeId v) const;
  std::optional<NodeId> find_label(const std::string& label) const;

  bool is_connected() const;

  Graph with_labels(std::vector<std::string> labels) const;

  bool operator==(const Graph& o) const { return edges_ == o.edges_ && labels_ == o.labels_ && node_count() == o.node_count(); }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<std::string> labels_;
};

struct GeneratorParams {
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
};

/// Barabási–Albert preferential attachment. Starts from m isolated seed
/// nodes; the first new node links to all of them, every later node links to
/// m distinct targets drawn uniformly from the degree-weighted multiset of
/// endpoints. Produces exactly m*(n-m) edges. Labels are assigned with the
/// same seed.
Graph generate_ba(const GeneratorParams& params);

/// Unique labels of two uppercase letters and a number 1..99 ("UI46").
Graph assign_labels(const Graph& g, std::uint64_t seed);

inline constexpr std::size_t kLabelCapacity = 26 * 26 * 99;

std::vector<NodeId> neighbors(const Graph& g, NodeId v);
std::size_t degree(const Graph& g, NodeId v);

// Throws ParameterError when u == v.
std::vector<NodeId> common_neighbors(const Graph& g, NodeId u, NodeId v);

inline constexpr int kUnreachable = -1;

/// BFS hop counts from source; kUnreachable for other components.
std::vector<int> geodesic_distances(const Graph& g, NodeId source);

/// Canonical shortest path u..v: the lexicographically smallest node
/// sequence among all shortest paths.
std::vector<NodeId> shortest_path(const Graph& g, NodeId u, NodeId v);

// Throws DisconnectedError on a disconnected graph.
int diameter(const Graph& g);

/// Graph file: {"n", "m", "seed", "labels", "edges"} with (min,max)
/// ordered, sorted edges. "m" and "seed" record how the graph was generated.
struct GraphFile {
  Graph graph;
  GeneratorParams provenance;
};

nlohmann::json graph_to_json(const GraphFile& file);
GraphFile graph_from_json(const nlohmann::json& j);

}  // namespace egonet
