#pragma once

// Independent reference computations used to check the engine. Nothing here
// calls the library routine it is checking.

#include <cstddef>
#include <vector>

#include "egonet/graph.hpp"
#include "egonet/vec3.hpp"

namespace egonet::oracle {

// Least-squares slope of log P(k) against log k over degrees in [k_min, k_max],
// negated (a k^-3 law gives ~3). P(k) is estimated on logarithmic bins so that
// sparse high-degree counts do not flatten the tail.
double fit_degree_exponent(const Graph& g, std::size_t k_min, std::size_t k_max);

inline constexpr int kInf = 1 << 28;

// All-pairs hop distances by Floyd-Warshall on the edge list.
std::vector<std::vector<int>> floyd_warshall(const Graph& g);

// Double loop over every node testing both edges via the edge list.
std::vector<NodeId> brute_common_neighbors(const Graph& g, NodeId u, NodeId v);

// Smallest angle (radians) between any two points as seen from center.
double min_angular_separation(const std::vector<Vec3>& points, const Vec3& center);

// Optimal assignment cost (Hungarian algorithm) for a square cost matrix.
double min_cost_assignment(const std::vector<std::vector<double>>& cost);

// Exact O(N^2) many-body velocity increments with the d3 charge kernel
// (force ∝ strength * alpha * dx / |dx|^2, |dx|^2 floored at 1).
std::vector<Vec3> exact_repulsion(const std::vector<Vec3>& positions, double strength, double alpha);

// Small random graph: a random spanning tree plus extra random edges.
Graph random_connected_graph(std::size_t n, std::size_t extra_edges, std::uint64_t seed);

}  // namespace egonet::oracle
