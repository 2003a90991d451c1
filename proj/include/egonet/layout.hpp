#pragma once

#include <cstdint>
#include <vector>

#include "egonet/graph.hpp"
#include "egonet/rng.hpp"
#include "egonet/vec3.hpp"
#include "json.hpp"

namespace egonet {

/// Spring-electrical layout parameters. Defaults follow the d3-force family
/// that browser graph viewers are built on.
struct LayoutParams {
  double link_distance = 30.0;
  // Scales the per-link strength 1 / min(deg(u), deg(v)).
  double link_strength = 1.0;
  // Negative values repel.
  double repulsion_strength = -30.0;
  double center_strength = 0.01;
  double alpha_start = 1.0;
  double alpha_min = 0.001;
  double alpha_decay = 0.0228;
  double velocity_decay = 0.4;
  int max_iterations = 1000;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const LayoutParams&) const = default;
};

void to_json(nlohmann::json& j, const LayoutParams& p);
void from_json(const nlohmann::json& j, LayoutParams& p);

inline constexpr double kBarnesHutTheta = 0.9;

struct LayoutState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  double alpha = 1.0;
  int iteration = 0;
  // Source of the epsilon jitter that separates coincident nodes.
  Rng jitter{0};
};

LayoutState init_layout(const Graph& g, const LayoutParams& params);

/// One simulation tick: alpha cools toward zero, then link springs, Barnes-Hut
/// repulsion and centering update velocities, which are damped and integrated.
LayoutState layout_step(LayoutState state, const Graph& g, const LayoutParams& params);

/// Runs until alpha < alpha_min or max_iterations, then recentres the
/// positions on their centroid.
std::vector<Vec3> run_layout(const Graph& g, const LayoutParams& params);

/// Velocity increments from many-body repulsion alone, approximated with an
/// octree at opening angle theta. Exposed for accuracy tests.
std::vector<Vec3> barnes_hut_repulsion(const std::vector<Vec3>& positions, double strength, double alpha,
                                       double theta, Rng& jitter);

Vec3 centroid(const std::vector<Vec3>& positions);

}  // namespace egonet
