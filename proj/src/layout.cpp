#include "egonet/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "egonet/errors.hpp"

namespace egonet {

namespace {

constexpr double kJitter = 1e-6;
constexpr int kMaxOctreeDepth = 48;

Vec3 jitter_vector(Rng& rng) {
  return {rng.uniform(-0.5, 0.5) * kJitter, rng.uniform(-0.5, 0.5) * kJitter, rng.uniform(-0.5, 0.5) * kJitter};
}

// d3 softening: squared distances below 1 are replaced by their square root.
double soften(double l2) { return l2 < 1.0 ? std::sqrt(l2) : l2; }

class Octree {
 public:
  Octree(const std::vector<Vec3>& points, double strength, double theta)
      : points_(points), strength_(strength), theta_(theta), order_(points.size()) {
    Vec3 lo = points.front();
    Vec3 hi = points.front();
    for (const Vec3& p : points) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    const double width = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1e-9});
    for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
    cells_.reserve(2 * points.size());
    build(lo, width, 0, order_.size(), 0);
  }

  Vec3 accumulate(std::uint32_t target, double alpha, Rng& jitter) const {
    Vec3 dv{};
    visit(0, target, alpha, jitter, dv);
    return dv;
  }

 private:
  struct Cell {
    Vec3 origin{};
    double width = 0.0;
    Vec3 center_of_charge{};
    double charge = 0.0;
    // Squared opening radius (width / theta + offset of the centre of charge
    // from the geometric centre).
    double reach2 = 0.0;
    // Second moment sum of (p - c)(p - c)^T: xx, xy, xz, yy, yz, zz.
    std::array<double, 6> moment{};
    // Third moment sum of q_i q_j q_k, indexed through octupole_index().
    std::array<double, 10> octupole{};
    // Contraction sum q |q|^2.
    Vec3 octupole_trace{};
    std::array<int, 8> children{-1, -1, -1, -1, -1, -1, -1, -1};
    std::size_t begin = 0;  // members order_[begin, end), leaves only
    std::size_t end = 0;
    bool leaf = true;
  };

  // Index triple (any order) to a slot in Cell::octupole.
  static constexpr int octupole_index(int i, int j, int k) {
    constexpr int table[3][3][3] = {{{0, 1, 2}, {1, 3, 4}, {2, 4, 5}},
                                    {{1, 3, 4}, {3, 6, 7}, {4, 7, 8}},
                                    {{2, 4, 5}, {4, 7, 8}, {5, 8, 9}}};
    return table[i][j][k];
  }

  int build(const Vec3& origin, double width, std::size_t begin, std::size_t end, int depth) {
    const int index = static_cast<int>(cells_.size());
    cells_.emplace_back();
    Cell cell;
    cell.origin = origin;
    cell.width = width;
    cell.begin = begin;
    cell.end = end;
    const auto count = static_cast<double>(end - begin);

    Vec3 sum{};
    for (std::size_t i = begin; i < end; ++i) sum += points_[order_[i]];
    cell.center_of_charge = sum / count;
    cell.charge = strength_ * count;
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3 q = points_[order_[i]] - cell.center_of_charge;
      cell.moment[0] += q.x * q.x;
      cell.moment[1] += q.x * q.y;
      cell.moment[2] += q.x * q.z;
      cell.moment[3] += q.y * q.y;
      cell.moment[4] += q.y * q.z;
      cell.moment[5] += q.z * q.z;
      const double c[3] = {q.x, q.y, q.z};
      for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
          for (int d = b; d < 3; ++d) cell.octupole[octupole_index(a, b, d)] += c[a] * c[b] * c[d];
      cell.octupole_trace += q * norm2(q);
    }
    const double half = 0.5 * width;
    const Vec3 mid = origin + Vec3{half, half, half};
    const double reach = width / theta_ + distance(cell.center_of_charge, mid);
    cell.reach2 = reach * reach;

    const Vec3& first = points_[order_[begin]];
    const bool coincident = std::all_of(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                                        order_.begin() + static_cast<std::ptrdiff_t>(end),
                                        [&](auto id) { return points_[id] == first; });
    if (end - begin == 1 || coincident || depth >= kMaxOctreeDepth) {
      cells_[index] = cell;
      return index;
    }

    cell.leaf = false;
    const auto octant = [&](std::uint32_t id) {
      const Vec3& p = points_[id];
      return (p.x >= mid.x ? 1 : 0) | (p.y >= mid.y ? 2 : 0) | (p.z >= mid.z ? 4 : 0);
    };
    // Stable counting sort of the range by octant keeps the build deterministic.
    std::array<std::size_t, 9> bounds{};
    for (std::size_t i = begin; i < end; ++i) ++bounds[octant(order_[i]) + 1];
    for (int o = 0; o < 8; ++o) bounds[o + 1] += bounds[o];
    std::vector<std::uint32_t> sorted(end - begin);
    std::array<std::size_t, 8> cursor{};
    for (int o = 0; o < 8; ++o) cursor[o] = bounds[o];
    for (std::size_t i = begin; i < end; ++i) sorted[cursor[octant(order_[i])]++] = order_[i];
    std::copy(sorted.begin(), sorted.end(), order_.begin() + static_cast<std::ptrdiff_t>(begin));

    for (int o = 0; o < 8; ++o) {
      if (bounds[o] == bounds[o + 1]) continue;
      const Vec3 child_origin = origin + Vec3{(o & 1) ? half : 0.0, (o & 2) ? half : 0.0, (o & 4) ? half : 0.0};
      cell.children[o] = build(child_origin, half, begin + bounds[o], begin + bounds[o + 1], depth + 1);
    }
    cells_[index] = cell;
    return index;
  }

  void visit(int index, std::uint32_t target, double alpha, Rng& jitter, Vec3& dv) const {
    const Cell& cell = cells_[index];
    const Vec3& p = points_[target];
    const Vec3 d = cell.center_of_charge - p;
    const double l2 = norm2(d);

    // Cells holding the target are always opened so a node never feels its own charge.
    const Vec3 rel = p - cell.origin;
    const bool holds_target = rel.x >= 0.0 && rel.y >= 0.0 && rel.z >= 0.0 && rel.x <= cell.width &&
                              rel.y <= cell.width && rel.z <= cell.width;
    if (!holds_target && cell.reach2 < l2) {
      dv += d * (cell.charge * alpha / soften(l2));
      if (l2 >= 1.0) dv += (quadrupole(cell, d, l2) + octupole(cell, d, l2)) * (strength_ * alpha);
      return;
    }
    if (!cell.leaf) {
      for (int child : cell.children) {
        if (child >= 0) visit(child, target, alpha, jitter, dv);
      }
      return;
    }
    for (std::size_t i = cell.begin; i < cell.end; ++i) {
      const std::uint32_t id = order_[i];
      if (id == target) continue;
      Vec3 dj = points_[id] - p;
      if (norm2(dj) == 0.0) dj = jitter_vector(jitter);
      dv += dj * (strength_ * alpha / soften(norm2(dj)));
    }
  }

  // Second-order term of the x/|x|^2 kernel expanded about the centre of
  // charge; the first-order term vanishes there.
  static Vec3 quadrupole(const Cell& cell, const Vec3& x, double r2) {
    const auto& m = cell.moment;
    const Vec3 mx{m[0] * x.x + m[1] * x.y + m[2] * x.z, m[1] * x.x + m[3] * x.y + m[4] * x.z,
                  m[2] * x.x + m[4] * x.y + m[5] * x.z};
    const double trace = m[0] + m[3] + m[5];
    const double r4 = r2 * r2;
    return mx * (-2.0 / r4) + x * (-trace / r4 + 4.0 * dot(x, mx) / (r4 * r2));
  }

  // Third-order term of the same expansion.
  static Vec3 octupole(const Cell& cell, const Vec3& x, double r2) {
    const auto& o = cell.octupole;  // xxx xxy xxz xyy xyz xzz yyy yyz yzz zzz
    const double xx = x.x * x.x, yy = x.y * x.y, zz = x.z * x.z;
    const double xy2 = 2.0 * x.x * x.y, xz2 = 2.0 * x.x * x.z, yz2 = 2.0 * x.y * x.z;
    const Vec3 q{o[0] * xx + o[1] * xy2 + o[2] * xz2 + o[3] * yy + o[4] * yz2 + o[5] * zz,
                 o[1] * xx + o[3] * xy2 + o[4] * xz2 + o[6] * yy + o[7] * yz2 + o[8] * zz,
                 o[2] * xx + o[4] * xy2 + o[5] * xz2 + o[7] * yy + o[8] * yz2 + o[9] * zz};
    const Vec3& t = cell.octupole_trace;
    const double r4 = r2 * r2;
    const double r6 = r4 * r2;
    return t * (-1.0 / r4) + q * (4.0 / r6) + x * (4.0 * dot(t, x) / r6 - 8.0 * dot(q, x) / (r6 * r2));
  }

  const std::vector<Vec3>& points_;
  double strength_;
  double theta_;
  std::vector<std::uint32_t> order_;
  std::vector<Cell> cells_;
};

}  // namespace

void LayoutParams::validate() const {
  if (!(0.0 < alpha_min && alpha_min < alpha_start && alpha_start <= 1.0)) {
    throw ParameterError("layout requires 0 < alpha_min < alpha_start <= 1");
  }
  if (!(0.0 < alpha_decay && alpha_decay < 1.0)) throw ParameterError("layout requires 0 < alpha_decay < 1");
  if (!(0.0 <= velocity_decay && velocity_decay < 1.0)) throw ParameterError("layout requires 0 <= velocity_decay < 1");
  if (max_iterations < 0) throw ParameterError("max_iterations must be non-negative");
}

void to_json(nlohmann::json& j, const LayoutParams& p) {
  j = {
      {"link_distance", p.link_distance},
      {"link_strength", p.link_strength},
      {"repulsion_strength", p.repulsion_strength},
      {"center_strength", p.center_strength},
      {"alpha_start", p.alpha_start},
      {"alpha_min", p.alpha_min},
      {"alpha_decay", p.alpha_decay},
      {"velocity_decay", p.velocity_decay},
      {"max_iterations", p.max_iterations},
      {"seed", p.seed},
  };
}

void from_json(const nlohmann::json& j, LayoutParams& p) {
  const LayoutParams d;
  p.link_distance = j.value("link_distance", d.link_distance);
  p.link_strength = j.value("link_strength", d.link_strength);
  p.repulsion_strength = j.value("repulsion_strength", d.repulsion_strength);
  p.center_strength = j.value("center_strength", d.center_strength);
  p.alpha_start = j.value("alpha_start", d.alpha_start);
  p.alpha_min = j.value("alpha_min", d.alpha_min);
  p.alpha_decay = j.value("alpha_decay", d.alpha_decay);
  p.velocity_decay = j.value("velocity_decay", d.velocity_decay);
  p.max_iterations = j.value("max_iterations", d.max_iterations);
  p.seed = j.value("seed", d.seed);
}

LayoutState init_layout(const Graph& g, const LayoutParams& params) {
  params.validate();
  LayoutState state;
  state.alpha = params.alpha_start;
  state.jitter = Rng(params.seed);
  Rng rng(params.seed ^ 0x5851f42d4c957f2dULL);

  // 3D phyllotaxis: radius grows with the cube root of the index so the
  // initial volume scales with node count.
  constexpr double kInitialRadius = 10.0;
  const double roll = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double yaw = std::numbers::pi * 20.0 / (9.0 + std::sqrt(221.0));
  const std::size_t n = g.node_count();
  state.positions.resize(n);
  state.velocities.assign(n, Vec3{});
  for (std::size_t i = 0; i < n; ++i) {
    const double r = kInitialRadius * std::cbrt(static_cast<double>(i));
    const double a = static_cast<double>(i) * roll;
    const double b = static_cast<double>(i) * yaw;
    const Vec3 base{r * std::cos(a), r * std::sin(a) * std::cos(b), r * std::sin(a) * std::sin(b)};
    state.positions[i] = base + Vec3{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
  }
  return state;
}

std::vector<Vec3> barnes_hut_repulsion(const std::vector<Vec3>& positions, double strength, double alpha,
                                       double theta, Rng& jitter) {
  std::vector<Vec3> dv(positions.size());
  if (positions.size() < 2 || strength == 0.0) return dv;
  const Octree tree(positions, strength, theta);
  for (std::uint32_t i = 0; i < positions.size(); ++i) dv[i] = tree.accumulate(i, alpha, jitter);
  return dv;
}

LayoutState layout_step(LayoutState state, const Graph& g, const LayoutParams& params) {
  auto& pos = state.positions;
  auto& vel = state.velocities;
  state.alpha += (0.0 - state.alpha) * params.alpha_decay;
  const double alpha = state.alpha;

  for (const Edge& e : g.edges()) {
    const double du = static_cast<double>(g.degree(e.u));
    const double dv = static_cast<double>(g.degree(e.v));
    const double strength = params.link_strength / std::min(du, dv);
    const double bias = du / (du + dv);
    Vec3 x = pos[e.v] + vel[e.v] - pos[e.u] - vel[e.u];
    if (norm2(x) == 0.0) x = jitter_vector(state.jitter);
    const double l = norm(x);
    x *= (l - params.link_distance) / l * alpha * strength;
    vel[e.v] -= x * bias;
    vel[e.u] += x * (1.0 - bias);
  }

  const auto repulsion = barnes_hut_repulsion(pos, params.repulsion_strength, alpha, kBarnesHutTheta, state.jitter);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    vel[i] += repulsion[i];
    vel[i] -= pos[i] * (params.center_strength * alpha);
  }

  const double keep = 1.0 - params.velocity_decay;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    vel[i] *= keep;
    pos[i] += vel[i];
  }
  ++state.iteration;
  return state;
}

Vec3 centroid(const std::vector<Vec3>& positions) {
  Vec3 sum{};
  for (const Vec3& p : positions) sum += p;
  return positions.empty() ? sum : sum / static_cast<double>(positions.size());
}

std::vector<Vec3> run_layout(const Graph& g, const LayoutParams& params) {
  LayoutState state = init_layout(g, params);
  while (state.alpha >= params.alpha_min && state.iteration < params.max_iterations) {
    state = layout_step(std::move(state), g, params);
  }
  const Vec3 c = centroid(state.positions);
  for (Vec3& p : state.positions) p -= c;
  return state.positions;
}

}  // namespace egonet
