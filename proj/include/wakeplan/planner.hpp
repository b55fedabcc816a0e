#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "wakeplan/drag.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/flowfield.hpp"
#include "wakeplan/grid.hpp"
#include "wakeplan/util.hpp"

namespace wakeplan {

struct Path {
  std::vector<GridNode> nodes;
  double spacing = 1.0;
  ScenarioParams scenario;
  Variant variant = Variant::wake_informed;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }

  std::vector<Vec3> waypoints() const {
    std::vector<Vec3> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back({spacing * n.ix, spacing * n.iy, spacing * n.iz});
    return out;
  }
};

struct SearchResult {
  Path path;
  double g_total = 0.0;    // J
  std::size_t expanded = 0;
  double wall_time = 0.0;  // s
};

// A step a -> b between 26-neighbors is allowed when b is free and the move
// does not squeeze between two occupied single-axis sub-steps (corner cutting).
inline bool move_allowed(const FlowField& f, const GridNode& a, const GridNode& b) {
  if (f.occupied(b)) return false;
  const int d[3] = {b.ix - a.ix, b.iy - a.iy, b.iz - a.iz};
  const int axes = (d[0] != 0) + (d[1] != 0) + (d[2] != 0);
  if (axes < 2) return true;
  int blocked = 0;
  if (d[0] != 0 && f.occupied(GridNode{a.ix + d[0], a.iy, a.iz})) ++blocked;
  if (d[1] != 0 && f.occupied(GridNode{a.ix, a.iy + d[1], a.iz})) ++blocked;
  if (d[2] != 0 && f.occupied(GridNode{a.ix, a.iy, a.iz + d[2]})) ++blocked;
  return blocked < 2;
}

// c(n, n') = omega1 * F_D(v(n')) * d(n, n'), drag evaluated at the destination.
inline double edge_cost(const GridNode& from, const GridNode& to, const FlowField& field,
                        const PlannerConfig& cfg) {
  if (!in_bounds(field.spec(), from) || !in_bounds(field.spec(), to))
    throw ContractError("edge_cost: node out of bounds");
  if (!are_neighbors(from, to))
    throw ContractError("edge_cost: " + to_string(from) + " and " + to_string(to) + " are not 26-neighbors");
  if (!move_allowed(field, from, to))
    throw BlockedEdgeError("edge_cost: move into " + to_string(to) + " is blocked");
  return cfg.omega1 * drag_force(field.speed(to), cfg) * euclid(from, to, field.spacing());
}

inline double heuristic(const GridNode& n, const GridNode& goal, const FieldStats& stats,
                        const PlannerConfig& cfg, double spacing) {
  switch (cfg.heuristic_mode) {
    case HeuristicMode::paper_average: return stats.mean_energy_rate * euclid(n, goal, spacing);
    case HeuristicMode::admissible_min: return stats.min_energy_rate * euclid(n, goal, spacing);
    case HeuristicMode::zero: return 0.0;
  }
  return 0.0;
}

// Checks the structural path invariants against a field. Returns an empty
// string when the path is valid, otherwise a description of the first defect.
inline std::string path_defect(const std::vector<GridNode>& nodes, const FlowField& field,
                               bool allow_repeats = false) {
  if (nodes.empty()) return "empty path";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!in_bounds(field.spec(), nodes[i])) return "node " + std::to_string(i) + " out of bounds";
    if (field.occupied(nodes[i])) return "node " + std::to_string(i) + " is occupied";
    if (i > 0 && !are_neighbors(nodes[i - 1], nodes[i]))
      return "nodes " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not neighbors";
  }
  if (!allow_repeats) {
    std::vector<std::size_t> idx;
    idx.reserve(nodes.size());
    for (const auto& n : nodes) idx.push_back(linear_index(field.spec(), n));
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) return "path revisits a node";
  }
  return {};
}

namespace detail {

inline const FlowField& search_field(const FlowField& field, const PlannerConfig& cfg,
                                     std::optional<FlowField>& storage) {
  if (cfg.variant == Variant::wake_informed) return field;
  storage.emplace(strip_wake(field));
  return *storage;
}

inline void check_endpoints(const FlowField& f, const GridNode& start, const GridNode& goal) {
  if (!in_bounds(f.spec(), start) || !in_bounds(f.spec(), goal))
    throw ContractError("planner: start or goal out of bounds");
  if (f.occupied(start)) throw ContractError("planner: start node " + to_string(start) + " is occupied");
  if (f.occupied(goal)) throw ContractError("planner: goal node " + to_string(goal) + " is occupied");
}

struct Move {
  std::ptrdiff_t offset;
  int dx, dy, dz;
  int axes;
  double length;
};

inline std::array<Move, 26> moves(const GridSpec& g) {
  std::array<Move, 26> out{};
  std::size_t k = 0;
  const double h = g.spacing();
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int axes = (dx != 0) + (dy != 0) + (dz != 0);
        out[k++] = {dx + static_cast<std::ptrdiff_t>(g.nx) * (dy + static_cast<std::ptrdiff_t>(g.ny) * dz),
                    dx, dy, dz, axes, h * std::sqrt(static_cast<double>(axes))};
      }
  return out;
}

}  // namespace detail

// A* over the 26-connected grid with f = g + h.
//
// Ties on f are broken by smaller h, then by lexicographic (ix, iy, iz).
// Closed nodes are re-opened only under the paper_average heuristic, which may
// be inconsistent; the other two modes are consistent.
inline SearchResult astar(const FlowField& field, const GridNode& start, const GridNode& goal,
                          const PlannerConfig& cfg) {
  cfg.validate();
  const util::Stopwatch clock;
  std::optional<FlowField> stripped;
  const FlowField& f = detail::search_field(field, cfg, stripped);
  detail::check_endpoints(f, start, goal);

  const GridSpec& g = f.spec();
  const double h_spacing = g.spacing();
  double h_rate = 0.0;
  if (cfg.heuristic_mode != HeuristicMode::zero) {
    const auto rates = energy_rate_summary(f, cfg);
    h_rate = cfg.heuristic_mode == HeuristicMode::paper_average ? rates.mean_rate : rates.min_rate;
  }
  const double k_drag = cfg.drag_coefficient();

  SearchResult result;
  result.path.spacing = h_spacing;
  result.path.scenario = field.scenario();
  result.path.variant = cfg.variant;
  if (start == goal) {
    result.path.nodes = {start};
    result.wall_time = clock.seconds();
    return result;
  }

  const std::size_t n = g.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> gs(n, inf);
  std::vector<std::int32_t> parent(n, -1);
  enum : std::uint8_t { kNew = 0, kOpen = 1, kClosed = 2 };
  std::vector<std::uint8_t> state(n, kNew);
  const bool reopen = cfg.heuristic_mode == HeuristicMode::paper_average;

  struct Entry {
    double f, h, g;
    std::uint32_t lex;
    std::uint32_t idx;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.f != b.f) return a.f > b.f;
      if (a.h != b.h) return a.h > b.h;
      return a.lex > b.lex;
    }
  };
  std::priority_queue<Entry, std::vector<Entry>, Worse> open;
  auto lex_key = [&g](const GridNode& node) {
    return static_cast<std::uint32_t>((node.ix * g.ny + node.iy) * g.nz + node.iz);
  };
  auto h_of = [&](const GridNode& node) { return h_rate * euclid(node, goal, h_spacing); };

  const auto moves = detail::moves(g);
  const auto occ = f.occupancy();
  const auto spd = f.speeds();
  const std::size_t goal_idx = linear_index(g, goal);
  const std::size_t start_idx = linear_index(g, start);
  gs[start_idx] = 0.0;
  state[start_idx] = kOpen;
  {
    const double h0 = h_of(start);
    open.push({h0, h0, 0.0, lex_key(start), static_cast<std::uint32_t>(start_idx)});
  }

  bool found = false;
  while (!open.empty()) {
    const Entry top = open.top();
    open.pop();
    if (top.g > gs[top.idx]) continue;  // stale
    if (state[top.idx] == kClosed) continue;
    if (top.idx == goal_idx) {
      found = true;
      break;
    }
    state[top.idx] = kClosed;
    ++result.expanded;

    const GridNode u = node_at(g, top.idx);
    for (const auto& mv : moves) {
      const int x = u.ix + mv.dx, y = u.iy + mv.dy, z = u.iz + mv.dz;
      if (x < 0 || y < 0 || z < 0 || x >= g.nx || y >= g.ny || z >= g.nz) continue;
      const std::size_t v = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(top.idx) + mv.offset);
      if (occ[v]) continue;
      if (mv.axes >= 2) {
        int blocked = 0;
        const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(top.idx);
        if (mv.dx != 0 && occ[static_cast<std::size_t>(base + mv.dx)]) ++blocked;
        if (mv.dy != 0 && occ[static_cast<std::size_t>(base + mv.dy * static_cast<std::ptrdiff_t>(g.nx))]) ++blocked;
        if (mv.dz != 0 &&
            occ[static_cast<std::size_t>(base + mv.dz * static_cast<std::ptrdiff_t>(g.nx) * g.ny)])
          ++blocked;
        if (blocked >= 2) continue;
      }
      const double sv = spd[v];
      const double cost = cfg.omega1 * (k_drag * sv * sv) * mv.length;
      const double ng = top.g + cost;
      if (!(ng < gs[v])) continue;
      if (state[v] == kClosed && !reopen) continue;
      gs[v] = ng;
      parent[v] = static_cast<std::int32_t>(top.idx);
      state[v] = kOpen;
      const GridNode vn{x, y, z};
      const double hv = h_of(vn);
      open.push({ng + hv, hv, ng, lex_key(vn), static_cast<std::uint32_t>(v)});
    }
  }

  if (!found) {
    throw NoPathError("astar: goal " + to_string(goal) + " unreachable from " + to_string(start),
                      result.expanded);
  }

  std::vector<GridNode> rev;
  for (std::int64_t at = static_cast<std::int64_t>(goal_idx); at >= 0; at = parent[static_cast<std::size_t>(at)]) {
    rev.push_back(node_at(g, static_cast<std::size_t>(at)));
    if (static_cast<std::size_t>(at) == start_idx) break;
  }
  result.path.nodes.assign(rev.rbegin(), rev.rend());
  result.g_total = gs[goal_idx];
  result.wall_time = clock.seconds();
  return result;
}

// Plain Dijkstra over the same graph, written against the public edge
// primitives rather than the A* internals. Used to verify astar.
inline SearchResult dijkstra_oracle(const FlowField& field, const GridNode& start, const GridNode& goal,
                                    const PlannerConfig& cfg) {
  cfg.validate();
  const util::Stopwatch clock;
  std::optional<FlowField> stripped;
  const FlowField& f = detail::search_field(field, cfg, stripped);
  detail::check_endpoints(f, start, goal);
  const GridSpec& g = f.spec();

  SearchResult result;
  result.path.spacing = g.spacing();
  result.path.scenario = field.scenario();
  result.path.variant = cfg.variant;

  std::vector<double> dist(g.size(), std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> prev(g.size(), -1);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const std::size_t s = linear_index(g, start);
  const std::size_t t = linear_index(g, goal);
  dist[s] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    const auto [d, ui] = pq.top();
    pq.pop();
    if (d > dist[ui]) continue;
    if (ui == t) break;
    ++result.expanded;
    const GridNode u = node_at(g, ui);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const GridNode w{u.ix + dx, u.iy + dy, u.iz + dz};
          if (w == u || !in_bounds(g, w) || !move_allowed(f, u, w)) continue;
          const double nd = d + edge_cost(u, w, f, cfg);
          const std::size_t wi = linear_index(g, w);
          if (nd < dist[wi]) {
            dist[wi] = nd;
            prev[wi] = static_cast<std::int64_t>(ui);
            pq.push({nd, wi});
          }
        }
  }
  if (!std::isfinite(dist[t]))
    throw NoPathError("dijkstra: goal " + to_string(goal) + " unreachable from " + to_string(start),
                      result.expanded);
  std::vector<GridNode> rev;
  for (std::int64_t at = static_cast<std::int64_t>(t); at >= 0; at = prev[static_cast<std::size_t>(at)])
    rev.push_back(node_at(g, static_cast<std::size_t>(at)));
  result.path.nodes.assign(rev.rbegin(), rev.rend());
  result.g_total = dist[t];
  result.wall_time = clock.seconds();
  return result;
}

}  // namespace wakeplan
