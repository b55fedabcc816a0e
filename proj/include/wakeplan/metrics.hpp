#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "wakeplan/drag.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/flowfield.hpp"
#include "wakeplan/planner.hpp"

namespace wakeplan {

struct MetricsConfig {
  double epsilon = 0.005;  // relative speed change that marks a turbulent transition

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("metrics: epsilon must be positive");
  }
};

struct PathMetrics {
  double energy = 0.0;  // J
  double length = 0.0;  // m
  std::size_t n_high_velocity = 0;
  std::size_t n_turbulent = 0;
  double plan_time = 0.0;  // s
  std::uint64_t eval_field_id = 0;
};

namespace detail {

inline void check_in_field(const Path& path, const FlowField& field) {
  for (const auto& n : path.nodes)
    if (!in_bounds(field.spec(), n)) throw PathError("path node " + to_string(n) + " lies outside the field");
}

inline void check_provenance(const FlowField& field, const FieldStats& stats) {
  if (stats.field_id != field.id())
    throw ProvenanceError("metrics: statistics were computed on a different field");
}

}  // namespace detail

// Nodes whose speed reaches median + one standard deviation (inclusive).
inline std::size_t high_velocity_count(const Path& path, const FlowField& field, const FieldStats& stats) {
  detail::check_provenance(field, stats);
  detail::check_in_field(path, field);
  const double threshold = stats.high_velocity_threshold();
  return static_cast<std::size_t>(std::count_if(path.nodes.begin(), path.nodes.end(),
                                                [&](const GridNode& n) { return field.speed(n) >= threshold; }));
}

// Nodes (after the first) where |v_i - v_{i-1}| / v_{i-1} >= epsilon.
inline std::size_t turbulent_count(const Path& path, const FlowField& field, const MetricsConfig& cfg) {
  cfg.validate();
  detail::check_in_field(path, field);
  constexpr double floor = 1e-12;
  std::size_t count = 0;
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    const double prev = field.speed(path.nodes[i - 1]);
    const double cur = field.speed(path.nodes[i]);
    if (std::abs(cur - prev) / std::max(prev, floor) >= cfg.epsilon) ++count;
  }
  return count;
}

// Sum of F_D(v(n_{i+1})) * d(n_i, n_{i+1}); same destination-node convention as
// the planner's edge cost, without the omega1 weight.
inline double path_energy(const Path& path, const FlowField& field, const PlannerConfig& cfg) {
  detail::check_in_field(path, field);
  for (const auto& n : path.nodes)
    if (field.occupied(n)) throw PathError("path_energy: path crosses occupied node " + to_string(n));
  double e = 0.0;
  const double h = field.spacing();
  for (std::size_t i = 1; i < path.nodes.size(); ++i) {
    if (!are_neighbors(path.nodes[i - 1], path.nodes[i]))
      throw ContractError("path_energy: consecutive nodes are not 26-neighbors");
    e += drag_force(field.speed(path.nodes[i]), cfg) * euclid(path.nodes[i - 1], path.nodes[i], h);
  }
  return e;
}

inline double path_length(const Path& path) {
  double l = 0.0;
  for (std::size_t i = 1; i < path.nodes.size(); ++i) l += euclid(path.nodes[i - 1], path.nodes[i], path.spacing);
  return l;
}

// All four metrics against the wake-bearing evaluation field, whichever planner
// produced the path.
inline PathMetrics assess(const Path& path, const FlowField& wake_field, const FieldStats& wake_stats,
                          const PlannerConfig& planner_cfg, const MetricsConfig& metrics_cfg,
                          double plan_time = 0.0) {
  PathMetrics m;
  m.energy = path_energy(path, wake_field, planner_cfg);
  m.length = path_length(path);
  m.n_high_velocity = high_velocity_count(path, wake_field, wake_stats);
  m.n_turbulent = turbulent_count(path, wake_field, metrics_cfg);
  m.plan_time = plan_time;
  m.eval_field_id = wake_field.id();
  return m;
}

}  // namespace wakeplan
