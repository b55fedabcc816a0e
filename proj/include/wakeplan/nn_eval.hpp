#pragma once

#include <map>
#include <string>
#include <vector>

#include "wakeplan/corpus_io.hpp"
#include "wakeplan/metrics.hpp"
#include "wakeplan/mlp.hpp"
#include "wakeplan/planner.hpp"

// Network predictions scored the same way as planner paths: snapped to the
// grid, checked for validity, then assessed on the wake field.

namespace wakeplan {

struct NnEvaluation {
  std::vector<PathRecord> paths;
  std::vector<MetricsRow> rows;
  std::size_t invalid = 0;
};

// A predicted node sequence is valid when every node is free, consecutive
// nodes are 26-neighbors and no step cuts a corner.
inline std::string nn_path_defect(const std::vector<GridNode>& nodes, const FlowField& field) {
  std::string d = path_defect(nodes, field, true);
  if (!d.empty()) return d;
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!move_allowed(field, nodes[i - 1], nodes[i])) return "step " + std::to_string(i) + " cuts an occupied corner";
  return {};
}

// Re-plans each target (scenario, start) with the network. Targets are planner
// records; only their scenario, start and goal are used.
inline NnEvaluation evaluate_network(const MlpModel& model, const CorpusConfig& cfg,
                                     const std::vector<PathRecord>& targets, bool record_timing = true,
                                     int repeats = 5) {
  const std::string method = method_name(model.variant, true);
  const HullModel hull = cfg.hull_model();
  PlannerConfig pc = cfg.planner;
  pc.variant = model.variant;

  std::map<std::pair<std::size_t, std::size_t>, std::vector<const PathRecord*>> by_field;
  for (const auto& t : targets) by_field[{t.angle_idx, t.speed_idx}].push_back(&t);

  NnEvaluation out;
  for (const auto& [key, recs] : by_field) {
    const ScenarioParams sc = cfg.scenarios.scenario(key.second, key.first);
    const FlowField wake = make_wake_field(cfg.grid, sc, hull, cfg.wake);
    const FieldStats stats = field_stats(wake, pc);
    for (const PathRecord* t : recs) {
      if (t->path.nodes.empty()) throw FormatError("target " + t->key() + " has no start node");
      const GridNode start = t->path.nodes.front();
      const GridNode goal = t->path.nodes.back();
      const Inference inf = infer_path(model, position(cfg.grid, start), position(cfg.grid, goal), sc,
                                       cfg.grid.spacing(), repeats);

      PathRecord p;
      p.scenario_id = t->scenario_id;
      p.speed_idx = t->speed_idx;
      p.angle_idx = t->angle_idx;
      p.start_idx = t->start_idx;
      p.scenario = sc;
      p.method = method;
      p.path.nodes = waypoints_to_nodes(inf.waypoints, start, goal, cfg.grid);
      p.path.spacing = cfg.grid.spacing();
      p.path.scenario = sc;
      p.path.variant = model.variant;
      p.wall_time = record_timing ? inf.wall_time : 0.0;

      MetricsRow r;
      r.scenario_id = p.scenario_id;
      r.method = method;
      r.seed = sc.seed;
      r.start_idx = p.start_idx;
      r.plan_time = p.wall_time;
      if (nn_path_defect(p.path.nodes, wake).empty()) {
        const PathMetrics m = assess(p.path, wake, stats, pc, cfg.metrics, p.wall_time);
        p.g_total = m.energy;
        r.valid = true;
        r.energy = m.energy;
        r.length = m.length;
        r.n_high_velocity = static_cast<double>(m.n_high_velocity);
        r.n_turbulent = static_cast<double>(m.n_turbulent);
      } else {
        p.status = "invalid";
        ++out.invalid;
      }
      out.paths.push_back(std::move(p));
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace wakeplan
