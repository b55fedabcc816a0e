#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "wakeplan/error.hpp"

namespace wakeplan {

enum class HeuristicMode { paper_average, admissible_min, zero };
enum class Variant { current_informed, wake_informed };

inline std::string_view to_string(HeuristicMode m) {
  switch (m) {
    case HeuristicMode::paper_average: return "paper_average";
    case HeuristicMode::admissible_min: return "admissible_min";
    case HeuristicMode::zero: return "zero";
  }
  return "?";
}

inline HeuristicMode parse_heuristic(std::string_view s) {
  if (s == "paper_average") return HeuristicMode::paper_average;
  if (s == "admissible_min") return HeuristicMode::admissible_min;
  if (s == "zero") return HeuristicMode::zero;
  throw ConfigError("unknown heuristic mode: " + std::string(s));
}

inline std::string_view to_string(Variant v) {
  return v == Variant::current_informed ? "current_informed" : "wake_informed";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "current_informed" || s == "current" || s == "ci") return Variant::current_informed;
  if (s == "wake_informed" || s == "wake" || s == "wi") return Variant::wake_informed;
  throw ConfigError("unknown planner variant: " + std::string(s));
}

// Vehicle drag constants (GRAALTech X300 class AUV) and search settings.
struct PlannerConfig {
  double rho = 1025.1627;  // kg/m^3
  double c_d = 0.15;
  double area = 0.051;  // m^2
  double omega1 = 1.0;
  HeuristicMode heuristic_mode = HeuristicMode::paper_average;
  Variant variant = Variant::wake_informed;

  void validate() const {
    if (!(rho > 0.0) || !(area > 0.0) || !(c_d > 0.0) || !(omega1 > 0.0))
      throw ConfigError("planner: rho, c_d, area and omega1 must all be positive");
  }

  // F_D = k v^2 with k = rho C_D A / 2.
  double drag_coefficient() const { return 0.5 * rho * c_d * area; }
};

inline double drag_force(double v, const PlannerConfig& cfg) {
  if (!(v >= 0.0)) throw DomainError("drag_force: speed must be non-negative");
  return 0.5 * cfg.rho * v * v * cfg.c_d * cfg.area;
}

// omega1 * F_D(v): energy per meter of travel through fluid at speed v.
inline double energy_rate(double v, const PlannerConfig& cfg) {
  return cfg.omega1 * drag_force(v, cfg);
}

}  // namespace wakeplan
