#pragma once

#include <json.hpp>

#include <string>

#include "wakeplan/dataset.hpp"
#include "wakeplan/drag.hpp"
#include "wakeplan/flowfield.hpp"
#include "wakeplan/grid.hpp"
#include "wakeplan/metrics.hpp"
#include "wakeplan/mlp.hpp"

// nlohmann/json bindings for the configuration types. Readers fall back to the
// current value for any missing key, so partial config files are allowed.

namespace wakeplan {

using json = nlohmann::json;

namespace detail {
template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}
}  // namespace detail

inline void to_json(json& j, const GridNode& n) { j = json::array({n.ix, n.iy, n.iz}); }
inline void from_json(const json& j, GridNode& n) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("grid node must be a 3-element array");
  n = {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

inline void to_json(json& j, const GridSpec& g) {
  j = {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"extent", g.extent}};
}
inline void from_json(const json& j, GridSpec& g) {
  if (j.contains("n")) {
    const int n = j.at("n").get<int>();
    g.nx = g.ny = g.nz = n;
  }
  detail::read_opt(j, "nx", g.nx);
  detail::read_opt(j, "ny", g.ny);
  detail::read_opt(j, "nz", g.nz);
  detail::read_opt(j, "extent", g.extent);
}

inline void to_json(json& j, const ScenarioParams& s) {
  j = {{"flow_speed", s.flow_speed}, {"flow_angle", s.flow_angle}, {"seed", s.seed}};
}
inline void from_json(const json& j, ScenarioParams& s) {
  detail::read_opt(j, "flow_speed", s.flow_speed);
  detail::read_opt(j, "flow_angle", s.flow_angle);
  detail::read_opt(j, "seed", s.seed);
}

inline void to_json(json& j, const WakeShapeParams& w) {
  j = {{"k_peak", w.k_peak},
       {"core_radius", w.core_radius},
       {"spread_rate", w.spread_rate},
       {"decay_exponent", w.decay_exponent},
       {"decay_length", w.decay_length},
       {"wake_length", w.wake_length},
       {"noise_amplitude", w.noise_amplitude}};
}
inline void from_json(const json& j, WakeShapeParams& w) {
  detail::read_opt(j, "k_peak", w.k_peak);
  detail::read_opt(j, "core_radius", w.core_radius);
  detail::read_opt(j, "spread_rate", w.spread_rate);
  detail::read_opt(j, "decay_exponent", w.decay_exponent);
  detail::read_opt(j, "decay_length", w.decay_length);
  detail::read_opt(j, "wake_length", w.wake_length);
  detail::read_opt(j, "noise_amplitude", w.noise_amplitude);
}

inline void to_json(json& j, const HullModel& h) {
  j = {{"center", h.center},       {"length", h.length},         {"width", h.width},
       {"height", h.height},       {"bay_length", h.bay_length}, {"bay_width", h.bay_width},
       {"bay_height", h.bay_height}, {"heading", h.heading},     {"margin", h.margin}};
}
inline void from_json(const json& j, HullModel& h) {
  detail::read_opt(j, "center", h.center);
  detail::read_opt(j, "length", h.length);
  detail::read_opt(j, "width", h.width);
  detail::read_opt(j, "height", h.height);
  detail::read_opt(j, "bay_length", h.bay_length);
  detail::read_opt(j, "bay_width", h.bay_width);
  detail::read_opt(j, "bay_height", h.bay_height);
  detail::read_opt(j, "heading", h.heading);
  detail::read_opt(j, "margin", h.margin);
}

inline void to_json(json& j, const PlannerConfig& c) {
  j = {{"rho", c.rho},
       {"c_d", c.c_d},
       {"area", c.area},
       {"omega1", c.omega1},
       {"heuristic", std::string(to_string(c.heuristic_mode))},
       {"variant", std::string(to_string(c.variant))}};
}
inline void from_json(const json& j, PlannerConfig& c) {
  detail::read_opt(j, "rho", c.rho);
  detail::read_opt(j, "c_d", c.c_d);
  detail::read_opt(j, "area", c.area);
  detail::read_opt(j, "omega1", c.omega1);
  if (j.contains("heuristic")) c.heuristic_mode = parse_heuristic(j.at("heuristic").get<std::string>());
  if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
}

inline void to_json(json& j, const MetricsConfig& m) { j = {{"epsilon", m.epsilon}}; }
inline void from_json(const json& j, MetricsConfig& m) { detail::read_opt(j, "epsilon", m.epsilon); }

inline void to_json(json& j, const ScenarioGrid& s) {
  j = {{"speeds", s.speeds},
       {"angles", s.angles},
       {"starts_per_field", s.starts_per_field},
       {"seed", s.seed},
       {"start_policy", std::string(to_string(s.start_policy))}};
}
inline void from_json(const json& j, ScenarioGrid& s) {
  detail::read_opt(j, "speeds", s.speeds);
  detail::read_opt(j, "angles", s.angles);
  detail::read_opt(j, "starts_per_field", s.starts_per_field);
  detail::read_opt(j, "seed", s.seed);
  if (j.contains("start_policy")) s.start_policy = parse_start_policy(j.at("start_policy").get<std::string>());
}

inline void to_json(json& j, const TrainConfig& t) {
  j = {{"lr", t.lr},       {"batch_size", t.batch_size}, {"max_epochs", t.max_epochs},
       {"patience", t.patience}, {"beta1", t.beta1},     {"beta2", t.beta2},
       {"eps", t.eps},     {"weight_decay", t.weight_decay}, {"seed", t.seed}};
}
inline void from_json(const json& j, TrainConfig& t) {
  detail::read_opt(j, "lr", t.lr);
  detail::read_opt(j, "batch_size", t.batch_size);
  detail::read_opt(j, "max_epochs", t.max_epochs);
  detail::read_opt(j, "patience", t.patience);
  detail::read_opt(j, "beta1", t.beta1);
  detail::read_opt(j, "beta2", t.beta2);
  detail::read_opt(j, "eps", t.eps);
  detail::read_opt(j, "weight_decay", t.weight_decay);
  detail::read_opt(j, "seed", t.seed);
}

inline void to_json(json& j, const NormStats& n) {
  j = {{"input_mean", n.input_mean},
       {"input_std", n.input_std},
       {"target_mean", n.target_mean},
       {"target_std", n.target_std}};
}
inline void from_json(const json& j, NormStats& n) {
  j.at("input_mean").get_to(n.input_mean);
  j.at("input_std").get_to(n.input_std);
  j.at("target_mean").get_to(n.target_mean);
  j.at("target_std").get_to(n.target_std);
  if (n.target_mean.size() != kOutputDim || n.target_std.size() != kOutputDim)
    throw FormatError("norm stats: target statistics must have 390 entries");
}

inline void to_json(json& j, const CorpusConfig& c) {
  j = {{"grid", c.grid},       {"hull", c.hull_model()}, {"wake", c.wake},
       {"planner", c.planner}, {"metrics", c.metrics},   {"scenarios", c.scenarios},
       {"record_timing", c.record_timing}};
}
inline void from_json(const json& j, CorpusConfig& c) {
  detail::read_opt(j, "grid", c.grid);
  if (j.contains("hull")) c.hull = j.at("hull").get<HullModel>();
  detail::read_opt(j, "wake", c.wake);
  detail::read_opt(j, "planner", c.planner);
  detail::read_opt(j, "metrics", c.metrics);
  detail::read_opt(j, "scenarios", c.scenarios);
  detail::read_opt(j, "record_timing", c.record_timing);
}

}  // namespace wakeplan
