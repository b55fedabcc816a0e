#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wakeplan/drag.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/grid.hpp"
#include "wakeplan/util.hpp"

namespace wakeplan {

struct ScenarioParams {
  double flow_speed = 1.0;  // m/s, freestream current magnitude
  double flow_angle = 0.0;  // degrees, wake deflection about +z
  std::uint64_t seed = 0;

  static constexpr double kMinSpeed = 0.1;
  static constexpr double kMaxSpeed = 5.0;
  static constexpr double kMaxAngle = 60.0;

  void validate() const {
    // Small tolerance so values produced by stepping 0.1 at a time are accepted.
    constexpr double tol = 1e-9;
    if (!(flow_speed >= kMinSpeed - tol && flow_speed <= kMaxSpeed + tol))
      throw ConfigError("scenario: flow_speed must lie in [0.1, 5.0] m/s");
    if (!(flow_angle >= -tol && flow_angle <= kMaxAngle + tol))
      throw ConfigError("scenario: flow_angle must lie in [0, 60] degrees");
  }

  friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

// Shape of the synthetic propeller jet behind the hull stern.
//
// excess(s, r) = (k_peak - 1) * (1 + s/decay_length)^(-decay_exponent)
//                * exp(-r^2 / (2 w(s)^2)) * taper(s),   w(s) = core_radius + spread_rate*s
//
// where s is the distance downstream of the stern along the wake axis and r the
// radial distance from that axis. taper() is 1 up to 80% of wake_length and
// falls smoothly to 0 at wake_length; beyond it the field is pure freestream.
struct WakeShapeParams {
  double k_peak = 2.0;
  double core_radius = 4.0;   // m
  double spread_rate = 0.05;  // m of radius per m downstream
  double decay_exponent = 0.7;
  double decay_length = 10.0;  // m
  double wake_length = 60.0;   // m
  // Relative per-node fluctuation inside the wake, drawn from the scenario seed.
  // Only ever reduces the excess, so the k_peak bound holds.
  double noise_amplitude = 0.0;

  void validate() const {
    if (!(k_peak >= 1.0)) throw ConfigError("wake: k_peak must be >= 1");
    if (!(core_radius > 0.0) || !(spread_rate >= 0.0) || !(decay_exponent >= 0.0) ||
        !(decay_length > 0.0) || !(wake_length > 0.0))
      throw ConfigError("wake: shape parameters out of range");
    if (!(noise_amplitude >= 0.0 && noise_amplitude <= 1.0))
      throw ConfigError("wake: noise_amplitude must lie in [0, 1]");
  }

  double excess(double s, double r2) const {
    if (s <= 0.0 || s >= wake_length) return 0.0;
    const double w = core_radius + spread_rate * s;
    const double decay = std::pow(1.0 + s / decay_length, -decay_exponent);
    const double taper_start = 0.8 * wake_length;
    double taper = 1.0;
    if (s > taper_start)
      taper = 0.5 * (1.0 + std::cos(std::numbers::pi * (s - taper_start) / (wake_length - taper_start)));
    return (k_peak - 1.0) * decay * taper * std::exp(-r2 / (2.0 * w * w));
  }
};

// Box model of the lead vehicle with a payload bay open from below.
//
// Local frame: origin at `center`, +x toward the stern, +z up. `heading`
// rotates the local frame about +z. Nodes are rasterized with a margin (half a
// cell by default) so a hull thinner than one cell stays watertight; the bay
// void is extended down through that margin to keep its opening clear.
struct HullModel {
  Vec3 center{77.5, 77.5, 77.5};
  double length = 22.0;
  double width = 2.2;
  double height = 2.7;
  double bay_length = 5.5;
  double bay_width = 1.5;
  double bay_height = 2.2;
  double heading = 0.0;  // degrees
  double margin = -1.0;  // m; negative selects half the grid spacing

  // Default hull placed at the grid node closest to the domain center.
  static HullModel centered(const GridSpec& g) {
    HullModel h;
    const double s = g.spacing();
    h.center = {s * ((g.nx - 1) / 2), s * ((g.ny - 1) / 2), s * ((g.nz - 1) / 2)};
    return h;
  }

  void validate() const {
    if (!(length > 0 && width > 0 && height > 0 && bay_length > 0 && bay_width > 0 && bay_height > 0))
      throw ConfigError("hull: dimensions must be positive");
    if (!(bay_length < length && bay_width < width && bay_height < height))
      throw ConfigError("hull: bay must be strictly smaller than the hull on every axis");
  }

  double effective_margin(const GridSpec& g) const { return margin < 0.0 ? 0.5 * g.spacing() : margin; }

  Vec3 to_local(const Vec3& p) const {
    const double a = heading * std::numbers::pi / 180.0;
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    return {std::cos(a) * dx + std::sin(a) * dy, -std::sin(a) * dx + std::cos(a) * dy, p[2] - center[2]};
  }

  Vec3 to_world(const Vec3& l) const {
    const double a = heading * std::numbers::pi / 180.0;
    return {center[0] + std::cos(a) * l[0] - std::sin(a) * l[1],
            center[1] + std::sin(a) * l[0] + std::cos(a) * l[1], center[2] + l[2]};
  }

  bool in_hull_box(const Vec3& l, double m) const {
    return std::abs(l[0]) <= 0.5 * length + m && std::abs(l[1]) <= 0.5 * width + m &&
           std::abs(l[2]) <= 0.5 * height + m;
  }

  bool in_bay_void(const Vec3& l, double m) const {
    const double bottom = -0.5 * height;
    return std::abs(l[0]) <= 0.5 * bay_length && std::abs(l[1]) <= 0.5 * bay_width &&
           l[2] >= bottom - m && l[2] <= bottom + bay_height;
  }

  // One-cell layer directly beneath the bay opening.
  bool in_bay_shell(const Vec3& l, double m, double spacing) const {
    const double opening = -0.5 * height - m;
    return std::abs(l[0]) <= 0.5 * bay_length && std::abs(l[1]) <= 0.5 * bay_width &&
           l[2] < opening && l[2] >= opening - spacing;
  }

  bool occupies(const GridSpec& g, const GridNode& n) const {
    const Vec3 l = to_local(position(g, n));
    const double m = effective_margin(g);
    return in_hull_box(l, m) && !in_bay_void(l, m);
  }

  Vec3 bay_center() const { return to_world({0.0, 0.0, -0.5 * height + 0.5 * bay_height}); }
  Vec3 stern() const { return to_world({0.5 * length, 0.0, 0.0}); }

  GridNode goal_node(const GridSpec& g) const {
    const GridNode n = nearest_node(g, bay_center());
    if (occupies(g, n)) throw GeometryError("hull: payload bay center does not fall on a free node");
    return n;
  }

  // Hull (plus rasterization margin) must sit at least one node inside the domain.
  void check_fits(const GridSpec& g) const {
    const double m = effective_margin(g);
    const double hx = 0.5 * length + m;
    const double hy = 0.5 * width + m;
    const double hz = 0.5 * height + m;
    const double lo = g.spacing();
    const double hi = g.extent - g.spacing();
    for (double sx : {-1.0, 1.0})
      for (double sy : {-1.0, 1.0})
        for (double sz : {-1.0, 1.0}) {
          const Vec3 p = to_world({sx * hx, sy * hy, sz * hz});
          for (double c : p)
            if (c < lo || c > hi) throw GeometryError("hull: does not fit inside the domain with a one-node margin");
        }
  }
};

// Scalar fluid-speed field on the grid plus obstacle occupancy. Immutable.
class FlowField {
 public:
  FlowField(GridSpec spec, ScenarioParams scenario, std::vector<double> speed,
            std::vector<std::uint8_t> occupied)
      : spec_(spec), scenario_(scenario), speed_(std::move(speed)), occupied_(std::move(occupied)) {
    spec_.validate();
    if (speed_.size() != spec_.size() || occupied_.size() != spec_.size())
      throw ConfigError("field: speed/occupancy arrays must have nx*ny*nz entries");
    for (double v : speed_)
      if (!std::isfinite(v) || v < 0.0) throw ConfigError("field: speeds must be finite and non-negative");
    for (auto o : occupied_)
      if (o > 1) throw ConfigError("field: occupancy flags must be 0 or 1");
    const std::string_view sv(reinterpret_cast<const char*>(speed_.data()), speed_.size() * sizeof(double));
    const std::string_view ov(reinterpret_cast<const char*>(occupied_.data()), occupied_.size());
    id_ = util::derive_seed(std::hash<std::string_view>{}(sv), std::hash<std::string_view>{}(ov),
                            static_cast<std::uint64_t>(spec_.nx));
  }

  const GridSpec& spec() const { return spec_; }
  const ScenarioParams& scenario() const { return scenario_; }
  double spacing() const { return spec_.spacing(); }

  double speed(std::size_t idx) const { return speed_[idx]; }
  double speed(const GridNode& n) const { return speed_[linear_index(spec_, n)]; }
  bool occupied(std::size_t idx) const { return occupied_[idx] != 0; }
  bool occupied(const GridNode& n) const { return occupied_[linear_index(spec_, n)] != 0; }

  std::span<const double> speeds() const { return speed_; }
  std::span<const std::uint8_t> occupancy() const { return occupied_; }

  // Content fingerprint used to tie statistics to the field they came from.
  std::uint64_t id() const { return id_; }

  friend bool operator==(const FlowField& a, const FlowField& b) {
    return a.spec_ == b.spec_ && a.scenario_ == b.scenario_ && a.occupied_ == b.occupied_ &&
           a.speed_.size() == b.speed_.size() &&
           std::memcmp(a.speed_.data(), b.speed_.data(), a.speed_.size() * sizeof(double)) == 0;
  }

 private:
  GridSpec spec_;
  ScenarioParams scenario_;
  std::vector<double> speed_;
  std::vector<std::uint8_t> occupied_;
  std::uint64_t id_ = 0;
};

struct FieldStats {
  double median_speed = 0.0;
  double std_speed = 0.0;
  double mean_speed = 0.0;
  double min_speed = 0.0;
  double max_speed = 0.0;
  double mean_energy_rate = 0.0;  // N, mean of omega1*F_D over free nodes
  double min_energy_rate = 0.0;   // N
  std::size_t free_nodes = 0;
  std::uint64_t field_id = 0;

  double high_velocity_threshold() const { return median_speed + std_speed; }
};

inline FlowField make_uniform_field(const GridSpec& spec, const ScenarioParams& scenario) {
  spec.validate();
  scenario.validate();
  return FlowField(spec, scenario, std::vector<double>(spec.size(), scenario.flow_speed),
                   std::vector<std::uint8_t>(spec.size(), 0));
}

inline FlowField make_wake_field(const GridSpec& spec, const ScenarioParams& scenario, const HullModel& hull,
                                 const WakeShapeParams& wake = {}) {
  spec.validate();
  scenario.validate();
  hull.validate();
  wake.validate();
  hull.check_fits(spec);

  const double h = spec.spacing();
  const double m = hull.effective_margin(spec);
  const Vec3 stern = hull.stern();
  const double axis_angle = (hull.heading + scenario.flow_angle) * std::numbers::pi / 180.0;
  const Vec3 axis{std::cos(axis_angle), std::sin(axis_angle), 0.0};
  const double u = scenario.flow_speed;

  Rng rng(util::derive_seed(scenario.seed, 0x77616b65ULL));
  std::vector<double> speed(spec.size());
  std::vector<std::uint8_t> occupied(spec.size(), 0);
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    const GridNode n = node_at(spec, idx);
    const Vec3 p = position(spec, n);
    const Vec3 l = hull.to_local(p);
    // Noise is drawn for every node so the stream does not depend on geometry.
    const double noise = wake.noise_amplitude > 0.0 ? util::uniform01(rng) : 0.0;
    if (hull.in_hull_box(l, m) && !hull.in_bay_void(l, m)) {
      occupied[idx] = 1;
      speed[idx] = 0.0;
      continue;
    }
    if (hull.in_bay_shell(l, m, h)) {
      speed[idx] = 0.5 * u;
      continue;
    }
    const Vec3 d{p[0] - stern[0], p[1] - stern[1], p[2] - stern[2]};
    const double s = d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2];
    const double r2 = std::max(0.0, d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - s * s);
    const double ex = wake.excess(s, r2) * (1.0 - wake.noise_amplitude * noise);
    speed[idx] = u * (1.0 + ex);
  }
  return FlowField(spec, scenario, std::move(speed), std::move(occupied));
}

// Independent uniform speeds in [v_lo, v_hi] and Bernoulli(occupancy) obstacles.
// Used for search testing and the bundled demo field, not for corpora.
inline FlowField make_random_field(const GridSpec& spec, std::uint64_t seed, double occupancy = 0.1,
                                   double v_lo = 0.1, double v_hi = 5.0) {
  spec.validate();
  if (!(occupancy >= 0.0 && occupancy < 1.0)) throw ConfigError("random field: occupancy must lie in [0, 1)");
  if (!(v_lo >= 0.0 && v_hi >= v_lo)) throw ConfigError("random field: bad speed range");
  Rng rng(util::derive_seed(seed, 0x72616e64ULL));
  std::vector<double> speed(spec.size());
  std::vector<std::uint8_t> occupied(spec.size(), 0);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double v = v_lo + (v_hi - v_lo) * util::uniform01(rng);
    occupied[i] = util::uniform01(rng) < occupancy ? 1 : 0;
    speed[i] = occupied[i] ? 0.0 : v;
  }
  return FlowField(spec, ScenarioParams{0.5 * (v_lo + v_hi), 0.0, seed}, std::move(speed), std::move(occupied));
}

// Replaces every free node's speed with the freestream speed, keeping occupancy.
inline FlowField strip_wake(const FlowField& field) {
  std::vector<double> speed(field.speeds().begin(), field.speeds().end());
  std::vector<std::uint8_t> occ(field.occupancy().begin(), field.occupancy().end());
  const double u = field.scenario().flow_speed;
  for (std::size_t i = 0; i < speed.size(); ++i)
    if (!occ[i]) speed[i] = u;
  return FlowField(field.spec(), field.scenario(), std::move(speed), std::move(occ));
}

struct EnergyRateSummary {
  double mean_rate = 0.0;
  double min_rate = 0.0;
  std::size_t free_nodes = 0;
};

// Mean and minimum of omega1*F_D(v) over free nodes.
inline EnergyRateSummary energy_rate_summary(const FlowField& field, const PlannerConfig& cfg) {
  EnergyRateSummary out;
  double first = 0.0;
  double acc = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < field.spec().size(); ++i) {
    if (field.occupied(i)) continue;
    const double r = energy_rate(field.speed(i), cfg);
    if (out.free_nodes == 0) first = r;
    acc += r - first;
    mn = std::min(mn, r);
    ++out.free_nodes;
  }
  if (out.free_nodes == 0) throw EmptyFieldError("field: every node is occupied");
  out.mean_rate = first + acc / static_cast<double>(out.free_nodes);
  out.min_rate = mn;
  return out;
}

// Statistics over free (non-occupied) nodes; the standard deviation is the
// population one.
inline FieldStats field_stats(const FlowField& field, const PlannerConfig& cfg) {
  cfg.validate();
  std::vector<double> free;
  free.reserve(field.spec().size());
  for (std::size_t i = 0; i < field.spec().size(); ++i)
    if (!field.occupied(i)) free.push_back(field.speed(i));
  if (free.empty()) throw EmptyFieldError("field: every node is occupied");

  FieldStats st;
  st.free_nodes = free.size();
  st.mean_speed = util::shifted_mean(free);
  st.std_speed = util::population_std(free, st.mean_speed);
  const auto [mn, mx] = std::minmax_element(free.begin(), free.end());
  st.min_speed = *mn;
  st.max_speed = *mx;
  st.median_speed = util::median(std::move(free));
  const auto rates = energy_rate_summary(field, cfg);
  st.mean_energy_rate = rates.mean_rate;
  st.min_energy_rate = rates.min_rate;
  st.field_id = field.id();
  return st;
}

}  // namespace wakeplan
