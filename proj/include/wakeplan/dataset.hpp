#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "wakeplan/drag.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/flowfield.hpp"
#include "wakeplan/metrics.hpp"
#include "wakeplan/planner.hpp"
#include "wakeplan/util.hpp"

namespace wakeplan {

inline constexpr std::size_t kMaxWaypoints = 130;
inline constexpr std::size_t kInputDim = 8;
inline constexpr std::size_t kOutputDim = 3 * kMaxWaypoints;

enum class StartPolicy {
  shared,     // one start set reused for every field
  per_field,  // fresh starts drawn for each (speed, angle) field
};

inline std::string_view to_string(StartPolicy p) { return p == StartPolicy::shared ? "shared" : "per_field"; }
inline StartPolicy parse_start_policy(std::string_view s) {
  if (s == "shared") return StartPolicy::shared;
  if (s == "per_field") return StartPolicy::per_field;
  throw ConfigError("unknown start policy: " + std::string(s));
}

struct ScenarioGrid {
  std::vector<double> speeds;
  std::vector<double> angles;
  int starts_per_field = 36;
  std::uint64_t seed = 0;
  StartPolicy start_policy = StartPolicy::shared;

  // 10 speeds x 5 angles x 6 starts: 300 paths per variant.
  static ScenarioGrid desk(std::uint64_t seed = 0) {
    ScenarioGrid g;
    for (int i = 1; i <= 10; ++i) g.speeds.push_back(0.5 * i);
    g.angles = {0.0, 15.0, 30.0, 45.0, 60.0};
    g.starts_per_field = 6;
    g.seed = seed;
    return g;
  }

  // Full sweep: 0.1..5.0 m/s in 0.1 steps, 0..60 degrees in 5 degree steps.
  static ScenarioGrid full_sweep(std::uint64_t seed = 0) {
    ScenarioGrid g;
    for (int i = 1; i <= 50; ++i) g.speeds.push_back(0.1 * i);
    for (int i = 0; i <= 12; ++i) g.angles.push_back(5.0 * i);
    g.starts_per_field = 36;
    g.seed = seed;
    return g;
  }

  std::size_t field_count() const { return speeds.size() * angles.size(); }
  std::size_t path_count() const { return field_count() * static_cast<std::size_t>(starts_per_field); }

  ScenarioParams scenario(std::size_t speed_idx, std::size_t angle_idx) const {
    return {speeds.at(speed_idx), angles.at(angle_idx), util::derive_seed(seed, speed_idx, angle_idx)};
  }

  void validate() const {
    if (speeds.empty() || angles.empty()) throw ConfigError("scenario grid: speeds and angles must be non-empty");
    if (starts_per_field < 1) throw ConfigError("scenario grid: starts_per_field must be >= 1");
    for (double s : speeds)
      for (double a : angles) ScenarioParams{s, a, 0}.validate();
  }
};

inline std::string scenario_id(std::size_t speed_idx, std::size_t angle_idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%02zu_a%02zu", speed_idx, angle_idx);
  return buf;
}

// Uniformly random free node on the rear (max-x) face.
inline GridNode sample_rear_start(const FlowField& field, Rng& rng) {
  const GridSpec& g = field.spec();
  std::vector<GridNode> face;
  face.reserve(static_cast<std::size_t>(g.ny) * static_cast<std::size_t>(g.nz));
  for (int iy = 0; iy < g.ny; ++iy)
    for (int iz = 0; iz < g.nz; ++iz) {
      const GridNode n{g.nx - 1, iy, iz};
      if (!field.occupied(n)) face.push_back(n);
    }
  if (face.empty()) throw GenerationError("sample_rear_start: rear face is fully occupied");
  return face[static_cast<std::size_t>(util::uniform_below(rng, face.size()))];
}

inline GridNode sample_rear_start(const GridSpec& spec, Rng& rng) {
  spec.validate();
  // Same draw as the field overload on an unobstructed face (y major, z minor).
  const auto nz = static_cast<std::uint64_t>(spec.nz);
  const auto k = util::uniform_below(rng, static_cast<std::uint64_t>(spec.ny) * nz);
  return {spec.nx - 1, static_cast<int>(k / nz), static_cast<int>(k % nz)};
}

struct CorpusConfig {
  GridSpec grid = GridSpec::cube(128);
  std::optional<HullModel> hull;  // defaults to HullModel::centered(grid)
  WakeShapeParams wake;
  PlannerConfig planner;
  MetricsConfig metrics;
  ScenarioGrid scenarios = ScenarioGrid::desk();
  bool record_timing = true;
  int jobs = 1;

  HullModel hull_model() const { return hull ? *hull : HullModel::centered(grid); }
};

struct CorpusRecord {
  std::size_t speed_idx = 0;
  std::size_t angle_idx = 0;
  int start_idx = 0;
  ScenarioParams scenario;
  Variant variant = Variant::wake_informed;
  GridNode start;
  GridNode goal;
  bool ok = false;
  std::string failure;
  SearchResult search;
  PathMetrics metrics;

  std::string id() const { return scenario_id(speed_idx, angle_idx); }
};

struct CorpusSummary {
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t overlong = 0;  // successful paths longer than kMaxWaypoints nodes
};

struct Corpus {
  CorpusConfig config;
  std::vector<Variant> variants;
  std::map<Variant, std::vector<CorpusRecord>> records;
  std::map<Variant, CorpusSummary> summary;
};

// Start nodes for one field. Shared starts depend only on the grid seed; the
// hull does not move between fields so the rear face occupancy is fixed.
inline std::vector<GridNode> field_starts(const ScenarioGrid& sg, const FlowField& field, std::size_t speed_idx,
                                          std::size_t angle_idx) {
  Rng rng(sg.start_policy == StartPolicy::shared ? util::derive_seed(sg.seed, 0x5354415254ULL)
                                                 : util::derive_seed(sg.seed, 0x5354415254ULL, speed_idx, angle_idx));
  std::vector<GridNode> starts;
  for (int i = 0; i < sg.starts_per_field; ++i) starts.push_back(sample_rear_start(field, rng));
  return starts;
}

// Plans every start of one (speed, angle) field with each requested variant.
inline std::map<Variant, std::vector<CorpusRecord>> plan_field(const CorpusConfig& cfg,
                                                               const std::vector<Variant>& variants,
                                                               std::size_t speed_idx, std::size_t angle_idx) {
  const HullModel hull = cfg.hull_model();
  const ScenarioParams sc = cfg.scenarios.scenario(speed_idx, angle_idx);
  const FlowField wake = make_wake_field(cfg.grid, sc, hull, cfg.wake);
  const FieldStats stats = field_stats(wake, cfg.planner);
  const GridNode goal = hull.goal_node(cfg.grid);
  const auto starts = field_starts(cfg.scenarios, wake, speed_idx, angle_idx);

  std::map<Variant, std::vector<CorpusRecord>> out;
  for (int si = 0; si < static_cast<int>(starts.size()); ++si) {
    for (Variant v : variants) {
      CorpusRecord rec;
      rec.speed_idx = speed_idx;
      rec.angle_idx = angle_idx;
      rec.start_idx = si;
      rec.scenario = sc;
      rec.variant = v;
      rec.start = starts[static_cast<std::size_t>(si)];
      rec.goal = goal;
      PlannerConfig pc = cfg.planner;
      pc.variant = v;
      try {
        rec.search = astar(wake, rec.start, goal, pc);
        rec.metrics = assess(rec.search.path, wake, stats, pc, cfg.metrics, rec.search.wall_time);
        if (!cfg.record_timing) {
          rec.search.wall_time = 0.0;
          rec.metrics.plan_time = 0.0;
        }
        rec.ok = true;
      } catch (const NoPathError& e) {
        rec.ok = false;
        rec.failure = e.what();
        rec.search.expanded = e.expanded();
      }
      out[v].push_back(std::move(rec));
    }
  }
  return out;
}

inline Corpus generate_corpus(const CorpusConfig& cfg, std::vector<Variant> variants) {
  cfg.grid.validate();
  cfg.scenarios.validate();
  cfg.planner.validate();
  cfg.metrics.validate();
  if (variants.empty()) throw ConfigError("corpus: no planner variant requested");
  std::sort(variants.begin(), variants.end());
  variants.erase(std::unique(variants.begin(), variants.end()), variants.end());

  const std::size_t ns = cfg.scenarios.speeds.size();
  const std::size_t nfields = cfg.scenarios.field_count();
  std::vector<std::map<Variant, std::vector<CorpusRecord>>> per_field(nfields);

  auto work = [&](std::size_t k) { per_field[k] = plan_field(cfg, variants, k % ns, k / ns); };
  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < nfields; ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        try {
          for (std::size_t k; (k = next.fetch_add(1)) < nfields;) work(k);
        } catch (...) {
          errors[static_cast<std::size_t>(j)] = std::current_exception();
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Merge in deterministic order: angle-major, then speed, then start.
  Corpus corpus;
  corpus.config = cfg;
  corpus.variants = variants;
  for (auto& field : per_field)
    for (auto& [v, recs] : field)
      for (auto& r : recs) {
        auto& s = corpus.summary[v];
        ++s.attempted;
        if (r.ok) {
          ++s.succeeded;
          if (r.search.path.size() > kMaxWaypoints) ++s.overlong;
        } else {
          ++s.failed;
        }
        corpus.records[v].push_back(std::move(r));
      }
  return corpus;
}

// ---------------------------------------------------------------------------
// Training samples

struct TrainingSample {
  std::array<double, kInputDim> input{};
  std::vector<double> target = std::vector<double>(kOutputDim, 0.0);
  std::vector<double> mask = std::vector<double>(kOutputDim, 0.0);
  ScenarioParams scenario;
  Variant variant = Variant::wake_informed;
  std::string key;  // scenario id + start index, for matching across methods

  std::size_t waypoint_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1.0)) / 3;
  }
};

// Input: start xyz, goal xyz (meters), flow speed, flow angle.
inline std::array<double, kInputDim> make_input(const Vec3& start, const Vec3& goal, const ScenarioParams& sc) {
  return {start[0], start[1], start[2], goal[0], goal[1], goal[2], sc.flow_speed, sc.flow_angle};
}

inline TrainingSample pad_and_mask(const Path& path, std::string key = {}) {
  if (path.empty()) throw PathError("pad_and_mask: empty path");
  if (path.size() > kMaxWaypoints)
    throw OverlongPathError("pad_and_mask: path has " + std::to_string(path.size()) + " nodes (max 130)");
  TrainingSample s;
  const auto wps = path.waypoints();
  s.input = make_input(wps.front(), wps.back(), path.scenario);
  for (std::size_t i = 0; i < wps.size(); ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      s.target[3 * i + c] = wps[i][c];
      s.mask[3 * i + c] = 1.0;
    }
  s.scenario = path.scenario;
  s.variant = path.variant;
  s.key = std::move(key);
  return s;
}

struct NormStats {
  std::array<double, kInputDim> input_mean{};
  std::array<double, kInputDim> input_std{};
  std::vector<double> target_mean = std::vector<double>(kOutputDim, 0.0);
  std::vector<double> target_std = std::vector<double>(kOutputDim, 1.0);

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// z-score statistics from the training split. Target statistics use unmasked
// entries only; a zero (or undefined) standard deviation is replaced by 1.
inline NormStats compute_norm_stats(const std::vector<TrainingSample>& train) {
  if (train.empty()) throw ConfigError("norm stats: empty training split");
  NormStats st;
  auto guard = [](double sd) { return (sd > 0.0 && std::isfinite(sd)) ? sd : 1.0; };
  std::vector<double> col;
  col.reserve(train.size());
  for (std::size_t j = 0; j < kInputDim; ++j) {
    col.clear();
    for (const auto& s : train) col.push_back(s.input[j]);
    st.input_mean[j] = util::shifted_mean(col);
    st.input_std[j] = guard(util::population_std(col, st.input_mean[j]));
  }
  for (std::size_t j = 0; j < kOutputDim; ++j) {
    col.clear();
    for (const auto& s : train)
      if (s.mask[j] != 0.0) col.push_back(s.target[j]);
    if (col.empty()) {
      st.target_mean[j] = 0.0;
      st.target_std[j] = 1.0;
      continue;
    }
    st.target_mean[j] = util::shifted_mean(col);
    st.target_std[j] = guard(util::population_std(col, st.target_mean[j]));
  }
  return st;
}

inline std::array<double, kInputDim> normalize_input(const std::array<double, kInputDim>& x, const NormStats& st) {
  std::array<double, kInputDim> z{};
  for (std::size_t j = 0; j < kInputDim; ++j) z[j] = (x[j] - st.input_mean[j]) / st.input_std[j];
  return z;
}

inline std::array<double, kInputDim> denormalize_input(const std::array<double, kInputDim>& z, const NormStats& st) {
  std::array<double, kInputDim> x{};
  for (std::size_t j = 0; j < kInputDim; ++j) x[j] = z[j] * st.input_std[j] + st.input_mean[j];
  return x;
}

inline std::vector<double> denormalize_output(std::span<const double> z, const NormStats& st) {
  std::vector<double> y(kOutputDim);
  for (std::size_t j = 0; j < kOutputDim; ++j) y[j] = z[j] * st.target_std[j] + st.target_mean[j];
  return y;
}

// Masked target entries stay exactly zero after normalization.
inline TrainingSample normalize(const TrainingSample& s, const NormStats& st) {
  TrainingSample out = s;
  out.input = normalize_input(s.input, st);
  for (std::size_t j = 0; j < kOutputDim; ++j)
    out.target[j] = s.mask[j] != 0.0 ? (s.target[j] - st.target_mean[j]) / st.target_std[j] : 0.0;
  return out;
}

inline TrainingSample denormalize(const TrainingSample& z, const NormStats& st) {
  TrainingSample out = z;
  out.input = denormalize_input(z.input, st);
  for (std::size_t j = 0; j < kOutputDim; ++j)
    out.target[j] = z.mask[j] != 0.0 ? z.target[j] * st.target_std[j] + st.target_mean[j] : 0.0;
  return out;
}

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Stratified split over (flow speed, flow angle). The global training count is
// round(fraction * N); strata receive floor or ceil of their share by largest
// remainder, ties ordered by a seeded shuffle.
inline Split split_stratified(const std::vector<std::pair<double, double>>& strata_keys, double fraction,
                              std::uint64_t seed) {
  if (strata_keys.empty()) throw ConfigError("split: empty corpus");
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split: fraction must lie in (0, 1)");
  std::map<std::pair<double, double>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < strata_keys.size(); ++i) strata[strata_keys[i]].push_back(i);

  struct Quota {
    std::vector<std::size_t>* members;
    std::size_t base;
    double remainder;
    std::size_t order;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (auto& [key, members] : strata) {
    const double q = fraction * static_cast<double>(members.size());
    const auto base = static_cast<std::size_t>(std::floor(q + 1e-9));
    quotas.push_back({&members, base, q - static_cast<double>(base), 0});
    assigned += base;
  }
  const auto total_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(strata_keys.size())));
  Rng rng(util::derive_seed(seed, 0x53504c4954ULL));
  std::vector<std::size_t> order(quotas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  util::shuffle(order, rng);
  for (std::size_t i = 0; i < order.size(); ++i) quotas[order[i]].order = i;
  std::vector<Quota*> ranked;
  for (auto& q : quotas) ranked.push_back(&q);
  std::sort(ranked.begin(), ranked.end(), [](const Quota* a, const Quota* b) {
    if (a->remainder != b->remainder) return a->remainder > b->remainder;
    return a->order < b->order;
  });
  for (std::size_t i = 0; assigned < total_train && i < ranked.size(); ++i, ++assigned) ++ranked[i]->base;

  Split out;
  std::size_t stratum_no = 0;
  for (auto& q : quotas) {
    std::vector<std::size_t> members = *q.members;
    Rng srng(util::derive_seed(seed, stratum_no++));
    util::shuffle(members, srng);
    out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(q.base));
    out.val.insert(out.val.end(), members.begin() + static_cast<std::ptrdiff_t>(q.base), members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  return out;
}

inline Split split_stratified(const std::vector<TrainingSample>& samples, double fraction, std::uint64_t seed) {
  std::vector<std::pair<double, double>> keys;
  keys.reserve(samples.size());
  for (const auto& s : samples) keys.emplace_back(s.scenario.flow_speed, s.scenario.flow_angle);
  return split_stratified(keys, fraction, seed);
}

inline std::string sample_key(const std::string& scenario, int start_idx) {
  return scenario + "#" + std::to_string(start_idx);
}

// Training samples from successful corpus records; overlong paths are skipped
// with a warning and counted.
inline std::vector<TrainingSample> samples_from_records(const std::vector<CorpusRecord>& recs,
                                                        std::size_t* skipped = nullptr) {
  std::vector<TrainingSample> out;
  std::size_t skip = 0;
  for (const auto& r : recs) {
    if (!r.ok) continue;
    try {
      out.push_back(pad_and_mask(r.search.path, sample_key(r.id(), r.start_idx)));
    } catch (const OverlongPathError& e) {
      std::cerr << "warning: skipping " << r.id() << " start " << r.start_idx << ": " << e.what() << "\n";
      ++skip;
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

}  // namespace wakeplan
