#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iterator>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wakeplan/corpus_io.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/util.hpp"

namespace wakeplan {

struct SpeedBucket {
  const char* label;
  double lo;
  double hi;
};

// Speed ranges used by the comparison tables. The first bucket is closed,
// the others are (lo, hi], so together they partition [0.1, 5.0].
inline constexpr std::array<SpeedBucket, 6> kSpeedBuckets{{{"0.1-0.5", 0.1, 0.5},
                                                           {"0.5-1.0", 0.5, 1.0},
                                                           {"1.0-2.0", 1.0, 2.0},
                                                           {"2.0-3.0", 2.0, 3.0},
                                                           {"3.0-4.0", 3.0, 4.0},
                                                           {"4.0-5.0", 4.0, 5.0}}};

inline std::size_t bucket_of(double speed) {
  constexpr double tol = 1e-9;
  if (speed < kSpeedBuckets.front().lo - tol || speed > kSpeedBuckets.back().hi + tol)
    throw DomainError("speed " + std::to_string(speed) + " outside the bucketed range [0.1, 5.0]");
  for (std::size_t b = 0; b < kSpeedBuckets.size(); ++b)
    if (speed <= kSpeedBuckets[b].hi + tol) return b;
  return kSpeedBuckets.size() - 1;
}

struct MethodData {
  std::string method;
  json manifest;
  std::vector<MetricsRow> rows;
};

inline MethodData load_method(const std::filesystem::path& dir) {
  MethodData m;
  m.manifest = read_json_file(dir / "manifest.json");
  m.method = m.manifest.value("method", dir.filename().string());
  m.rows = read_metrics_csv(dir / "metrics.csv");
  return m;
}

// (speed index, angle index) from an "sXX_aYY" scenario id.
inline std::pair<std::size_t, std::size_t> parse_scenario_id(const std::string& id) {
  std::size_t s = 0, a = 0;
  if (std::sscanf(id.c_str(), "s%zu_a%zu", &s, &a) != 2) throw FormatError("bad scenario id: " + id);
  return {s, a};
}

struct Cell {
  std::size_t n = 0;
  double mean = std::nan("");
  double std = std::nan("");
};

struct ComparisonRow {
  std::string metric;
  std::string bucket;
  std::vector<Cell> cells;  // one per method, in ComparisonTables::methods order
  int winner = -1;          // index of the lowest mean, -1 when no method has data
};

struct InvalidityRow {
  std::string method;
  std::size_t total = 0;
  std::size_t invalid = 0;
  double rate() const { return total ? static_cast<double>(invalid) / static_cast<double>(total) : 0.0; }
};

struct ComparisonTables {
  std::vector<std::string> methods;
  std::vector<ComparisonRow> rows;
  std::vector<InvalidityRow> invalidity;
  std::size_t common_paths = 0;
};

inline const std::array<const char*, 5> kComparedMetrics{"E_J", "L_m", "n_highvel", "n_turb", "t_s"};

inline double metric_value(const MetricsRow& r, std::size_t metric) {
  switch (metric) {
    case 0: return r.energy;
    case 1: return r.length;
    case 2: return r.n_high_velocity;
    case 3: return r.n_turbulent;
    default: return r.plan_time;
  }
}

namespace detail {
inline const json& scenario_grid_json(const MethodData& m) {
  if (!m.manifest.contains("config")) throw ComparabilityError(m.method + ": manifest has no generating config");
  return m.manifest.at("config");
}

inline void check_comparable(const std::vector<MethodData>& methods) {
  if (methods.empty()) throw ComparabilityError("bench: no methods given");
  const json& ref = scenario_grid_json(methods.front());
  for (const auto& m : methods) {
    const json& c = scenario_grid_json(m);
    for (const char* key : {"grid", "scenarios", "hull", "wake"})
      if (c.value(key, json()) != ref.value(key, json()))
        throw ComparabilityError("bench: " + m.method + " was generated on a different " + key + " than " +
                                 methods.front().method);
  }
}

inline bool is_planner(const std::string& method) { return method.find("astar") != std::string::npos; }
}  // namespace detail

// Four-way (or n-way) comparison on the set of paths present in every method.
// Planner corpora must cover identical path sets; network outputs may cover a
// subset (e.g. a validation split). E, L and the counts use valid paths only;
// the time column uses every path.
inline ComparisonTables run_comparison(const std::vector<MethodData>& methods) {
  detail::check_comparable(methods);
  std::vector<std::set<std::string>> keys;
  for (const auto& m : methods) {
    std::set<std::string> k;
    for (const auto& r : m.rows) k.insert(r.key());
    keys.push_back(std::move(k));
  }
  const std::set<std::string>* planner_keys = nullptr;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (!detail::is_planner(methods[i].method)) continue;
    if (planner_keys && *planner_keys != keys[i])
      throw ComparabilityError("bench: planner corpora cover different start sets");
    planner_keys = &keys[i];
  }
  std::set<std::string> common = keys.front();
  for (const auto& k : keys) {
    std::set<std::string> next;
    std::set_intersection(common.begin(), common.end(), k.begin(), k.end(), std::inserter(next, next.end()));
    common = std::move(next);
  }
  if (common.empty()) throw ComparabilityError("bench: methods share no paths");

  const auto speeds = detail::scenario_grid_json(methods.front()).at("scenarios").at("speeds").get<std::vector<double>>();

  ComparisonTables t;
  t.common_paths = common.size();
  for (const auto& m : methods) t.methods.push_back(m.method);

  // values[metric][bucket][method]
  std::vector<std::vector<std::vector<std::vector<double>>>> values(
      kComparedMetrics.size(),
      std::vector<std::vector<std::vector<double>>>(kSpeedBuckets.size(), std::vector<std::vector<double>>(methods.size())));
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    InvalidityRow inv{methods[mi].method, 0, 0};
    for (const auto& r : methods[mi].rows) {
      if (!common.count(r.key())) continue;
      ++inv.total;
      const std::size_t b = bucket_of(speeds.at(parse_scenario_id(r.scenario_id).first));
      values[4][b][mi].push_back(r.plan_time);
      if (!r.valid) {
        ++inv.invalid;
        continue;
      }
      for (std::size_t k = 0; k < 4; ++k) values[k][b][mi].push_back(metric_value(r, k));
    }
    t.invalidity.push_back(inv);
  }
  for (std::size_t k = 0; k < kComparedMetrics.size(); ++k)
    for (std::size_t b = 0; b < kSpeedBuckets.size(); ++b) {
      ComparisonRow row;
      row.metric = kComparedMetrics[k];
      row.bucket = kSpeedBuckets[b].label;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const auto& v = values[k][b][mi];
        Cell c;
        c.n = v.size();
        if (!v.empty()) {
          c.mean = util::shifted_mean(v);
          c.std = util::population_std(v, c.mean);
          if (c.mean < best) {
            best = c.mean;
            row.winner = static_cast<int>(mi);
          }
        }
        row.cells.push_back(c);
      }
      t.rows.push_back(std::move(row));
    }
  return t;
}

inline std::string comparison_csv(const ComparisonTables& t) {
  std::string out = "metric,bucket,method,n,mean,std,winner\n";
  for (const auto& r : t.rows)
    for (std::size_t mi = 0; mi < t.methods.size(); ++mi) {
      const Cell& c = r.cells[mi];
      out += r.metric + "," + r.bucket + "," + t.methods[mi] + "," + std::to_string(c.n) + "," +
             detail::fmt_double(c.mean) + "," + detail::fmt_double(c.std) + "," +
             (r.winner == static_cast<int>(mi) ? "1" : "0") + "\n";
    }
  return out;
}

inline std::string comparison_markdown(const ComparisonTables& t) {
  std::string out;
  char buf[96];
  for (const char* metric : kComparedMetrics) {
    out += std::string("### ") + metric + "\n\n| Range [m/s] |";
    for (const auto& m : t.methods) out += " " + m + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < t.methods.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& r : t.rows) {
      if (r.metric != metric) continue;
      out += "| " + r.bucket + " |";
      for (std::size_t mi = 0; mi < r.cells.size(); ++mi) {
        const Cell& c = r.cells[mi];
        if (c.n == 0) {
          out += " - |";
          continue;
        }
        std::snprintf(buf, sizeof buf, "%.6g ± %.6g", c.mean, c.std);
        out += r.winner == static_cast<int>(mi) ? std::string(" **") + buf + "** |" : std::string(" ") + buf + " |";
      }
      out += "\n";
    }
    out += "\n";
  }
  out += "### Invalid paths\n\n| Method | Paths | Invalid | Rate |\n|---|---|---|---|\n";
  for (const auto& inv : t.invalidity) {
    std::snprintf(buf, sizeof buf, "%.4f", inv.rate());
    out += "| " + inv.method + " | " + std::to_string(inv.total) + " | " + std::to_string(inv.invalid) + " | " + buf +
           " |\n";
  }
  return out;
}

struct DistributionCell {
  std::string method;
  double speed = 0.0;
  double angle = 0.0;
  std::size_t count = 0;  // valid paths in the cell
  double std_energy = std::nan("");
  double median_length = std::nan("");
  double median_high_velocity = std::nan("");
};

// Per-(speed, angle) statistics for heatmaps. Cells with fewer than two valid
// paths are left empty (NaN).
inline std::vector<DistributionCell> distribution_data(const MethodData& m) {
  const json& cfg = detail::scenario_grid_json(m);
  const auto speeds = cfg.at("scenarios").at("speeds").get<std::vector<double>>();
  const auto angles = cfg.at("scenarios").at("angles").get<std::vector<double>>();
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const MetricsRow*>> cells;
  for (const auto& r : m.rows)
    if (r.valid) cells[parse_scenario_id(r.scenario_id)].push_back(&r);
  std::vector<DistributionCell> out;
  for (const auto& [key, rows] : cells) {
    DistributionCell c;
    c.method = m.method;
    c.speed = speeds.at(key.first);
    c.angle = angles.at(key.second);
    c.count = rows.size();
    if (rows.size() >= 2) {
      std::vector<double> e, l, h;
      for (const auto* r : rows) {
        e.push_back(r->energy);
        l.push_back(r->length);
        h.push_back(r->n_high_velocity);
      }
      c.std_energy = util::population_std(e, util::shifted_mean(e));
      c.median_length = util::median(l);
      c.median_high_velocity = util::median(h);
    }
    out.push_back(c);
  }
  return out;
}

inline std::string distribution_csv(const std::vector<DistributionCell>& cells) {
  std::string out = "method,speed,angle,count,std_E,median_L,median_n_highvel\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : detail::fmt_double(v); };
  for (const auto& c : cells)
    out += c.method + "," + detail::fmt_double(c.speed) + "," + detail::fmt_double(c.angle) + "," +
           std::to_string(c.count) + "," + cell(c.std_energy) + "," + cell(c.median_length) + "," +
           cell(c.median_high_velocity) + "\n";
  return out;
}

}  // namespace wakeplan
