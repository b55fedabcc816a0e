#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wakeplan/dataset.hpp"
#include "wakeplan/error.hpp"
#include "wakeplan/serialize.hpp"

// On-disk layout shared by planner corpora and network predictions. Each
// method lives in its own directory:
//
//   <dir>/manifest.json   method name, generating config, counts
//   <dir>/paths.jsonl     one JSON object per path
//   <dir>/metrics.csv     one row per path (see kMetricsHeader)

namespace wakeplan {

inline constexpr const char* kMetricsHeader =
    "scenario_id,variant,seed,E_J,L_m,n_highvel,n_turb,plan_time_s,start_idx,valid";

inline std::string method_name(Variant v, bool network) {
  const char* prefix = v == Variant::current_informed ? "ci" : "wi";
  return std::string(prefix) + (network ? "_nn" : "_astar");
}

struct PathRecord {
  std::string scenario_id;
  std::size_t speed_idx = 0;
  std::size_t angle_idx = 0;
  int start_idx = 0;
  ScenarioParams scenario;
  std::string method;
  std::string status = "ok";  // ok | no_path | invalid
  Path path;
  double g_total = 0.0;
  std::size_t expanded = 0;
  double wall_time = 0.0;

  bool ok() const { return status == "ok"; }
  std::string key() const { return sample_key(scenario_id, start_idx); }
};

struct MetricsRow {
  std::string scenario_id;
  std::string method;
  std::uint64_t seed = 0;
  double energy = std::nan("");
  double length = std::nan("");
  double n_high_velocity = std::nan("");
  double n_turbulent = std::nan("");
  double plan_time = 0.0;
  int start_idx = 0;
  bool valid = false;

  std::string key() const { return sample_key(scenario_id, start_idx); }
};

inline PathRecord to_path_record(const CorpusRecord& r, const std::string& method) {
  PathRecord p;
  p.scenario_id = r.id();
  p.speed_idx = r.speed_idx;
  p.angle_idx = r.angle_idx;
  p.start_idx = r.start_idx;
  p.scenario = r.scenario;
  p.method = method;
  p.status = r.ok ? "ok" : "no_path";
  p.path = r.search.path;
  if (!r.ok) p.path.nodes = {r.start, r.goal};
  p.g_total = r.search.g_total;
  p.expanded = r.search.expanded;
  p.wall_time = r.search.wall_time;
  return p;
}

inline MetricsRow to_metrics_row(const CorpusRecord& r, const std::string& method) {
  MetricsRow m;
  m.scenario_id = r.id();
  m.method = method;
  m.seed = r.scenario.seed;
  m.start_idx = r.start_idx;
  m.valid = r.ok;
  m.plan_time = r.search.wall_time;
  if (r.ok) {
    m.energy = r.metrics.energy;
    m.length = r.metrics.length;
    m.n_high_velocity = static_cast<double>(r.metrics.n_high_velocity);
    m.n_turbulent = static_cast<double>(r.metrics.n_turbulent);
  }
  return m;
}

inline json path_record_json(const PathRecord& p) {
  json nodes = json::array();
  for (const auto& n : p.path.nodes) nodes.push_back(n);
  json wps = json::array();
  for (const auto& w : p.path.waypoints()) wps.push_back(w);
  return {{"scenario_id", p.scenario_id},
          {"speed_idx", p.speed_idx},
          {"angle_idx", p.angle_idx},
          {"start_idx", p.start_idx},
          {"flow_speed", p.scenario.flow_speed},
          {"flow_angle", p.scenario.flow_angle},
          {"seed", p.scenario.seed},
          {"variant", p.method},
          {"status", p.status},
          {"spacing", p.path.spacing},
          {"nodes", std::move(nodes)},
          {"waypoints", std::move(wps)},
          {"g_total", p.g_total},
          {"expanded", p.expanded},
          {"wall_time", p.wall_time}};
}

inline PathRecord path_record_from_json(const json& j) {
  PathRecord p;
  p.scenario_id = j.at("scenario_id").get<std::string>();
  p.speed_idx = j.at("speed_idx").get<std::size_t>();
  p.angle_idx = j.at("angle_idx").get<std::size_t>();
  p.start_idx = j.at("start_idx").get<int>();
  p.scenario = {j.at("flow_speed").get<double>(), j.at("flow_angle").get<double>(), j.at("seed").get<std::uint64_t>()};
  p.method = j.at("variant").get<std::string>();
  p.status = j.at("status").get<std::string>();
  p.path.spacing = j.at("spacing").get<double>();
  p.path.scenario = p.scenario;
  p.path.variant = p.method.rfind("ci", 0) == 0 ? Variant::current_informed : Variant::wake_informed;
  for (const auto& n : j.at("nodes")) p.path.nodes.push_back(n.get<GridNode>());
  p.g_total = j.at("g_total").get<double>();
  p.expanded = j.at("expanded").get<std::size_t>();
  p.wall_time = j.at("wall_time").get<double>();
  return p;
}

namespace detail {
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace detail

inline std::string metrics_csv_line(const MetricsRow& m) {
  auto count = [](double c) { return std::isnan(c) ? std::string("nan") : std::to_string(static_cast<long long>(c)); };
  return m.scenario_id + "," + m.method + "," + std::to_string(m.seed) + "," + detail::fmt_double(m.energy) + "," +
         detail::fmt_double(m.length) + "," + count(m.n_high_velocity) + "," + count(m.n_turbulent) + "," +
         detail::fmt_double(m.plan_time) + "," + std::to_string(m.start_idx) + "," + (m.valid ? "1" : "0");
}

inline std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open metrics CSV: " + file.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw FormatError("metrics CSV: unexpected header in " + file.string());
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = detail::split_csv_line(line);
    if (c.size() != 10) throw FormatError("metrics CSV: expected 10 columns in " + file.string());
    MetricsRow m;
    m.scenario_id = c[0];
    m.method = c[1];
    m.seed = std::stoull(c[2]);
    m.energy = std::strtod(c[3].c_str(), nullptr);
    m.length = std::strtod(c[4].c_str(), nullptr);
    m.n_high_velocity = std::strtod(c[5].c_str(), nullptr);
    m.n_turbulent = std::strtod(c[6].c_str(), nullptr);
    m.plan_time = std::strtod(c[7].c_str(), nullptr);
    m.start_idx = std::stoi(c[8]);
    m.valid = c[9] == "1";
    rows.push_back(std::move(m));
  }
  return rows;
}

inline std::vector<PathRecord> read_path_records(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open path records: " + file.string());
  std::vector<PathRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(path_record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError("path records: " + std::string(e.what()));
    }
  }
  return out;
}

inline json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + file.string());
  out << text;
  if (!out) throw IoError("write failed: " + file.string());
}

// Writes one method directory. `manifest` is extended with the method name and
// path counts.
inline void write_method_dir(const std::filesystem::path& dir, const std::string& method, json manifest,
                             const std::vector<PathRecord>& paths, const std::vector<MetricsRow>& rows) {
  std::filesystem::create_directories(dir);
  std::string jl;
  for (const auto& p : paths) jl += path_record_json(p).dump() + "\n";
  write_text(dir / "paths.jsonl", jl);
  std::string csv = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) csv += metrics_csv_line(r) + "\n";
  write_text(dir / "metrics.csv", csv);
  std::size_t valid = 0;
  for (const auto& r : rows) valid += r.valid ? 1 : 0;
  manifest["method"] = method;
  manifest["paths"] = rows.size();
  manifest["valid"] = valid;
  manifest["invalid"] = rows.size() - valid;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline json corpus_manifest(const Corpus& c) {
  json counts = json::object();
  for (const auto& [v, s] : c.summary)
    counts[method_name(v, false)] = {
        {"attempted", s.attempted}, {"succeeded", s.succeeded}, {"failed", s.failed}, {"skipped_overlong", s.overlong}};
  const HullModel hull = c.config.hull_model();
  return {{"format", "wakeplan-corpus-1"},
          {"config", c.config},
          {"goal", hull.goal_node(c.config.grid)},
          {"counts", counts}};
}

// <out>/manifest.json plus one method directory per planner variant.
inline void write_corpus(const Corpus& c, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  const json manifest = corpus_manifest(c);
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  for (const auto& [v, recs] : c.records) {
    const std::string method = method_name(v, false);
    std::vector<PathRecord> paths;
    std::vector<MetricsRow> rows;
    for (const auto& r : recs) {
      paths.push_back(to_path_record(r, method));
      rows.push_back(to_metrics_row(r, method));
    }
    json m = manifest;
    m["variant"] = std::string(to_string(v));
    write_method_dir(out / method, method, m, paths, rows);
  }
}

// Training samples from a method directory's successful paths.
inline std::vector<TrainingSample> samples_from_path_records(const std::vector<PathRecord>& recs,
                                                             std::size_t* skipped = nullptr) {
  std::vector<TrainingSample> out;
  std::size_t skip = 0;
  for (const auto& r : recs) {
    if (!r.ok()) continue;
    try {
      out.push_back(pad_and_mask(r.path, r.key()));
    } catch (const OverlongPathError& e) {
      std::cerr << "warning: skipping " << r.key() << ": " << e.what() << "\n";
      ++skip;
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

}  // namespace wakeplan
