// wakeplan command-line driver: field | plan | corpus | train | infer | bench
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "wakeplan/bench.hpp"
#include "wakeplan/checkpoint.hpp"
#include "wakeplan/corpus_io.hpp"
#include "wakeplan/field_io.hpp"
#include "wakeplan/nn_eval.hpp"
#include "wakeplan/planner.hpp"
#include "wakeplan/serialize.hpp"
#include "wakeplan/training.hpp"

namespace fs = std::filesystem;
using namespace wakeplan;

namespace {

struct RunConfig {
  std::uint64_t seed = 0;
  CorpusConfig corpus;
  TrainConfig train;
  double train_fraction = 0.8;
};

void to_json(json& j, const RunConfig& r) {
  j = {{"seed", r.seed}, {"corpus", r.corpus}, {"train", r.train}, {"train_fraction", r.train_fraction}};
}
void from_json(const json& j, RunConfig& r) {
  detail::read_opt(j, "seed", r.seed);
  detail::read_opt(j, "corpus", r.corpus);
  detail::read_opt(j, "train", r.train);
  detail::read_opt(j, "train_fraction", r.train_fraction);
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  int jobs = 1;
  bool dump_config = false;
};

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const ChecksumError*>(&e)) return "checksum";
  if (dynamic_cast<const TruncatedError*>(&e)) return "truncated";
  if (dynamic_cast<const VersionError*>(&e)) return "version";
  if (dynamic_cast<const FormatError*>(&e)) return "format";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const GeometryError*>(&e)) return "geometry";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const NoPathError*>(&e)) return "no_path";
  if (dynamic_cast<const ComparabilityError*>(&e)) return "comparability";
  if (dynamic_cast<const Error*>(&e)) return "wakeplan";
  return "internal";
}

GridNode parse_node(const std::string& s) {
  int a = 0, b = 0, c = 0;
  if (std::sscanf(s.c_str(), "%d,%d,%d", &a, &b, &c) != 3) throw ConfigError("expected i,j,k node indices: " + s);
  return {a, b, c};
}

Vec3 parse_vec(const std::string& s) {
  double a = 0, b = 0, c = 0;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3) throw ConfigError("expected x,y,z in meters: " + s);
  return {a, b, c};
}

std::vector<Variant> parse_variants(const std::string& s) {
  if (s == "both") return {Variant::current_informed, Variant::wake_informed};
  return {parse_variant(s)};
}

void write_manifest(const fs::path& out, const std::string& command, const RunConfig& rc, json extra = json::object()) {
  fs::create_directories(out);
  extra["command"] = command;
  extra["run_config"] = rc;
  write_text(out / "manifest.json", extra.dump(2) + "\n");
}

json field_stats_json(const FlowField& f, const FieldStats& s) {
  return {{"grid", f.spec()},
          {"scenario", f.scenario()},
          {"field_id", s.field_id},
          {"free_nodes", s.free_nodes},
          {"median_speed", s.median_speed},
          {"std_speed", s.std_speed},
          {"mean_speed", s.mean_speed},
          {"min_speed", s.min_speed},
          {"max_speed", s.max_speed},
          {"high_velocity_threshold", s.high_velocity_threshold()},
          {"mean_energy_rate", s.mean_energy_rate},
          {"min_energy_rate", s.min_energy_rate}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware path planning through vessel wakes"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--seed", g.seed, "global seed (falls back to WAKEPLAN_SEED)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--jobs", g.jobs, "worker threads for corpus generation")->check(CLI::PositiveNumber);
  app.add_flag("--dump-config", g.dump_config, "print the effective configuration and exit");

  // Shared scenario overrides.
  std::optional<int> grid_n;
  std::optional<double> extent, speed, angle;
  std::optional<std::string> heuristic;
  auto add_scenario_opts = [&](CLI::App* sub) {
    sub->add_option("--n", grid_n, "grid nodes per axis")->check(CLI::Range(2, 1024));
    sub->add_option("--extent", extent, "domain edge length in meters");
    sub->add_option("--heuristic", heuristic, "paper_average | admissible_min | zero");
  };

  auto* field = app.add_subcommand("field", "generate or inspect a flow field");
  std::string field_kind = "wake", inspect;
  double occupancy = 0.1;
  add_scenario_opts(field);
  field->add_option("--speed", speed, "freestream speed m/s");
  field->add_option("--angle", angle, "wake deflection in degrees");
  field->add_option("--kind", field_kind, "wake | uniform | random")
      ->check(CLI::IsMember({"wake", "uniform", "random"}));
  field->add_option("--occupancy", occupancy, "obstacle fraction for --kind random");
  field->add_option("--inspect", inspect, "print statistics of an existing field file");

  auto* plan = app.add_subcommand("plan", "run A* (or the Dijkstra oracle) on one field");
  std::string plan_field, plan_start, plan_goal, plan_variant = "wake_informed";
  int start_idx = 0;
  bool oracle = false;
  add_scenario_opts(plan);
  plan->add_option("--speed", speed, "freestream speed m/s");
  plan->add_option("--angle", angle, "wake deflection in degrees");
  plan->add_option("--field", plan_field, "field file; generated from the config when omitted");
  plan->add_option("--start", plan_start, "start node i,j,k (default: sampled rear start)");
  plan->add_option("--start-idx", start_idx, "which sampled rear start to use");
  plan->add_option("--goal", plan_goal, "goal node i,j,k (default: payload bay center)");
  plan->add_option("--variant", plan_variant, "wake_informed | current_informed");
  plan->add_flag("--oracle", oracle, "use the exhaustive Dijkstra oracle");

  auto* corpus = app.add_subcommand("corpus", "plan every scenario and start of a sweep");
  std::string corpus_variant = "both";
  std::optional<std::vector<double>> speeds, angles;
  std::optional<int> starts;
  bool no_timing = false;
  add_scenario_opts(corpus);
  corpus->add_option("--variant", corpus_variant, "both | wake_informed | current_informed");
  corpus->add_option("--speeds", speeds, "flow speeds")->delimiter(',');
  corpus->add_option("--angles", angles, "flow angles")->delimiter(',');
  corpus->add_option("--starts", starts, "starts per field")->check(CLI::PositiveNumber);
  corpus->add_flag("--no-timing", no_timing, "zero wall-clock fields for byte-identical output");

  auto* train_cmd = app.add_subcommand("train", "fit the trajectory regressor on a corpus");
  std::string train_corpus, train_variant = "wake_informed";
  std::optional<int> epochs, batch, patience;
  std::optional<double> lr;
  bool smoke = false;
  train_cmd->add_option("--corpus", train_corpus, "corpus directory");
  train_cmd->add_option("--variant", train_variant, "which planner's paths to learn");
  train_cmd->add_option("--epochs", epochs);
  train_cmd->add_option("--batch", batch);
  train_cmd->add_option("--lr", lr);
  train_cmd->add_option("--patience", patience);
  train_cmd->add_flag("--overfit-smoke", smoke, "memorize 32 trajectories and check the loss threshold");

  auto* infer = app.add_subcommand("infer", "predict paths with a trained checkpoint");
  std::string ckpt_dir, infer_corpus, infer_split = "val", q_start, q_goal;
  infer->add_option("--checkpoint", ckpt_dir, "checkpoint directory")->required();
  infer->add_option("--corpus", infer_corpus, "corpus directory to re-plan");
  infer->add_option("--split", infer_split, "val | all")->check(CLI::IsMember({"val", "all"}));
  infer->add_option("--start", q_start, "single query start x,y,z (meters)");
  infer->add_option("--goal", q_goal, "single query goal x,y,z (meters)");
  infer->add_option("--speed", speed, "single query flow speed");
  infer->add_option("--angle", angle, "single query flow angle");

  auto* bench = app.add_subcommand("bench", "compare methods and emit tables");
  std::vector<std::string> method_dirs;
  bench->add_option("methods", method_dirs, "method directories (each with manifest.json and metrics.csv)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig rc;
    if (!g.config.empty()) read_json_file(g.config).get_to(rc);
    std::optional<std::uint64_t> seed = g.seed;
    if (!seed)
      if (const char* env = std::getenv("WAKEPLAN_SEED")) {
        try {
          seed = std::stoull(env);
        } catch (const std::exception&) {
          throw ConfigError("WAKEPLAN_SEED is not an unsigned integer");
        }
      }
    if (seed) {
      rc.seed = *seed;
      rc.corpus.scenarios.seed = *seed;
      rc.train.seed = *seed;
    }
    rc.corpus.jobs = g.jobs;
    if (grid_n) rc.corpus.grid = GridSpec::cube(*grid_n, rc.corpus.grid.extent);
    if (extent) rc.corpus.grid.extent = *extent;
    if (heuristic) rc.corpus.planner.heuristic_mode = parse_heuristic(*heuristic);
    if (speeds) rc.corpus.scenarios.speeds = *speeds;
    if (angles) rc.corpus.scenarios.angles = *angles;
    if (starts) rc.corpus.scenarios.starts_per_field = *starts;
    if (no_timing) rc.corpus.record_timing = false;
    if (epochs) rc.train.max_epochs = *epochs;
    if (batch) rc.train.batch_size = *batch;
    if (lr) rc.train.lr = *lr;
    if (patience) rc.train.patience = *patience;

    if (g.dump_config) {
      std::cout << json(rc).dump(2) << "\n";
      return 0;
    }
    const fs::path out = g.out;

    if (*field) {
      if (!inspect.empty()) {
        const FlowField f = read_field(inspect);
        std::cout << field_stats_json(f, field_stats(f, rc.corpus.planner)).dump(2) << "\n";
        return 0;
      }
      ScenarioParams sc{speed.value_or(1.0), angle.value_or(0.0), rc.seed};
      const GridSpec& gs = rc.corpus.grid;
      FlowField f = field_kind == "random"  ? make_random_field(gs, rc.seed, occupancy)
                    : field_kind == "uniform" ? make_uniform_field(gs, sc)
                                              : make_wake_field(gs, sc, rc.corpus.hull_model(), rc.corpus.wake);
      fs::create_directories(out);
      write_field(out / "field.wpf", f);
      const json stats = field_stats_json(f, field_stats(f, rc.corpus.planner));
      write_text(out / "field_stats.json", stats.dump(2) + "\n");
      write_manifest(out, "field", rc, {{"kind", field_kind}, {"files", {"field.wpf", "field_stats.json"}}});
      std::cout << stats.dump(2) << "\n";
      return 0;
    }

    if (*plan) {
      PlannerConfig pc = rc.corpus.planner;
      pc.variant = parse_variant(plan_variant);
      std::optional<FlowField> f;
      std::optional<GridNode> goal;
      if (!plan_field.empty()) {
        f.emplace(read_field(plan_field));
      } else {
        const ScenarioParams sc{speed.value_or(1.0), angle.value_or(0.0), rc.seed};
        const HullModel hull = rc.corpus.hull_model();
        f.emplace(make_wake_field(rc.corpus.grid, sc, hull, rc.corpus.wake));
        goal = hull.goal_node(rc.corpus.grid);
      }
      if (!plan_goal.empty()) goal = parse_node(plan_goal);
      if (!goal) throw ConfigError("plan: --goal is required with --field");
      GridNode start;
      if (!plan_start.empty()) {
        start = parse_node(plan_start);
      } else {
        ScenarioGrid sg = rc.corpus.scenarios;
        sg.starts_per_field = start_idx + 1;
        start = field_starts(sg, *f, 0, 0).back();
      }
      const SearchResult r = oracle ? dijkstra_oracle(*f, start, *goal, pc) : astar(*f, start, *goal, pc);
      json nodes = json::array();
      for (const auto& n : r.path.nodes) nodes.push_back(n);
      const json result = {{"method", oracle ? "dijkstra_oracle" : "astar"},
                           {"variant", std::string(to_string(pc.variant))},
                           {"heuristic", std::string(to_string(pc.heuristic_mode))},
                           {"field_id", f->id()},
                           {"start", start},
                           {"goal", *goal},
                           {"g_total", r.g_total},
                           {"expanded", r.expanded},
                           {"wall_time", r.wall_time},
                           {"length_m", path_length(r.path)},
                           {"nodes", nodes}};
      fs::create_directories(out);
      write_text(out / "path.json", result.dump(2) + "\n");
      write_manifest(out, "plan", rc, {{"files", {"path.json"}}});
      std::cout << "g_total " << detail::fmt_double(r.g_total) << " J, " << r.path.size() << " nodes, " << r.expanded
                << " expanded, " << r.wall_time << " s\n";
      return 0;
    }

    if (*corpus) {
      const Corpus c = generate_corpus(rc.corpus, parse_variants(corpus_variant));
      write_corpus(c, out);
      for (const auto& [v, s] : c.summary)
        std::cout << method_name(v, false) << ": " << s.attempted << " paths, " << s.succeeded << " ok, " << s.failed
                  << " failed, " << s.overlong << " overlong\n";
      return 0;
    }

    if (*train_cmd) {
      const Variant v = parse_variant(train_variant);
      std::vector<PathRecord> recs;
      CorpusConfig source = rc.corpus;
      if (!train_corpus.empty()) {
        recs = read_path_records(fs::path(train_corpus) / method_name(v, false) / "paths.jsonl");
        read_json_file(fs::path(train_corpus) / "manifest.json").at("config").get_to(source);
      } else if (smoke) {
        // Small built-in corpus: 4 speeds x 2 angles x 4 starts.
        source.scenarios.speeds = {0.5, 1.5, 2.5, 3.5};
        source.scenarios.angles = {0.0, 30.0};
        source.scenarios.starts_per_field = 4;
        source.record_timing = false;
        const Corpus c = generate_corpus(source, {v});
        for (const auto& r : c.records.at(v)) recs.push_back(to_path_record(r, method_name(v, false)));
      } else {
        throw ConfigError("train: --corpus is required");
      }
      fs::create_directories(out);
      if (smoke) {
        const auto raw = samples_from_path_records(recs);
        const auto [model, report] = overfit_smoke(raw, rc.train.seed);
        const double final_loss = report.best_val;
        const bool pass = final_loss < 1e-3;
        write_manifest(out, "train", rc,
                       {{"overfit_smoke", {{"samples", 32}, {"epochs", report.stopped_epoch},
                                           {"final_masked_mse", final_loss}, {"threshold", 1e-3}, {"pass", pass}}}});
        std::cout << "overfit smoke: masked MSE " << final_loss << " after " << report.stopped_epoch << " epochs ("
                  << (pass ? "below" : "above") << " 1e-3)\n";
        return pass ? 0 : 1;
      }
      const PreparedData d = prepare_training(recs, rc.train_fraction, rc.train.seed);
      const auto [model, report] = train(d.train, d.val, rc.train, d.norm, v);
      save_checkpoint(out / "checkpoint", model, rc.train);
      write_text(out / "checkpoint" / "split.json",
                 json{{"train", d.train_keys}, {"val", d.val_keys}, {"corpus_config", source}}.dump(2) + "\n");
      const json rep = {{"train_loss", report.train_loss}, {"val_loss", report.val_loss},
                        {"stopped_epoch", report.stopped_epoch}, {"best_epoch", report.best_epoch},
                        {"best_val", report.best_val}, {"wall_time", rc.corpus.record_timing ? report.wall_time : 0.0},
                        {"train_samples", d.train.size()}, {"val_samples", d.val.size()},
                        {"skipped_overlong", d.skipped_overlong}};
      write_text(out / "report.json", rep.dump(2) + "\n");
      write_manifest(out, "train", rc, {{"files", {"checkpoint/model.json", "checkpoint/model.bin", "checkpoint/split.json", "report.json"}}});
      std::cout << "trained " << method_name(v, true) << ": best val " << report.best_val << " at epoch "
                << report.best_epoch << " of " << report.stopped_epoch << "\n";
      return 0;
    }

    if (*infer) {
      const Checkpoint ck = load_checkpoint(ckpt_dir);
      if (!q_start.empty() || !q_goal.empty()) {
        if (q_start.empty() || q_goal.empty()) throw ConfigError("infer: --start and --goal go together");
        const ScenarioParams sc{speed.value_or(1.0), angle.value_or(0.0), rc.seed};
        sc.validate();
        const Inference inf = infer_path(ck.model, parse_vec(q_start), parse_vec(q_goal), sc, rc.corpus.grid.spacing());
        const json j = {{"waypoints", inf.waypoints}, {"wall_time", inf.wall_time}};
        fs::create_directories(out);
        write_text(out / "waypoints.json", j.dump(2) + "\n");
        write_manifest(out, "infer", rc, {{"files", {"waypoints.json"}}});
        std::cout << inf.waypoints.size() << " waypoints in " << inf.wall_time << " s\n";
        return 0;
      }
      if (infer_corpus.empty()) throw ConfigError("infer: --corpus or --start/--goal required");
      const fs::path cdir = infer_corpus;
      const json cman = read_json_file(cdir / "manifest.json");
      CorpusConfig cc = cman.at("config").get<CorpusConfig>();
      auto targets = read_path_records(cdir / method_name(ck.model.variant, false) / "paths.jsonl");
      if (infer_split == "val") {
        const json split = read_json_file(fs::path(ckpt_dir) / "split.json");
        const auto keys = split.at("val").get<std::vector<std::string>>();
        const std::set<std::string> want(keys.begin(), keys.end());
        std::erase_if(targets, [&](const PathRecord& p) { return !want.count(p.key()); });
      }
      const NnEvaluation ev = evaluate_network(ck.model, cc, targets, cc.record_timing);
      const std::string method = method_name(ck.model.variant, true);
      json m = cman;
      m["variant"] = std::string(to_string(ck.model.variant));
      m["checkpoint"] = fs::absolute(ckpt_dir).string();
      m["split"] = infer_split;
      write_method_dir(out / method, method, m, ev.paths, ev.rows);
      std::cout << method << ": " << ev.rows.size() << " paths, " << ev.invalid << " invalid\n";
      return 0;
    }

    if (*bench) {
      std::vector<MethodData> methods;
      for (const auto& d : method_dirs) methods.push_back(load_method(d));
      const ComparisonTables t = run_comparison(methods);
      fs::create_directories(out);
      write_text(out / "tables.md", comparison_markdown(t));
      write_text(out / "comparison.csv", comparison_csv(t));
      std::vector<DistributionCell> cells;
      for (const auto& m : methods) {
        auto c = distribution_data(m);
        cells.insert(cells.end(), c.begin(), c.end());
      }
      write_text(out / "distribution.csv", distribution_csv(cells));
      write_manifest(out, "bench", rc,
                     {{"methods", t.methods}, {"common_paths", t.common_paths},
                      {"files", {"tables.md", "comparison.csv", "distribution.csv"}}});
      std::cout << comparison_markdown(t);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", error_kind(e)}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
