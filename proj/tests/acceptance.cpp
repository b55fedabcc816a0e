// Acceptance gate: runs each criterion once and prints one PASS/FAIL line.
// Exit status is non-zero when any criterion fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "wakeplan/bench.hpp"
#include "wakeplan/checkpoint.hpp"
#include "wakeplan/field_io.hpp"
#include "wakeplan/nn_eval.hpp"
#include "wakeplan/training.hpp"

using namespace wakeplan;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// --- 1: optimality against the exhaustive oracle -------------------------
Outcome optimality() {
  PlannerConfig pc;
  pc.heuristic_mode = HeuristicMode::admissible_min;
  int agree = 0, total = 0;
  std::mt19937_64 rng(101);
  for (int i = 0; i < 100; ++i) {
    const FlowField f = oracle::random_field(16, 1000 + static_cast<std::uint64_t>(i));
    const GridNode s = oracle::random_free(f, rng), g = oracle::random_free(f, rng);
    ++total;
    double a = -1, d = -2;
    bool a_none = false, d_none = false;
    try {
      a = astar(f, s, g, pc).g_total;
    } catch (const NoPathError&) {
      a_none = true;
    }
    try {
      d = dijkstra_oracle(f, s, g, pc).g_total;
    } catch (const NoPathError&) {
      d_none = true;
    }
    if ((a_none && d_none) || (!a_none && !d_none && std::abs(a - d) <= 1e-9 * std::max(1.0, std::abs(d)))) ++agree;
  }
  return {agree == total, fmt("%.0f/%.0f fields agree within 1e-9 relative", agree, total)};
}

// --- 2: admissibility ------------------------------------------------------
Outcome admissibility() {
  PlannerConfig pc;
  pc.heuristic_mode = HeuristicMode::admissible_min;
  int violations = 0, checked = 0;
  std::mt19937_64 rng(202);
  for (int i = 0; i < 20; ++i) {
    const FlowField f = oracle::random_field(16, 2000 + static_cast<std::uint64_t>(i));
    const FieldStats st = field_stats(f, pc);
    const GridNode goal = oracle::random_free(f, rng);
    const auto exact = oracle::cost_to_goal(f, goal, pc);
    for (int k = 0; k < 50; ++k) {
      const GridNode n = oracle::random_free(f, rng);
      const double h = heuristic(n, goal, st, pc, f.spacing());
      const double c = exact[static_cast<std::size_t>((n.iz * 16 + n.iy) * 16 + n.ix)];
      ++checked;
      if (h > c * (1 + 1e-12)) ++violations;
    }
  }
  return {violations == 0, fmt("%.0f violations in %.0f node checks", violations, checked)};
}

// --- 6: metrics against brute force -----------------------------------------
Outcome metrics_equivalence() {
  PlannerConfig pc;
  const MetricsConfig mc;
  std::mt19937_64 rng(606);
  int mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const FlowField f = oracle::random_field(12, 6000 + static_cast<std::uint64_t>(i));
    const auto nodes = oracle::random_walk(f, rng, 5 + static_cast<int>(rng() % 40));
    Path p;
    p.nodes = nodes;
    p.spacing = f.spacing();
    const FieldStats st = field_stats(f, pc);
    const PathMetrics m = assess(p, f, st, pc, mc);
    const auto os = oracle::free_stats(f);
    const double e = oracle::energy(nodes, f, pc), l = oracle::length(nodes, f.spacing());
    bool ok = std::abs(m.energy - e) <= 1e-9 * std::max(1e-300, std::abs(e)) &&
              std::abs(m.length - l) <= 1e-9 * std::max(1e-300, l) &&
              m.n_high_velocity == oracle::high_velocity(nodes, f, os.median + os.std) &&
              m.n_turbulent == oracle::turbulent(nodes, f, mc.epsilon);
    if (!ok) ++mismatches;
  }
  int energy_gap = 0;
  for (int i = 0; i < 20; ++i) {
    const FlowField f = oracle::random_field(16, 6600 + static_cast<std::uint64_t>(i));
    const GridNode s = oracle::random_free(f, rng), g = oracle::random_free(f, rng);
    try {
      const SearchResult r = astar(f, s, g, pc);
      if (std::abs(path_energy(r.path, f, pc) - r.g_total) > 1e-9 * std::max(1.0, r.g_total)) ++energy_gap;
    } catch (const NoPathError&) {
    }
  }
  return {mismatches == 0 && energy_gap == 0,
          fmt("%.0f/200 metric mismatches, %.0f/20 energy vs g_total mismatches", mismatches, energy_gap)};
}

// --- 7: gradient check -------------------------------------------------------
Outcome gradient_check() {
  double worst = 0.0;
  std::string worst_block;
  const char* names[] = {"w1", "b1", "w2", "b2", "w3", "b3"};
  for (std::uint64_t model_no = 0; model_no < 5; ++model_no) {
    MlpModel m = init_xavier(700 + model_no);
    std::mt19937_64 rng(model_no);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1(i) = 0.05 * n(rng);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2(i) = 0.05 * n(rng);
    for (Eigen::Index i = 0; i < m.b3.size(); ++i) m.b3(i) = 0.05 * n(rng);
    std::vector<TrainingSample> samples(4);
    for (auto& s : samples) {
      for (auto& x : s.input) x = n(rng);
      const std::size_t wp = 1 + rng() % kMaxWaypoints;
      for (std::size_t i = 0; i < 3 * wp; ++i) {
        s.target[i] = n(rng);
        s.mask[i] = 1.0;
      }
    }
    const Batch b = make_batch(samples);
    const Gradients g = backward(m, b).grad;
    Eigen::MatrixXd* pm[] = {&m.w1, nullptr, &m.w2, nullptr, &m.w3, nullptr};
    Eigen::VectorXd* pv[] = {nullptr, &m.b1, nullptr, &m.b2, nullptr, &m.b3};
    const Eigen::MatrixXd* gm[] = {&g.w1, nullptr, &g.w2, nullptr, &g.w3, nullptr};
    const Eigen::VectorXd* gv[] = {nullptr, &g.b1, nullptr, &g.b2, nullptr, &g.b3};
    for (int block = 0; block < 6; ++block) {
      const Eigen::Index size = pm[block] ? pm[block]->size() : pv[block]->size();
      // Every entry of the small blocks, a seeded sample of 400 from the large ones.
      const Eigen::Index checks = std::min<Eigen::Index>(size, 400);
      for (Eigen::Index k = 0; k < checks; ++k) {
        const Eigen::Index idx = checks == size ? k : static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(size));
        double& p = pm[block] ? pm[block]->data()[idx] : pv[block]->data()[idx];
        const double analytic = gm[block] ? gm[block]->data()[idx] : gv[block]->data()[idx];
        const double saved = p;
        p = saved + 1e-5;
        const double up = batch_loss(m, b);
        p = saved - 1e-5;
        const double down = batch_loss(m, b);
        p = saved;
        const double numeric = (up - down) / 2e-5;
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
        const double rel = std::abs(analytic - numeric) / scale;
        if (rel > worst) {
          worst = rel;
          worst_block = names[block];
        }
      }
    }
  }
  return {worst < 1e-4, fmt("max relative error %.3g", worst) + " (block " + worst_block + ")"};
}

// --- desk sweep shared by 3, 4, 5, 8, 9, 10 --------------------------------
struct Desk {
  CorpusConfig cfg;
  Corpus corpus;
  std::map<Variant, std::vector<PathRecord>> records;
};

Desk run_desk() {
  Desk d;
  d.cfg.planner.heuristic_mode = HeuristicMode::admissible_min;
  d.cfg.scenarios = ScenarioGrid::desk(2024);
  d.cfg.record_timing = true;
  d.cfg.jobs = 1;
  d.corpus = generate_corpus(d.cfg, {Variant::current_informed, Variant::wake_informed});
  for (const auto& [v, recs] : d.corpus.records)
    for (const auto& r : recs) d.records[v].push_back(to_path_record(r, method_name(v, false)));
  return d;
}

Outcome energy_advantage(const Desk& d) {
  const auto& ci = d.corpus.records.at(Variant::current_informed);
  const auto& wi = d.corpus.records.at(Variant::wake_informed);
  std::size_t ok = 0, total = 0;
  double e_ci = 0, e_wi = 0;
  for (std::size_t i = 0; i < ci.size(); ++i) {
    ++total;
    if (!ci[i].ok || !wi[i].ok) continue;
    if (wi[i].metrics.energy <= ci[i].metrics.energy * (1 + 1e-12)) ++ok;
    e_ci += ci[i].metrics.energy;
    e_wi += wi[i].metrics.energy;
  }
  const double reduction = 100.0 * (e_ci - e_wi) / e_ci;
  return {ok == total && reduction > 0.0,
          fmt("E(W.I.) <= E(C.I.) on %.0f/%.0f paths; sweep-mean reduction %.2f%%", static_cast<double>(ok),
              static_cast<double>(total), reduction)};
}

Outcome length_ordering(const Desk& d) {
  std::vector<double> l_ci, l_wi;
  std::vector<std::vector<double>> by_bucket(kSpeedBuckets.size());
  for (const auto& r : d.corpus.records.at(Variant::current_informed))
    if (r.ok) {
      l_ci.push_back(r.metrics.length);
      by_bucket[bucket_of(r.scenario.flow_speed)].push_back(r.metrics.length);
    }
  for (const auto& r : d.corpus.records.at(Variant::wake_informed))
    if (r.ok) l_wi.push_back(r.metrics.length);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& b : by_bucket)
    if (!b.empty()) {
      lo = std::min(lo, mean_of(b));
      hi = std::max(hi, mean_of(b));
    }
  const double spread = (hi - lo) / lo;
  return {mean_of(l_ci) <= mean_of(l_wi) && spread <= 0.01,
          fmt("mean L C.I. %.4f m, W.I. %.4f m; C.I. bucket spread %.4f%%", mean_of(l_ci), mean_of(l_wi),
              100.0 * spread)};
}

Outcome high_velocity(const Desk& d) {
  std::vector<double> ci, wi;
  for (const auto& r : d.corpus.records.at(Variant::current_informed))
    if (r.ok) ci.push_back(static_cast<double>(r.metrics.n_high_velocity));
  for (const auto& r : d.corpus.records.at(Variant::wake_informed))
    if (r.ok) wi.push_back(static_cast<double>(r.metrics.n_high_velocity));
  const double mw = util::median(wi), mc = util::median(ci);
  return {mw <= mc, fmt("median high-velocity nodes W.I. %.1f, C.I. %.1f", mw, mc)};
}

Outcome overfit(const Desk& d) {
  const auto raw = samples_from_path_records(d.records.at(Variant::wake_informed));
  const util::Stopwatch clock;
  const auto [model, report] = overfit_smoke(raw, 8);
  const double secs = clock.seconds();
  return {report.best_val < 1e-3 && report.stopped_epoch <= 500 && secs < 120.0,
          fmt("masked MSE %.3g after %.0f epochs in %.1f s", report.best_val, report.stopped_epoch, secs)};
}

struct NetworkRun {
  std::vector<PathRecord> val_targets;
  NnEvaluation eval;
};

NetworkRun train_and_evaluate(const Desk& d, Variant v) {
  const auto& recs = d.records.at(v);
  TrainConfig tc;
  tc.seed = 9;
  const PreparedData data = prepare_training(recs, 0.8, tc.seed);
  const auto [model, report] = train(data.train, data.val, tc, data.norm, v);
  NetworkRun run;
  const std::set<std::string> val(data.val_keys.begin(), data.val_keys.end());
  for (const auto& r : recs)
    if (val.count(r.key())) run.val_targets.push_back(r);
  run.eval = evaluate_network(model, d.cfg, run.val_targets, true);
  return run;
}

Outcome approximation_gap(const Desk& d, const std::map<Variant, NetworkRun>& runs) {
  bool pass = true;
  std::string detail;
  for (const auto& [v, run] : runs) {
    std::map<std::string, double> astar_e;
    for (const auto& r : d.corpus.records.at(v))
      if (r.ok) astar_e[sample_key(r.id(), r.start_idx)] = r.metrics.energy;
    std::vector<double> nn, ref;
    for (const auto& row : run.eval.rows)
      if (row.valid && astar_e.count(row.key())) {
        nn.push_back(row.energy);
        ref.push_back(astar_e.at(row.key()));
      }
    const double gap = 100.0 * (mean_of(nn) - mean_of(ref)) / mean_of(ref);
    pass = pass && !nn.empty() && mean_of(nn) >= mean_of(ref);
    detail += std::string(detail.empty() ? "" : "; ") + method_name(v, true) +
              fmt(" gap %+.2f%% over %.0f valid of %.0f", gap, static_cast<double>(nn.size()),
                  static_cast<double>(run.eval.rows.size()));
  }
  return {pass, detail};
}

Outcome speedup(const std::map<Variant, NetworkRun>& runs) {
  std::vector<double> nn, planner;
  for (const auto& [v, run] : runs) {
    for (const auto& row : run.eval.rows) nn.push_back(row.plan_time);
    for (const auto& t : run.val_targets) planner.push_back(t.wall_time);
  }
  const double mn = util::median(nn), ma = util::median(planner);
  return {mn <= 1e-3 * ma, fmt("median NN %.3g s, median A* %.3g s, ratio %.3g", mn, ma, mn / ma)};
}

// --- 11: determinism and round trips ----------------------------------------
Outcome determinism() {
  std::vector<std::string> failures;
  const fs::path root = fs::temp_directory_path() / "wakeplan_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  const FlowField f = make_wake_field(GridSpec::cube(40), {2.3, 25.0, 5}, HullModel::centered(GridSpec::cube(40)), {});
  write_field(root / "f.wpf", f);
  const FlowField back = read_field(root / "f.wpf");
  if (encode_field(back) != encode_field(f) || !std::ranges::equal(back.speeds(), f.speeds()) || !std::ranges::equal(back.occupancy(), f.occupancy()))
    failures.push_back("field round trip");

  CorpusConfig cfg;
  cfg.grid = GridSpec::cube(32);
  cfg.scenarios.speeds = {0.8, 2.4, 4.4};
  cfg.scenarios.angles = {0.0, 40.0};
  cfg.scenarios.starts_per_field = 6;
  cfg.scenarios.seed = 77;
  cfg.record_timing = false;
  const std::vector<Variant> both{Variant::current_informed, Variant::wake_informed};
  write_corpus(generate_corpus(cfg, both), root / "a");
  write_corpus(generate_corpus(cfg, both), root / "b");
  for (const char* file : {"manifest.json", "ci_astar/paths.jsonl", "ci_astar/metrics.csv", "wi_astar/paths.jsonl",
                           "wi_astar/metrics.csv"})
    if (slurp(root / "a" / file) != slurp(root / "b" / file) || slurp(root / "a" / file).empty())
      failures.push_back(std::string("corpus ") + file);

  const auto recs = read_path_records(root / "a/wi_astar/paths.jsonl");
  const PreparedData data = prepare_training(recs, 0.8, 3);
  double worst = 0;
  for (const auto& s : data.train) {
    const TrainingSample raw = denormalize(s, data.norm);
    const TrainingSample again = normalize(raw, data.norm);
    for (std::size_t j = 0; j < kInputDim; ++j) worst = std::max(worst, std::abs(again.input[j] - s.input[j]));
    for (std::size_t j = 0; j < kOutputDim; ++j) worst = std::max(worst, std::abs(again.target[j] - s.target[j]));
  }
  if (worst > 1e-12) failures.push_back("normalize identity");

  TrainConfig tc;
  tc.max_epochs = 5;
  tc.batch_size = 8;
  tc.patience = 2;
  tc.seed = 4;
  const auto [m1, r1] = train(data.train, data.val, tc, data.norm, Variant::wake_informed);
  const auto [m2, r2] = train(data.train, data.val, tc, data.norm, Variant::wake_informed);
  if (!(m1 == m2) || r1.train_loss != r2.train_loss || r1.val_loss != r2.val_loss) failures.push_back("training report");

  save_checkpoint(root / "ck", m1, tc);
  if (!(load_checkpoint(root / "ck").model == m1)) failures.push_back("checkpoint round trip");

  std::string tables[2];
  for (int k = 0; k < 2; ++k) {
    const auto t = run_comparison({load_method(root / "a/ci_astar"), load_method(root / "a/wi_astar")});
    tables[k] = comparison_markdown(t) + comparison_csv(t) + distribution_csv(distribution_data(load_method(root / "a/wi_astar")));
  }
  const auto tb = run_comparison({load_method(root / "b/ci_astar"), load_method(root / "b/wi_astar")});
  if (tables[0] != tables[1] || comparison_csv(tb) != comparison_csv(run_comparison({load_method(root / "a/ci_astar"), load_method(root / "a/wi_astar")})))
    failures.push_back("bench tables");

  std::string detail = failures.empty() ? "field, checkpoint, normalize, corpus, training and bench all reproduce" : "";
  for (const auto& s : failures) detail += (detail.empty() ? "mismatch: " : ", ") + s;
  return {failures.empty(), detail + fmt(" (normalize max error %.2g)", worst)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const util::Stopwatch clock;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %2d %-28s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
                clock.seconds());
    std::fflush(stdout);
  };

  report(1, "astar-optimality", optimality);
  report(2, "heuristic-admissibility", admissibility);

  std::optional<Desk> desk;
  const util::Stopwatch sweep_clock;
  std::string desk_error;
  try {
    desk = run_desk();
  } catch (const std::exception& e) {
    desk_error = e.what();
  }
  const double sweep_secs = sweep_clock.seconds();
  auto needs_desk = [&](const std::function<Outcome(const Desk&)>& fn) {
    return [&, fn]() -> Outcome {
      if (!desk) return {false, "desk sweep failed: " + desk_error};
      return fn(*desk);
    };
  };
  report(3, "wake-energy-advantage", needs_desk([&](const Desk& d) {
           Outcome o = energy_advantage(d);
           o.pass = o.pass && sweep_secs < 600.0;
           o.detail += fmt("; sweep %.0f s", sweep_secs);
           return o;
         }));
  report(4, "path-length-ordering", needs_desk(length_ordering));
  report(5, "high-velocity-avoidance", needs_desk(high_velocity));
  report(6, "metrics-oracle", metrics_equivalence);
  report(7, "mlp-gradient-check", gradient_check);
  report(8, "mlp-overfit-smoke", needs_desk(overfit));

  std::map<Variant, NetworkRun> runs;
  std::string nn_error;
  if (desk) try {
      for (Variant v : {Variant::current_informed, Variant::wake_informed}) runs[v] = train_and_evaluate(*desk, v);
    } catch (const std::exception& e) {
      nn_error = e.what();
    }
  auto needs_runs = [&](const std::function<Outcome()>& fn) {
    return [&, fn]() -> Outcome {
      if (runs.size() != 2) return {false, "network evaluation failed: " + (desk ? nn_error : desk_error)};
      return fn();
    };
  };
  report(9, "approximation-gap", needs_runs([&] { return approximation_gap(*desk, runs); }));
  report(10, "inference-speedup", needs_runs([&] { return speedup(runs); }));
  report(11, "determinism-roundtrips", determinism);

  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
