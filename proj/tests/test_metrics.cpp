#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wakeplan/metrics.hpp"

using namespace wakeplan;

namespace {
Path make_path(std::vector<GridNode> nodes, double spacing) {
  Path p;
  p.nodes = std::move(nodes);
  p.spacing = spacing;
  return p;
}

// Straight row of nodes along x with the given speeds; everything else at 1.
FlowField row_field(const std::vector<double>& speeds) {
  const GridSpec g = GridSpec::cube(static_cast<int>(std::max<std::size_t>(speeds.size(), 2)), 1.0 * (std::max<std::size_t>(speeds.size(), 2) - 1));
  std::vector<double> s(g.size(), 1.0);
  for (std::size_t i = 0; i < speeds.size(); ++i) s[i] = speeds[i];
  return FlowField(g, {1.0, 0.0, 0}, s, std::vector<std::uint8_t>(g.size(), 0));
}

std::vector<GridNode> row(std::size_t n) {
  std::vector<GridNode> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<int>(i), 0, 0});
  return out;
}
}  // namespace

TEST(HighVelocity, BelowThresholdCountsNothing) {
  const FlowField f = row_field({1, 1, 1, 1});
  FieldStats st;
  st.median_speed = 1.0;
  st.std_speed = 0.5;
  st.field_id = f.id();
  EXPECT_EQ(high_velocity_count(make_path(row(4), 1.0), f, st), 0u);
}

TEST(HighVelocity, ThresholdIsInclusive) {
  const FlowField f = row_field({1.5, 1.5, 1.5, 1.0});
  FieldStats st;
  st.median_speed = 1.0;
  st.std_speed = 0.5;
  st.field_id = f.id();
  EXPECT_EQ(high_velocity_count(make_path(row(4), 1.0), f, st), 3u);
}

TEST(HighVelocity, UniformFieldCountsEveryNode) {
  const FlowField f = make_uniform_field(GridSpec::cube(6), {2.0, 0.0, 0});
  const FieldStats st = field_stats(f, PlannerConfig{});
  EXPECT_EQ(st.high_velocity_threshold(), 2.0);
  EXPECT_EQ(high_velocity_count(make_path(row(5), f.spacing()), f, st), 5u);
}

TEST(HighVelocity, StatsFromAnotherFieldRejected) {
  const FlowField f = row_field({1, 2, 3});
  const FlowField g = row_field({1, 2, 4});
  const FieldStats st = field_stats(g, PlannerConfig{});
  EXPECT_THROW(high_velocity_count(make_path(row(3), 1.0), f, st), ProvenanceError);
}

TEST(Turbulent, HandEvaluatedTransitions) {
  EXPECT_EQ(turbulent_count(make_path(row(3), 1.0), row_field({1.0, 1.004, 1.010}), MetricsConfig{}), 1u);
  EXPECT_EQ(turbulent_count(make_path(row(4), 1.0), row_field({2, 2, 2, 2}), MetricsConfig{}), 0u);
  // Exactly 0.5% counts.
  EXPECT_EQ(turbulent_count(make_path(row(2), 1.0), row_field({200.0, 201.0}), MetricsConfig{}), 1u);
  // Zero predecessor speed uses the floor instead of dividing by zero.
  EXPECT_EQ(turbulent_count(make_path(row(2), 1.0), row_field({0.0, 0.5}), MetricsConfig{}), 1u);
  EXPECT_EQ(turbulent_count(make_path(row(1), 1.0), row_field({3.0}), MetricsConfig{}), 0u);
}

TEST(Energy, HandEvaluated) {
  const PlannerConfig c;
  const FlowField f = make_uniform_field(GridSpec::cube(3, 2 * 1.2205), {1.0, 0.0, 0});
  EXPECT_EQ(path_energy(make_path({{0, 0, 0}}, f.spacing()), f, c), 0.0);
  EXPECT_NEAR(path_energy(make_path({{0, 0, 0}, {1, 0, 0}}, f.spacing()), f, c), 3.92125 * 1.2205, 1e-5);
  PlannerConfig w = c;
  w.omega1 = 3.0;
  EXPECT_EQ(path_energy(make_path({{0, 0, 0}, {1, 0, 0}}, f.spacing()), f, w),
            path_energy(make_path({{0, 0, 0}, {1, 0, 0}}, f.spacing()), f, c));
}

TEST(Energy, InvalidPathsRejected) {
  const GridSpec g = GridSpec::cube(3);
  std::vector<std::uint8_t> o(g.size(), 0);
  o[linear_index(g, {1, 0, 0})] = 1;
  const FlowField f(g, {}, std::vector<double>(g.size(), 1.0), o);
  EXPECT_THROW(path_energy(make_path({{0, 0, 0}, {1, 0, 0}}, 1.0), f, PlannerConfig{}), PathError);
  EXPECT_THROW(path_energy(make_path({{0, 0, 0}, {0, 2, 0}}, 1.0), f, PlannerConfig{}), ContractError);
  EXPECT_THROW(path_energy(make_path({{0, 0, 0}, {0, 0, 3}}, 1.0), f, PlannerConfig{}), PathError);
}

TEST(Length, Examples) {
  EXPECT_EQ(path_length(make_path({{4, 4, 4}}, 1.0)), 0.0);
  std::vector<GridNode> diag;
  for (int i = 0; i <= 7; ++i) diag.push_back({i, i, i});
  EXPECT_NEAR(path_length(make_path(diag, 1.0)), 7 * std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(path_length(make_path(diag, 1.0)), 12.1244, 1e-4);
}

TEST(Metrics, MatchBruteForceOnRandomWalks) {
  std::mt19937_64 rng(8);
  const PlannerConfig c;
  const MetricsConfig mc;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const FlowField f = oracle::random_field(12, 100 + seed, 0.1);
    const FieldStats st = field_stats(f, c);
    const auto nodes = oracle::random_walk(f, rng, 60);
    const Path p = make_path(nodes, f.spacing());
    const PathMetrics m = assess(p, f, st, c, mc);
    const auto ref = oracle::free_stats(f);
    EXPECT_EQ(m.n_high_velocity, oracle::high_velocity(nodes, f, ref.median + ref.std));
    EXPECT_EQ(m.n_turbulent, oracle::turbulent(nodes, f, mc.epsilon));
    const double e = oracle::energy(nodes, f, c);
    EXPECT_NEAR(m.energy, e, 1e-9 * std::max(e, 1e-300));
    const double l = oracle::length(nodes, f.spacing());
    EXPECT_NEAR(m.length, l, 1e-9 * std::max(l, 1e-300));
    EXPECT_GE(m.length + 1e-12, euclid(nodes.front(), nodes.back(), f.spacing()));
    EXPECT_LE(m.n_high_velocity, nodes.size());
    EXPECT_LE(m.n_turbulent, nodes.size() - 1);
    EXPECT_EQ(m.length == 0.0, nodes.size() == 1);
    EXPECT_EQ(m.eval_field_id, f.id());
  }
}

TEST(Metrics, WakeInformedEnergyEqualsSearchCost) {
  const GridSpec g = GridSpec::cube(48);
  const HullModel hull = HullModel::centered(g);
  const FlowField f = make_wake_field(g, {1.8, 15.0, 0}, hull);
  PlannerConfig c;
  c.heuristic_mode = HeuristicMode::admissible_min;
  const SearchResult r = astar(f, {47, 20, 30}, hull.goal_node(g), c);
  EXPECT_NEAR(path_energy(r.path, f, c), r.g_total, 1e-9 * r.g_total);
}

TEST(Metrics, LengthIgnoresField) {
  const Path p = make_path({{0, 0, 0}, {1, 1, 0}, {2, 1, 0}}, 1.0);
  const double l = path_length(p);
  const FlowField a = row_field({1, 2, 3});
  const FlowField b = row_field({5, 5, 5});
  EXPECT_EQ(assess(p, a, field_stats(a, {}), {}, {}).length, l);
  EXPECT_EQ(assess(p, b, field_stats(b, {}), {}, {}).length, l);
}
