#include <gtest/gtest.h>

#include "aconf/error.hpp"
#include "aconf/gga.hpp"
#include "aconf/synthetic.hpp"
#include "util.hpp"

using namespace aconf;

TEST(Schedule, Endpoints) {
  GgaParams p;
  EXPECT_EQ(intensification_schedule(p, 250, 1), 4u);
  EXPECT_EQ(intensification_schedule(p, 250, 75), 250u);
  EXPECT_EQ(intensification_schedule(p, 250, 100), 250u);
  // Linear in between: 4 + 246 * 37 / 74 = 127.
  EXPECT_EQ(intensification_schedule(p, 250, 38), 127u);
  p.n_start = 50;
  for (std::size_t g = 1; g <= 100; ++g) EXPECT_EQ(intensification_schedule(p, 50, g), 50u);
}

TEST(Genders, Balanced) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    std::mt19937_64 rng(seed);
    auto g = assign_genders(51, rng);
    std::size_t comp = 0;
    for (auto x : g) comp += x == Gender::competitive;
    EXPECT_EQ(comp, 26u);
  }
}

TEST(Space, Limits) {
  EXPECT_THROW(check_gga_space(parse_pcs("a {x,y} [x]\nb {x,y} [x]\nc {x,y} [x]\nb | a in {x}\nc | b in {x}\n")),
               UnsupportedSpace);
  EXPECT_THROW(check_gga_space(parse_pcs("a [0,4] [1] i\nb {x,y} [x]\nb | a in {1}\n")), UnsupportedSpace);
  EXPECT_NO_THROW(check_gga_space(parse_pcs("a {x,y} [x]\nb {x,y} [x]\nb | a in {x}\n")));
}

TEST(Recombine, Properties) {
  auto space = parse_pcs("r [0,1] [0.2]\nc {a,b,c} [a]\nk [1,100] [10] il\n");
  std::mt19937_64 rng(7);
  auto p1 = space.from_strings({{"r", "0.2"}, {"c", "a"}, {"k", "4"}});
  auto p2 = space.from_strings({{"r", "0.6"}, {"c", "b"}, {"k", "50"}});
  for (int i = 0; i < 200; ++i) {
    EXPECT_EQ(recombine(space, p1, p1, rng), p1);
    auto child = recombine(space, p1, p2, rng);
    EXPECT_GE(child[0], 0.2);
    EXPECT_LE(child[0], 0.6);
    EXPECT_TRUE(child[1] == 0.0 || child[1] == 1.0);
    EXPECT_GE(child[2], 4.0);
    EXPECT_LE(child[2], 50.0);
    EXPECT_EQ(child[2], std::round(child[2]));
  }
}

TEST(Recombine, RepairsForbidden) {
  auto space = parse_pcs("a {0,1} [0]\nb {0,1} [0]\n{a=1, b=1}\n");
  std::mt19937_64 rng(1);
  auto p1 = space.from_strings({{"a", "1"}, {"b", "0"}});
  auto p2 = space.from_strings({{"a", "0"}, {"b", "1"}});
  for (int i = 0; i < 200; ++i) EXPECT_TRUE(space.is_valid(recombine(space, p1, p2, rng)));
  for (int i = 0; i < 200; ++i) EXPECT_TRUE(space.is_valid(mutate(space, p1, 1.0, rng)));
}

namespace {

struct RaceFixture {
  SyntheticBundle bundle = standard_bundle(SurfaceKind::valley, {.train = 6, .test = 2});
  Scenario sc = bundle_scenario(bundle);
  SyntheticTarget target{bundle.surface, bundle.cutoff};
  RunHistory history{std::vector<std::string>{"train_000", "train_001", "train_002", "train_003", "train_004",
                                              "train_005"},
                     0, true};
  RunContext ctx{target, sc.space, history, scenario_metric(sc), 3072, Budget::runs(1000)};
  ConfigId id(const std::vector<std::pair<std::string, std::string>>& kv) {
    return history.intern(sc.space.from_strings(kv));
  }
};

}  // namespace

TEST(Race, SequentialMatchesUncapped) {
  RaceFixture f;
  std::vector<ConfigId> cands{f.id({}), f.id({{"alg", "random"}}), f.id({{"alg", "random"}, {"pre", "light"}}),
                              f.id({{"depth", "13"}})};
  auto r = race(f.ctx, cands, 6, 4);
  double best = 1e300;
  ConfigId expect = 0;
  for (auto c : cands) {
    auto s = surface_score(f.bundle.surface, f.sc.space, f.history.config(c),
                           InstanceSet{f.sc.train.instances}, scenario_metric(f.sc));
    if (s.mean_cost < best) best = s.mean_cost, expect = c;
  }
  EXPECT_EQ(r.winner, expect);
  EXPECT_NEAR(r.total, best * 6, 1e-9);
  EXPECT_EQ(race(f.ctx, {cands[3]}, 6, 4).winner, cands[3]);
}

TEST(Race, AllCrashTiebreak) {
  auto b = standard_bundle(SurfaceKind::crash_region, {.train = 3, .test = 1});
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  RunHistory h(std::vector<std::string>{"train_000", "train_001", "train_002"}, 0, true);
  RunContext ctx(t, sc.space, h, scenario_metric(sc), 3072, Budget::runs(100));
  auto z = h.intern(sc.space.from_strings({{"heur", "c"}, {"level", "0.6"}}));
  auto a = h.intern(sc.space.from_strings({{"heur", "a"}, {"level", "0.7"}}));
  auto r = race(ctx, {z, a}, 3, 2);
  EXPECT_EQ(r.winner, a);
  EXPECT_DOUBLE_EQ(r.total, 3 * 10 * b.cutoff);
}

TEST(Race, ParallelCancelsSlowSibling) {
  testutil::TempDir dir;
  // Runtime is the value of t; the wrapper really sleeps.
  Scenario sc;
  sc.target_command = dir.write("w.sh",
                                "#!/bin/sh\nt=$7\nsleep $t\necho \"Result for configurator: SAT, $t, 0, 0, 0\"\n",
                                true);
  sc.execdir = dir.path().string();
  sc.space = parse_pcs("t {0.05,1.5} [1.5]\n");
  sc.train = parse_instances("i0\ni1\n");
  sc.cutoff_seconds = 10;
  sc.deterministic_target = true;
  ProcessTarget target(sc);
  RunHistory h(std::vector<std::string>{"i0", "i1"}, 0, true);
  RunContext ctx(target, sc.space, h, scenario_metric(sc), 3072, Budget::runs(100));
  auto slow = h.intern(sc.space.from_strings({{"t", "1.5"}}));
  auto fast = h.intern(sc.space.from_strings({{"t", "0.05"}}));
  auto r = race(ctx, {slow, fast}, 2, 2);
  EXPECT_EQ(r.winner, fast);
  ASSERT_NE(h.slot(slow, 0), nullptr);
  EXPECT_TRUE(h.slot(slow, 0)->outcome.capped);
  EXPECT_LT(h.slot(slow, 0)->outcome.runtime, 1.5);
}

TEST(RunGga, SingleGeneration) {
  auto b = standard_bundle(SurfaceKind::valley, {.train = 8, .test = 2});
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  GgaParams p;
  p.g_max = 1;
  p.g_target = 1;
  p.population = 2;
  auto r = run_gga(sc, t, Budget::runs(1000), 3, p);
  std::size_t ran = 0;
  ConfigId only = 0;
  for (ConfigId c = 0; c < r.history->num_configs(); ++c)
    if (r.history->num_runs(c) > 0) ++ran, only = c;
  EXPECT_EQ(ran, 1u);
  EXPECT_EQ(r.incumbent, r.history->config(only));
}

TEST(RunGga, ZeroBudget) {
  auto b = standard_bundle(SurfaceKind::valley, {.train = 8, .test = 2});
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  auto r = run_gga(sc, t, Budget::runs(0), 3);
  EXPECT_EQ(r.incumbent, sc.space.default_configuration());
}

TEST(RunGga, ValleyNearOracle) {
  auto b = standard_bundle(SurfaceKind::valley);
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  auto oracle = brute_force_optimum(b.surface, sc.space, 7, scenario_metric(sc), sc.train);
  auto r = run_gga(sc, t, Budget::runs(5000), 11);
  auto s = surface_score(b.surface, sc.space, r.incumbent, sc.train, scenario_metric(sc));
  EXPECT_LE(s.mean_cost, 1.10 * oracle.score.mean_cost);
}

TEST(RunGga, DeepConditionsRejected) {
  auto b = standard_bundle(SurfaceKind::valley, {.train = 4, .test = 2});
  auto sc = bundle_scenario(b);
  sc.space = parse_pcs("a {x,y} [x]\nb {x,y} [x]\nc {x,y} [x]\nb | a in {x}\nc | b in {x}\n");
  SyntheticTarget t(b.surface, b.cutoff);
  EXPECT_THROW(run_gga(sc, t, Budget::runs(10), 1), UnsupportedSpace);
}
