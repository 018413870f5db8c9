#include <gtest/gtest.h>

#include "aconf/error.hpp"
#include "aconf/synthetic.hpp"
#include "util.hpp"

using namespace aconf;

namespace {

SyntheticSurface one_param_valley() {
  SyntheticSurface s;
  s.base_runtime = 1.0;
  SurfaceTerm t;
  t.param = "x";
  t.optimum = 0.5;
  t.lo = 0;
  t.hi = 1;
  s.terms = {t};
  return s;
}

}  // namespace

TEST(Surface, ValleyAtOptimum) {
  auto s = one_param_valley();
  auto space = parse_pcs("x [0,1] [0.5]\n");
  auto o = eval_surface(s, space, space.default_configuration(), "i", 0, 10, 10);
  EXPECT_EQ(o.status, RunStatus::success);
  EXPECT_DOUBLE_EQ(o.runtime, 1.0);
  // distance 0.25 -> 1.25 s
  auto off = eval_surface(s, space, space.from_strings({{"x", "0.75"}}), "i", 0, 10, 10);
  EXPECT_DOUBLE_EQ(off.runtime, 1.25);
}

TEST(Surface, StandardValleyTerms) {
  auto b = standard_bundle(SurfaceKind::valley);
  b.surface.instance_spread = 0.0;
  NamedValues opt{{"alg", "random"}, {"pre", "light"}, {"depth", "9"}, {"restarts", "100"}, {"ratio", "0.5"}};
  EXPECT_DOUBLE_EQ(*surface_runtime(b.surface, opt, "x", 0), 0.5);
  opt["alg"] = "greedy";
  EXPECT_DOUBLE_EQ(*surface_runtime(b.surface, opt, "x", 0), 0.75);
}

TEST(Surface, CrashAndTimeout) {
  auto b = standard_bundle(SurfaceKind::crash_region);
  auto inside = b.space.from_strings({{"level", "0.7"}});
  auto o = eval_surface(b.surface, b.space, inside, "train_000", 0, 2, 2);
  EXPECT_EQ(o.status, RunStatus::crashed);
  EXPECT_EQ(penalized_cost(o, 2, 10), 20.0);
  auto slow = eval_surface(b.surface, b.space, b.space.default_configuration(), "train_000", 0, 0.05, 2);
  EXPECT_EQ(slow.status, RunStatus::timeout);
  EXPECT_TRUE(slow.capped);
  EXPECT_DOUBLE_EQ(slow.runtime, 0.05);
}

TEST(Surface, Determinism) {
  auto b = standard_bundle(SurfaceKind::valley, {.noise_sigma = 0.5});
  std::mt19937_64 rng(3);
  auto c = b.space.sample_uniform(rng);
  auto x = eval_surface(b.surface, b.space, c, "train_003", 11, 100, 100);
  auto y = eval_surface(b.surface, b.space, c, "train_003", 11, 100, 100);
  EXPECT_EQ(x, y);
  auto z = eval_surface(b.surface, b.space, c, "train_003", 12, 100, 100);
  EXPECT_NE(x.runtime, z.runtime);
}

TEST(Surface, JsonRoundTrip) {
  for (auto k : {SurfaceKind::valley, SurfaceKind::conditional_trap, SurfaceKind::crash_region,
                 SurfaceKind::forbidden_edge, SurfaceKind::two_cluster}) {
    auto b = standard_bundle(k);
    auto again = parse_surface_json(surface_to_json(b.surface));
    EXPECT_EQ(surface_to_json(again), surface_to_json(b.surface));
  }
  EXPECT_THROW(parse_surface_json("{\"kind\":\"nope\"}"), Error);
}

TEST(Surface, Clusters) {
  auto b = standard_bundle(SurfaceKind::two_cluster, {.train = 10, .test = 10});
  EXPECT_EQ(instance_cluster(b.surface, "c0_train_001"), 0u);
  EXPECT_EQ(instance_cluster(b.surface, "c1_test_009"), 1u);
  std::size_t c0 = 0;
  for (const auto& i : b.train.instances) c0 += instance_cluster(b.surface, i.id) == 0;
  EXPECT_EQ(c0, 9u);
  ASSERT_TRUE(b.features.has_value());
  EXPECT_TRUE(b.features->covers(b.train));
}

TEST(Oracle, OneParamGrid) {
  auto s = one_param_valley();
  auto space = parse_pcs("x {0,0.25,0.5,0.75,1} [0]\n");
  InstanceSet train;
  train.instances = {{"i", ExpectedStatus::unknown}};
  auto r = brute_force_optimum(s, space, 5, {10, 10}, train);
  EXPECT_EQ(r.space.to_string(r.config), "x=0.5");
  EXPECT_EQ(r.evaluated, 5u);
  EXPECT_DOUBLE_EQ(r.score.mean_cost, 1.0);
}

TEST(Oracle, TrapSwitchOn) {
  auto b = standard_bundle(SurfaceKind::conditional_trap);
  auto r = brute_force_optimum(b.surface, b.space, 7, {10, b.cutoff}, b.train);
  EXPECT_EQ(*r.space.value_string(r.config, "switch"), "on");
}

TEST(Oracle, ForbiddenEdge) {
  auto b = standard_bundle(SurfaceKind::forbidden_edge);
  auto r = brute_force_optimum(b.surface, b.space, 5, {10, b.cutoff}, b.train);
  EXPECT_EQ(r.space.to_string(r.config), "engine=z boost=off scale=0.5");
}

TEST(Oracle, EnumerationLimits) {
  auto space = parse_pcs("a {0,1} [0]\nb {0,1,2} [0]\nc {x,y} [x]\nc | a in {1}\n");
  EXPECT_EQ(enumerate_space(space).size(), 9u);  // a=0: 3, a=1: 3*2
  EXPECT_THROW(enumerate_space(parse_pcs("r [0,1] [0]\n")), Error);
}

TEST(Target, InProcessHonoursCutoff) {
  auto b = standard_bundle(SurfaceKind::valley);
  SyntheticTarget t(b.surface, b.cutoff, b.train);
  RunSpec spec{b.space.default_configuration(), "train_000", 0, 0.01, 3072};
  auto o = t.run(b.space, spec, nullptr);
  EXPECT_EQ(o.status, RunStatus::timeout);
  EXPECT_TRUE(o.capped);
  RunControl ctl;
  ctl.cancelled = true;
  spec.cutoff_seconds = b.cutoff;
  EXPECT_EQ(t.run(b.space, spec, &ctl).status, RunStatus::timeout);
}

TEST(Bundle, WriteAndLoad) {
  testutil::TempDir dir;
  auto b = standard_bundle(SurfaceKind::two_cluster, {.train = 10, .test = 6});
  write_bundle(b, dir.path().string(), 5);
  auto s = load_scenario(dir.file("scenario.txt"));
  EXPECT_EQ(s.train.size(), 10u);
  EXPECT_EQ(s.test.size(), 6u);
  EXPECT_EQ(s.seed, 5u);
  EXPECT_TRUE(s.deterministic_target);
  EXPECT_TRUE(s.features.has_value());
  auto target = make_target(s);
  EXPECT_TRUE(target->in_process());
  auto direct = eval_surface(b.surface, b.space, b.space.default_configuration(), s.train.instances[0].id, 0,
                             s.cutoff_seconds, s.cutoff_seconds);
  RunSpec spec{s.space.default_configuration(), s.train.instances[0].id, 0, s.cutoff_seconds, 3072};
  EXPECT_EQ(target->run(s.space, spec, nullptr), direct);
}
