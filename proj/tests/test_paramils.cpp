#include <gtest/gtest.h>

#include "aconf/error.hpp"
#include "aconf/paramils.hpp"
#include "aconf/synthetic.hpp"

using namespace aconf;

namespace {

// Single real parameter x with runtime 1 + |x - 0.5| on every instance.
SyntheticBundle line_bundle(const std::string& pcs) {
  SyntheticBundle b;
  b.space = parse_pcs(pcs);
  b.surface.base_runtime = 1.0;
  SurfaceTerm t;
  t.param = "x";
  t.optimum = 0.5;
  t.lo = 0;
  t.hi = 1;
  b.surface.terms = {t};
  for (int i = 0; i < 4; ++i) b.train.instances.push_back({"i" + std::to_string(i), ExpectedStatus::unknown});
  b.test = b.train;
  b.cutoff = 10;
  return b;
}

struct Fixture {
  SyntheticBundle bundle;
  Scenario scenario;
  SyntheticTarget target;
  RunHistory history;
  RunContext ctx;
  IteratedLocalSearch ils;

  explicit Fixture(const std::string& pcs)
      : bundle(line_bundle(pcs)),
        scenario(bundle_scenario(bundle)),
        target(bundle.surface, bundle.cutoff),
        history(std::vector<std::string>{"i0", "i1", "i2", "i3"}, 0, true),
        ctx(target, scenario.space, history, scenario_metric(scenario), 3072, Budget::runs(10000)),
        ils(ctx, IlsParams{}, 1) {}

  ConfigId id(const std::string& x) { return history.intern(scenario.space.from_strings({{"x", x}})); }
};

const char* kGrid = "x {0,0.25,0.5,0.75,1} [0.75]\n";

}  // namespace

TEST(Dominates, Rule) {
  auto space = parse_pcs("t {1,2} [1]\n");
  RunHistory h(std::vector<std::string>{"a", "b", "c", "d", "e"}, 0, true);
  const CostMetric m{10, 100};
  auto t1 = h.intern(space.from_strings({{"t", "1"}}));
  auto t2 = h.intern(space.from_strings({{"t", "2"}}));
  // t1: five runs, mean 10, first three mean 9. t2: three runs, mean 12.
  for (double c : {9.0, 9.0, 9.0, 11.5, 11.5}) h.append(t1, h.num_runs(t1), 100, {RunStatus::sat, c, false});
  for (double c : {12.0, 12.0, 12.0}) h.append(t2, h.num_runs(t2), 100, {RunStatus::sat, c, false});
  EXPECT_DOUBLE_EQ(cost_estimate(h, t1, 5, m).mean_cost, 10.0);
  EXPECT_TRUE(dominates(h, t1, t2, m));
  EXPECT_FALSE(dominates(h, t2, t1, m));  // fewer runs
  EXPECT_TRUE(dominates(h, t1, t1, m));
}

TEST(LocalSearch, StepsToOptimum) {
  Fixture f(kGrid);
  f.ils.state().current = f.ils.state().incumbent = f.id("0.75");
  EXPECT_TRUE(f.ils.local_search_step());
  EXPECT_EQ(f.ils.state().current, f.id("0.5"));
  EXPECT_FALSE(f.ils.local_search_step());
}

TEST(LocalSearch, AllNeighborsForbidden) {
  Fixture f("x {0,0.25,0.5} [0]\n{x=0.25}\n{x=0.5}\n");
  f.ils.state().current = f.ils.state().incumbent = f.id("0");
  EXPECT_FALSE(f.ils.local_search_step());
}

TEST(Accept, Rules) {
  Fixture f(kGrid);
  const auto opt = f.id("0.5"), off = f.id("0.75"), mirror = f.id("0.25");
  EXPECT_EQ(f.ils.accept(off, opt), opt);
  EXPECT_EQ(f.ils.accept(opt, off), opt);
  EXPECT_EQ(f.ils.accept(mirror, off), off);  // equal cost keeps the new optimum
}

TEST(Perturb, Strength) {
  auto space = parse_pcs(
      "p0 {a,b,c} [a]\np1 {a,b,c} [a]\np2 {a,b,c} [a]\np3 {a,b,c} [a]\np4 {a,b,c} [a]\n"
      "p5 {a,b,c} [a]\np6 {a,b,c} [a]\np7 {a,b,c} [a]\np8 {a,b,c} [a]\np9 {a,b,c} [a]\n");
  SyntheticSurface surface;
  SyntheticTarget target(surface, 10);
  RunHistory h(std::vector<std::string>{"i"}, 0, true);
  RunContext ctx(target, space, h, {10, 10}, 3072, Budget::runs(10));
  IlsParams p;
  p.restart_probability = 0.0;
  IteratedLocalSearch ils(ctx, p, 3);
  const auto def = space.default_configuration();
  for (int rep = 0; rep < 200; ++rep) {
    auto c = ils.perturb(def);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < space.size(); ++i) diff += c[i] != def[i];
    EXPECT_LE(diff, 3u);
  }
  IlsParams zero;
  zero.perturbation_strength = 0;
  EXPECT_THROW(IteratedLocalSearch(ctx, zero, 1), Error);
}

TEST(FocusedIls, TwoParamValley) {
  SyntheticBundle b = line_bundle("x [0,1] [0]\ny {p,q,r,s} [p]\n");
  SurfaceTerm y;
  y.param = "y";
  y.label_optimum = "r";
  b.surface.terms.push_back(y);
  b.surface.instance_spread = 0.5;
  Scenario sc = bundle_scenario(b);
  Scenario disc = sc;
  disc.space = sc.space.discretize(5);
  auto oracle = brute_force_optimum(b.surface, disc.space, 5, scenario_metric(sc), sc.train);
  SyntheticTarget target(b.surface, b.cutoff);
  auto r = run_focused_ils(disc, target, Budget::runs(500), 4);
  EXPECT_EQ(disc.space.to_string(r.incumbent), disc.space.to_string(oracle.config));
  EXPECT_LE(r.runs_used, 500u);
  EXPECT_FALSE(r.trajectory.empty());
}

TEST(FocusedIls, ZeroBudget) {
  auto b = line_bundle(kGrid);
  auto sc = bundle_scenario(b);
  SyntheticTarget target(b.surface, b.cutoff);
  auto r = run_focused_ils(sc, target, Budget::runs(0), 1);
  EXPECT_EQ(r.incumbent, sc.space.default_configuration());
  EXPECT_EQ(r.runs_used, 0u);
}

TEST(FocusedIls, RejectsContinuousSpace) {
  auto b = line_bundle("x [0,1] [0]\n");
  auto sc = bundle_scenario(b);
  SyntheticTarget target(b.surface, b.cutoff);
  EXPECT_THROW(run_focused_ils(sc, target, Budget::runs(10), 1), UnsupportedSpace);
}

TEST(FocusedIls, ConditionalTrap) {
  auto b = standard_bundle(SurfaceKind::conditional_trap);
  auto sc = bundle_scenario(b);
  sc.space = sc.space.discretize(5);
  SyntheticTarget target(b.surface, b.cutoff);
  auto r = run_focused_ils(sc, target, Budget::runs(2000), 2);
  EXPECT_EQ(*sc.space.value_string(r.incumbent, "switch"), "on");
}

TEST(BasicIls, FindsOptimumWithFixedN) {
  auto b = line_bundle(kGrid);
  auto sc = bundle_scenario(b);
  SyntheticTarget target(b.surface, b.cutoff);
  IlsParams p;
  p.variant = IlsVariant::basic;
  p.n_basic = 4;
  auto r = run_focused_ils(sc, target, Budget::runs(300), 1, p);
  EXPECT_EQ(sc.space.to_string(r.incumbent), "x=0.5");
}
