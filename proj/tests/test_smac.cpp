#include <gtest/gtest.h>

#include <cmath>

#include "aconf/error.hpp"
#include "aconf/smac.hpp"
#include "aconf/synthetic.hpp"

using namespace aconf;

namespace {

// Noiseless separable surface over two reals: 1 + |x - 0.3| + 2|y - 0.7|.
SyntheticBundle separable() {
  SyntheticBundle b;
  b.space = parse_pcs("x [0,1] [0]\ny [0,1] [0]\n");
  b.surface.base_runtime = 1.0;
  SurfaceTerm tx, ty;
  tx.param = "x", tx.optimum = 0.3, tx.lo = 0, tx.hi = 1;
  ty.param = "y", ty.optimum = 0.7, ty.lo = 0, ty.hi = 1, ty.weight = 2.0;
  b.surface.terms = {tx, ty};
  b.train.instances = {{"i0", ExpectedStatus::unknown}};
  b.test = b.train;
  b.cutoff = 100;
  return b;
}

double true_log_cost(const SyntheticBundle& b, const Configuration& c) {
  return std::log10(*surface_runtime(b.surface, named_values(b.space, c), "i0", 0));
}

}  // namespace

TEST(Forest, ConstantResponse) {
  std::vector<std::vector<double>> x{{0.1}, {0.5}, {0.9}, {0.3}};
  std::vector<double> y(4, 2.5);
  RandomForest f;
  f.fit(x, y, {0}, ForestParams{});
  for (double q : {0.0, 0.4, 1.0}) {
    auto p = f.predict({q});
    EXPECT_DOUBLE_EQ(p.mean, 2.5);
    EXPECT_DOUBLE_EQ(p.variance, 0.0);
  }
}

TEST(Forest, SingleDistinctInput) {
  RandomForest f;
  EXPECT_THROW(f.fit({{1.0}, {1.0}}, {1.0, 2.0}, {0}, ForestParams{}), InsufficientData);
  EXPECT_THROW(f.fit({{1.0}}, {1.0}, {0}, ForestParams{}), InsufficientData);
}

TEST(Forest, SingleTreeInterpolates) {
  ForestParams p;
  p.num_trees = 1;
  p.min_samples_leaf = 1;
  p.bootstrap = false;
  p.max_features_frac = 1.0;
  std::vector<std::vector<double>> x{{0.0, 0}, {0.2, 1}, {0.4, 2}, {0.6, 0}, {0.8, 1}};
  std::vector<double> y{3.0, -1.0, 0.5, 7.0, 2.0};
  RandomForest f;
  f.fit(x, y, {0, 3}, p);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(f.predict(x[i]).mean, y[i]);
}

TEST(Forest, SeparableSurfaceFit) {
  auto b = separable();
  Encoder enc(b.space);
  std::mt19937_64 rng(9);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  std::vector<Configuration> configs;
  for (int i = 0; i < 200; ++i) {
    configs.push_back(b.space.sample_uniform(rng));
    x.push_back(enc.encode(configs.back()));
    y.push_back(true_log_cost(b, configs.back()));
  }
  RandomForest f;
  f.fit(x, y, enc.cardinality(), ForestParams{});
  double se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto p = f.predict(x[i]);
    EXPECT_GE(p.variance, 0.0);
    se += (p.mean - y[i]) * (p.mean - y[i]);
  }
  EXPECT_LT(std::sqrt(se / 200.0), 0.1);
  // Interior query between training points.
  auto q = b.space.from_strings({{"x", "0.45"}, {"y", "0.55"}});
  EXPECT_NEAR(f.predict(enc.encode(q)).mean, true_log_cost(b, q), 0.2);
}

TEST(Encoder, Layout) {
  auto space = parse_pcs("m {on,off} [off]\nk [1,100] [10] il\nc {a,b,c} [b]\nk | m in {on}\n");
  Encoder enc(space, 2);
  // m, k, activity(k), c, two features
  EXPECT_EQ(enc.dims(), 6u);
  std::vector<double> feats{0.25, 9.0};
  auto on = enc.encode(space.from_strings({{"m", "on"}, {"k", "100"}}), &feats);
  EXPECT_EQ(on[0], 0.0);
  EXPECT_DOUBLE_EQ(on[1], 1.0);
  EXPECT_EQ(on[2], 1.0);
  EXPECT_EQ(on[3], 1.0);
  EXPECT_EQ(on[4], 0.25);
  auto off = enc.encode(space.default_configuration(), &feats);
  EXPECT_EQ(off[2], 0.0);
  EXPECT_DOUBLE_EQ(off[1], 0.5);  // default k = 10 sits mid-way in log space
}

TEST(Ei, ClosedForm) {
  EXPECT_DOUBLE_EQ(expected_improvement(1.0, 0.0, 1.5), 0.5);
  EXPECT_DOUBLE_EQ(expected_improvement(2.0, 0.0, 1.5), 0.0);
  EXPECT_NEAR(expected_improvement(0.7, 1.0, 0.7), 0.3989422804014327, 1e-15);
  // z = 1, sigma = 2: 2 * (Phi(1) + phi(1)) with Phi(1) = 0.8413447460685429, phi(1) = 0.24197072451914337.
  EXPECT_NEAR(expected_improvement(0.0, 4.0, 2.0), 2 * 0.8413447460685429 + 2 * 0.24197072451914337, 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50), v(0, 100);
  for (int i = 0; i < 10000; ++i) EXPECT_GE(expected_improvement(u(rng), v(rng), u(rng)), 0.0);
}

TEST(LogCost, Floor) {
  EXPECT_DOUBLE_EQ(log_cost({RunStatus::sat, 0.0, false}, {10, 5}), std::log10(0.005));
  EXPECT_DOUBLE_EQ(log_cost({RunStatus::timeout, 5.0, false}, {10, 5}), std::log10(50.0));
}

TEST(Model, MarginalOverInstances) {
  auto space = parse_pcs("a {x,y} [x]\n");
  RunHistory h(std::vector<std::string>{"i0", "i1"}, 0, true);
  InstanceFeatures feats;
  feats.feature_names = {"f"};
  feats.rows = {{"i0", {0.0}}, {"i1", {1.0}}};
  for (const char* v : {"x", "y"}) {
    auto id = h.intern(space.from_strings({{"a", v}}));
    for (std::size_t p = 0; p < 2; ++p) {
      const double cost = h.instance_at(p) == "i0" ? 10.0 : 1000.0;
      h.append(id, p, 5000, {RunStatus::sat, cost, false});
    }
  }
  ForestParams fp;
  fp.min_samples_leaf = 1;
  fp.bootstrap = false;
  fp.max_features_frac = 1.0;
  fp.num_trees = 3;
  auto m = SmacModel::fit(h, space, feats, {10, 5000}, fp);
  ASSERT_TRUE(m.uses_features());
  auto c = space.default_configuration();
  std::vector<double> f0{0.0}, f1{1.0};
  EXPECT_DOUBLE_EQ(m.predict(c, &f0).mean, 1.0);
  EXPECT_DOUBLE_EQ(m.predict(c, &f1).mean, 3.0);
  EXPECT_DOUBLE_EQ(m.marginal_predict(c), 2.0);
}

TEST(Model, FallbackWithoutFeatures) {
  auto space = parse_pcs("a {x,y} [x]\n");
  RunHistory h(std::vector<std::string>{"i0", "i1"}, 0, true);
  InstanceFeatures partial;
  partial.feature_names = {"f"};
  partial.rows = {{"i0", {0.0}}};
  auto x = h.intern(space.from_strings({{"a", "x"}}));
  auto y = h.intern(space.from_strings({{"a", "y"}}));
  h.append(x, 0, 100, {RunStatus::sat, 1.0, false});
  h.append(y, 0, 100, {RunStatus::sat, 100.0, false});
  auto m = SmacModel::fit(h, space, partial, {10, 100}, ForestParams{});
  EXPECT_FALSE(m.uses_features());
  EXPECT_EQ(m.marginal_predict(space.default_configuration()), m.predict(space.default_configuration()).mean);
}

TEST(Challengers, Interleaving) {
  auto b = separable();
  std::mt19937_64 rng(2);
  auto none = select_challengers(nullptr, b.space, b.space.default_configuration(), 0.0, rng, 6);
  EXPECT_EQ(none.size(), 6u);
  for (const auto& c : none) EXPECT_TRUE(b.space.is_valid(c));

  RunHistory h(std::vector<std::string>{"i0"}, 0, true);
  for (int i = 0; i < 50; ++i) {
    auto id = h.intern(b.space.sample_uniform(rng));
    h.append(id, 0, 100, eval_surface(b.surface, b.space, h.config(id), "i0", 0, 100, 100));
  }
  auto m = SmacModel::fit(h, b.space, std::nullopt, {10, 100}, ForestParams{});
  auto two = select_challengers(&m, b.space, b.space.default_configuration(), 0.0, rng, 2);
  ASSERT_EQ(two.size(), 2u);
}

TEST(Challengers, ModelGuidedIsGood) {
  auto b = separable();
  std::mt19937_64 rng(4);
  RunHistory h(std::vector<std::string>{"i0"}, 0, true);
  for (int i = 0; i < 500; ++i) {
    auto id = h.intern(b.space.sample_uniform(rng));
    h.append(id, 0, 100, eval_surface(b.surface, b.space, h.config(id), "i0", 0, 100, 100));
  }
  auto m = SmacModel::fit(h, b.space, std::nullopt, {10, 100}, ForestParams{});
  Configuration best = h.config(0);
  double best_log = 1e300;
  for (ConfigId c = 0; c < h.num_configs(); ++c) {
    double l = log_cost(h.slot(c, 0)->outcome, {10, 100});
    if (l < best_log) best_log = l, best = h.config(c);
  }
  auto top = select_challengers(&m, b.space, best, best_log, rng, 2)[0];
  // 10th percentile of the true cost over uniform samples.
  std::vector<double> costs;
  for (int i = 0; i < 2000; ++i) costs.push_back(true_log_cost(b, b.space.sample_uniform(rng)));
  std::nth_element(costs.begin(), costs.begin() + 200, costs.end());
  EXPECT_LT(true_log_cost(b, top), costs[200]);
}

TEST(RunSmac, CrashRegionAvoided) {
  auto b = standard_bundle(SurfaceKind::crash_region);
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  auto r = run_smac(sc, t, Budget::runs(1500), 5);
  double level = r.incumbent[sc.space.index_of("level")];
  EXPECT_TRUE(level < 0.55 || level > 0.85);
}

TEST(RunSmac, ZeroBudget) {
  auto b = standard_bundle(SurfaceKind::valley, {.train = 5, .test = 2});
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  auto r = run_smac(sc, t, Budget::runs(0), 1);
  EXPECT_EQ(r.incumbent, sc.space.default_configuration());
}

TEST(RunSmac, TwoClusterMarginalRanking) {
  auto b = standard_bundle(SurfaceKind::two_cluster, {.train = 40, .test = 10, .train_cluster0 = 0.5});
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  auto r = run_smac(sc, t, Budget::runs(1500), 3);
  auto m = SmacModel::fit(*r.history, sc.space, sc.features, scenario_metric(sc), ForestParams{});
  ASSERT_TRUE(m.uses_features());
  std::vector<Configuration> probes{sc.space.from_strings({{"family", "f2"}, {"bias", "0.5"}, {"tilt", "0.5"}}),
                                    sc.space.from_strings({{"family", "f1"}, {"bias", "0.5"}, {"tilt", "0.5"}}),
                                    sc.space.from_strings({{"family", "f3"}, {"bias", "0"}, {"tilt", "0"}})};
  // Oracle order by mean log cost over the training instances.
  std::vector<double> oracle, model;
  for (const auto& p : probes) {
    double s = 0;
    for (const auto& i : sc.train.instances)
      s += std::log10(*surface_runtime(b.surface, named_values(sc.space, p), i.id, 0));
    oracle.push_back(s);
    model.push_back(m.marginal_predict(p));
  }
  ASSERT_LT(oracle[0], oracle[1]);
  ASSERT_LT(oracle[1], oracle[2]);
  EXPECT_LT(model[0], model[1]);
  EXPECT_LT(model[1], model[2]);
}
