#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "aconf/analysis.hpp"
#include "aconf/error.hpp"
#include "aconf/synthetic.hpp"

using namespace aconf;

namespace {

std::vector<InstanceOutcome> outcomes(std::size_t n, RunOutcome o) {
  std::vector<InstanceOutcome> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({"i" + std::to_string(i), o});
  return v;
}

}  // namespace

TEST(Speedup, Examples) {
  const CostMetric par10{10, 300};
  auto def = outcomes(250, {RunStatus::timeout, 300, false});
  auto conf = outcomes(250, {RunStatus::sat, 2.0, false});
  EXPECT_DOUBLE_EQ(speedup_factor(def, conf, par10), 1500.0);
  EXPECT_LE(speedup_factor(def, conf, {1, 300}), speedup_factor(def, conf, par10));
  EXPECT_DOUBLE_EQ(speedup_factor(conf, conf, par10), 1.0);
}

TEST(Speedup, SolvedSubsetOnly) {
  std::vector<InstanceOutcome> def{{"a", {RunStatus::sat, 4, false}},
                                   {"b", {RunStatus::timeout, 10, false}},
                                   {"c", {RunStatus::crashed, 1, false}}};
  std::vector<InstanceOutcome> conf{{"c", {RunStatus::timeout, 10, false}},
                                    {"b", {RunStatus::sat, 2, false}},
                                    {"a", {RunStatus::sat, 1, false}}};
  // Instance c is unsolved by both and excluded: (4 + 100) / (1 + 2).
  EXPECT_DOUBLE_EQ(speedup_factor(def, conf, {10, 10}), 104.0 / 3.0);
}

TEST(Speedup, Undefined) {
  auto t = outcomes(3, {RunStatus::timeout, 10, false});
  EXPECT_THROW(speedup_factor(t, t, {10, 10}), UndefinedStatistic);
  auto rec = speedup_record("x", 3, t, t, {10, 10});
  EXPECT_FALSE(rec.speedup.has_value());
  std::ostringstream out;
  write_speedups_csv(out, {rec});
  EXPECT_EQ(out.str(), "label,num_params,speedup,metric_k\nx,3,undefined,10\n");
}

TEST(Slowdown, GeometricMean) {
  EXPECT_DOUBLE_EQ(geometric_mean_slowdown({{5, 5}, {7, 7}}), 1.0);
  EXPECT_NEAR(geometric_mean_slowdown({{2, 1}, {1, 2}}), 1.0, 1e-15);
  const double expect = std::exp((std::log(1.5) + std::log(2.0) + std::log(30.5)) / 3.0);
  EXPECT_NEAR(geometric_mean_slowdown({{1.5, 1}, {4, 2}, {61, 2}}), expect, 1e-12);
  EXPECT_NEAR(expect, 4.506164391268, 1e-11);  // cube root of 91.5
  EXPECT_THROW(geometric_mean_slowdown({{0, 1}}), Error);
}

TEST(Spearman, Examples) {
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 3, 2, 4}), 0.8, 1e-15);
  EXPECT_THROW(spearman({1, 1, 1}, {1, 2, 3}), UndefinedStatistic);
  EXPECT_EQ(average_ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Spearman, MonotoneInvariance) {
  std::vector<double> x{0.3, 1.2, 0.8, 2.5, 0.1, 1.9}, y{3, 1, 2, 6, 4, 5};
  std::vector<double> ex, cube;
  for (double v : x) ex.push_back(std::exp(v));
  for (double v : y) cube.push_back(v * v * v);
  EXPECT_DOUBLE_EQ(spearman(x, y), spearman(ex, cube));
}

TEST(Correlation, IdenticalSurface) {
  auto b = standard_bundle(SurfaceKind::valley, {.train = 10, .test = 10});
  b.surface.instance_spread = 0.0;
  auto sc = bundle_scenario(b);
  SyntheticTarget t(b.surface, b.cutoff);
  std::mt19937_64 rng(1);
  auto study = sample_correlation_study(sc, t, 30, rng);
  EXPECT_EQ(study.rows.size(), 30u);
  EXPECT_EQ(study.spearman_all, 1.0);
  EXPECT_EQ(study.top_count, 6u);
  std::ostringstream out;
  write_correlation_csv(out, study);
  const std::string csv = out.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
  EXPECT_THROW(sample_correlation_study(sc, t, 4, rng), Error);
}

TEST(Correlation, TopFraction) {
  EXPECT_EQ(top_fraction_count(100), 20u);
  EXPECT_EQ(top_fraction_count(5), 2u);
  EXPECT_EQ(top_fraction_count(14), 2u);
}

TEST(Scatter, Rows) {
  std::vector<InstanceOutcome> def{{"a", {RunStatus::timeout, 300, false}}, {"b", {RunStatus::sat, 3, false}}};
  std::vector<InstanceOutcome> conf{{"b", {RunStatus::sat, 1.5, false}}, {"a", {RunStatus::sat, 2, false}}};
  std::ostringstream out;
  emit_scatter(out, def, conf, {10, 300});
  EXPECT_EQ(out.str(),
            "instance,default_cost,configured_cost,default_status,configured_status\n"
            "a,3000,2,TIMEOUT,SAT\nb,3,1.5,SAT,SAT\n");
  std::ostringstream empty;
  emit_scatter(empty, {}, {}, {10, 300});
  EXPECT_EQ(empty.str(), "instance,default_cost,configured_cost,default_status,configured_status\n");
}
