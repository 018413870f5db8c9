#include <gtest/gtest.h>

#include <algorithm>

#include "aconf/error.hpp"
#include "aconf/scoring.hpp"

using namespace aconf;

namespace {

RunOutcome solved(double t) { return {RunStatus::sat, t, false}; }
RunOutcome timeout(double t) { return {RunStatus::timeout, t, false}; }

std::vector<InstanceOutcome> all_solved(const std::vector<double>& times) {
  std::vector<InstanceOutcome> out;
  for (std::size_t i = 0; i < times.size(); ++i) out.push_back({"i" + std::to_string(i), solved(times[i])});
  return out;
}

}  // namespace

TEST(Aggregate, MixedPar10) {
  auto a = aggregate({solved(10), timeout(300)}, {10, 300});
  EXPECT_DOUBLE_EQ(a.mean_cost, 1505.0);
  EXPECT_EQ(a.solved_count, 1u);
  EXPECT_EQ(a.attempted_count, 2u);
  EXPECT_FALSE(a.lower_bound);
}

TEST(Aggregate, Variants) {
  EXPECT_DOUBLE_EQ(aggregate({solved(10), solved(10)}, {10, 300}).mean_cost, 10.0);
  EXPECT_DOUBLE_EQ(aggregate({timeout(300), timeout(300)}, {1, 300}).mean_cost, 300.0);
  auto lb = aggregate({solved(1), {RunStatus::timeout, 2.0, true}}, {10, 300});
  EXPECT_TRUE(lb.lower_bound);
  EXPECT_DOUBLE_EQ(lb.mean_cost, 1.5);
}

TEST(Aggregate, PermutationInvariant) {
  std::vector<RunOutcome> v{solved(1), timeout(5), solved(3), {RunStatus::crashed, 0.1, false}};
  auto base = aggregate(v, {10, 5});
  std::sort(v.begin(), v.end(), [](const RunOutcome& a, const RunOutcome& b) { return a.runtime > b.runtime; });
  auto perm = aggregate(v, {10, 5});
  EXPECT_EQ(base.mean_cost, perm.mean_cost);
  EXPECT_EQ(base.solved_count, perm.solved_count);
}

TEST(Rank, TieBrokenByRuntimeOnSolved) {
  // Mean runtimes 1.58, 4.20 and 7.68 with everything solved.
  auto r = rank({{"riss", all_solved({7.0, 8.36})}, {"clasp", all_solved({1.0, 2.16})},
                 {"lingeling", all_solved({4.0, 4.4})}},
                {10, 300});
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].label, "clasp");
  EXPECT_EQ(r[1].label, "lingeling");
  EXPECT_EQ(r[2].label, "riss");
  EXPECT_NEAR(r[0].mean_runtime_solved, 1.58, 1e-12);
  EXPECT_NEAR(r[1].mean_runtime_solved, 4.20, 1e-12);
  EXPECT_NEAR(r[2].mean_runtime_solved, 7.68, 1e-12);
}

TEST(Rank, SolvedCountDominates) {
  std::vector<double> t(250, 100.0);
  auto a = all_solved(t);
  auto b = all_solved(std::vector<double>(250, 1.0));
  b[0].outcome = timeout(300);
  auto r = rank({{"fast", b}, {"slow", a}}, {10, 300});
  EXPECT_EQ(r[0].label, "slow");
  EXPECT_EQ(r[0].solved_count, 250u);
  EXPECT_EQ(r[1].solved_count, 249u);
}

TEST(Rank, IdenticalByLabel) {
  auto x = all_solved({1, 2});
  auto r = rank({{"b", x}, {"a", x}}, {10, 300});
  EXPECT_EQ(r[0].label, "a");
}

TEST(Rank, DifferentInstancesRejected) {
  auto x = all_solved({1, 2});
  auto y = all_solved({1, 2, 3});
  EXPECT_THROW(rank({{"a", x}, {"b", y}}, {10, 300}), Error);
}
