#include <gtest/gtest.h>

#include <set>

#include "aconf/runner.hpp"
#include "aconf/scenario.hpp"
#include "util.hpp"

using namespace aconf;

namespace {

Scenario process_scenario(const testutil::TempDir& dir, const std::string& script, double cutoff = 2.0) {
  Scenario s;
  s.target_command = dir.write("wrapper.sh", "#!/bin/sh\n" + script, true);
  s.execdir = dir.path().string();
  s.space = parse_pcs("a {x,y} [x]\n");
  s.train = parse_instances("sat.cnf SAT\nunsat.cnf UNSAT\nplain.cnf\n");
  s.cutoff_seconds = cutoff;
  return s;
}

RunSpec spec_for(const Scenario& s, const std::string& instance, double cutoff) {
  return RunSpec{s.space.default_configuration(), instance, 0, cutoff, 3072};
}

}  // namespace

TEST(PenalizedCost, Par) {
  EXPECT_EQ(penalized_cost({RunStatus::sat, 10.0, false}, 300, 10), 10.0);
  EXPECT_EQ(penalized_cost({RunStatus::timeout, 300.0, false}, 300, 10), 3000.0);
  EXPECT_EQ(penalized_cost({RunStatus::timeout, 300.0, false}, 300, 1), 300.0);
  EXPECT_EQ(penalized_cost({RunStatus::crashed, 0.5, false}, 300, 1), 300.0);
  EXPECT_EQ(penalized_cost({RunStatus::memout, 1.0, false}, 300, 10), 3000.0);
  EXPECT_EQ(penalized_cost({RunStatus::wrong_answer, 1.0, false}, 300, 10), 3000.0);
  RunOutcome capped{RunStatus::timeout, 4.0, true};
  EXPECT_EQ(penalized_cost(capped, 300, 10), 4.0);
  EXPECT_TRUE(is_lower_bound(capped));
}

TEST(PenalizedCost, Bounded) {
  for (auto st : {RunStatus::sat, RunStatus::unsat, RunStatus::success, RunStatus::timeout, RunStatus::crashed,
                  RunStatus::memout, RunStatus::wrong_answer})
    for (double t : {0.0, 1.0, 299.0, 300.0}) {
      double c = penalized_cost({st, t, false}, 300, 10);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 3000.0);
    }
}

TEST(WrapperOutput, Parse) {
  auto o = interpret_wrapper_output("noise\nResult for configurator: SAT, 12.3, -1, -1, 42\n", ExpectedStatus::sat);
  EXPECT_EQ(o.status, RunStatus::sat);
  EXPECT_DOUBLE_EQ(o.runtime, 12.3);
  EXPECT_EQ(interpret_wrapper_output("Result for configurator: UNSAT, 1, -1, -1, 1", ExpectedStatus::sat).status,
            RunStatus::wrong_answer);
  EXPECT_EQ(interpret_wrapper_output("garbage", ExpectedStatus::unknown).status, RunStatus::crashed);
  auto last = interpret_wrapper_output(
      "Result for configurator: SAT, 1, 0, 0, 0\nResult for configurator: TIMEOUT, 5, 0, 0, 0\n",
      ExpectedStatus::unknown);
  EXPECT_EQ(last.status, RunStatus::timeout);
  EXPECT_EQ(interpret_wrapper_output("Result for configurator: SAT, abc, 0", ExpectedStatus::unknown).status,
            RunStatus::crashed);
}

TEST(WrapperCommand, CallConvention) {
  auto space = parse_pcs("a {x,y} [y]\nb [0,1] [0.5]\n");
  RunSpec spec{space.default_configuration(), "i 1.cnf", 7, 2.5, 100};
  EXPECT_EQ(wrapper_command("./w", "0", space, spec), "./w 'i 1.cnf' '0' 2.5 -1 7 -a 'y' -b '0.5'");
}

TEST(ProcessTarget, Sat) {
  testutil::TempDir dir;
  auto s = process_scenario(dir, "sleep 0.1\necho 'Result for configurator: SAT, 0.1, -1, -1, 0'\n");
  ProcessTarget t(s);
  auto o = t.run(s.space, spec_for(s, "sat.cnf", 2.0), nullptr);
  EXPECT_EQ(o.status, RunStatus::sat);
  EXPECT_NEAR(o.runtime, 0.1, 1e-9);
}

TEST(ProcessTarget, Timeout) {
  testutil::TempDir dir;
  auto s = process_scenario(dir, "sleep 30\n");
  ProcessTarget t(s);
  auto o = t.run(s.space, spec_for(s, "plain.cnf", 1.0), nullptr);
  EXPECT_EQ(o.status, RunStatus::timeout);
  EXPECT_DOUBLE_EQ(o.runtime, 1.0);
  EXPECT_TRUE(o.capped);  // 1 s is below the scenario's 2 s maximum
  auto full = t.run(s.space, spec_for(s, "plain.cnf", 2.0), nullptr);
  EXPECT_EQ(full.status, RunStatus::timeout);
  EXPECT_FALSE(full.capped);
}

TEST(ProcessTarget, Signal) {
  testutil::TempDir dir;
  auto s = process_scenario(dir, "kill -9 $$\n");
  ProcessTarget t(s);
  EXPECT_EQ(t.run(s.space, spec_for(s, "plain.cnf", 2.0), nullptr).status, RunStatus::crashed);
}

TEST(ProcessTarget, WrongAnswer) {
  testutil::TempDir dir;
  auto s = process_scenario(dir, "echo 'Result for configurator: UNSAT, 0.01, -1, -1, 0'\n");
  ProcessTarget t(s);
  EXPECT_EQ(t.run(s.space, spec_for(s, "sat.cnf", 2.0), nullptr).status, RunStatus::wrong_answer);
  EXPECT_EQ(t.run(s.space, spec_for(s, "unsat.cnf", 2.0), nullptr).status, RunStatus::unsat);
}

TEST(RunPool, CompletesAndCancels) {
  testutil::TempDir dir;
  auto s = process_scenario(dir,
                            "case \"$1\" in sat.cnf) echo 'Result for configurator: SAT, 0.01, 0, 0, 0';;"
                            " *) sleep 30;; esac\n",
                            60.0);
  ProcessTarget t(s);
  RunPool pool(t, s.space, 2);
  auto fast = pool.submit(spec_for(s, "sat.cnf", 60.0));
  auto slow = pool.submit(spec_for(s, "plain.cnf", 60.0));
  auto first = pool.wait_next();
  EXPECT_EQ(first.ticket, fast);
  EXPECT_EQ(first.outcome.status, RunStatus::sat);
  pool.cancel(slow);
  auto second = pool.wait_next();
  EXPECT_EQ(second.ticket, slow);
  EXPECT_EQ(second.outcome.status, RunStatus::timeout);
  EXPECT_TRUE(second.outcome.capped);
  EXPECT_LT(second.outcome.runtime, 10.0);
  EXPECT_EQ(pool.outstanding(), 0u);
}

TEST(RunPool, ShrinkCutoff) {
  testutil::TempDir dir;
  auto s = process_scenario(dir, "sleep 30\n", 60.0);
  ProcessTarget t(s);
  RunPool pool(t, s.space, 1);
  auto id = pool.submit(spec_for(s, "plain.cnf", 60.0));
  pool.shrink_cutoff(id, 0.3);
  auto done = pool.wait_next();
  EXPECT_EQ(done.outcome.status, RunStatus::timeout);
  EXPECT_DOUBLE_EQ(done.outcome.runtime, 0.3);
  EXPECT_TRUE(done.outcome.capped);
}
