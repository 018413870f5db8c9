#pragma once

#include <chrono>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "aconf/paramspace.hpp"
#include "aconf/runner.hpp"
#include "aconf/scenario.hpp"
#include "aconf/scoring.hpp"

namespace aconf {

using ConfigId = std::size_t;

inline constexpr double kNoCapping = std::numeric_limits<double>::infinity();
/// Smallest cutoff ever handed to a capped run.
inline constexpr double kMinCutoff = 0.01;

struct InstanceSeed {
  std::size_t instance;  // index into RunHistory::instances()
  std::uint64_t seed;
};

struct RunRecord {
  ConfigId config;
  std::size_t position;  // index into the shared instance/seed order
  double cutoff;
  RunOutcome outcome;
};

/// Append-only ledger of target runs shared by a configurator's comparisons.
///
/// Every configuration walks the same instance/seed order, so "the first p
/// runs" of two configurations are on identical (instance, seed) pairs. A
/// capped run may later be repeated with a larger cutoff; the newer record
/// then supersedes the older one for that position, which stays in the ledger.
class RunHistory {
 public:
  /// Seeds cycle 0, 1, 2, ... per pass over the shuffled instances, or stay 0
  /// for deterministic targets.
  RunHistory(std::vector<std::string> instances, std::uint64_t campaign_seed, bool deterministic,
             std::size_t max_runs_per_config = 2000);

  const std::vector<std::string>& instances() const { return instances_; }
  const std::vector<InstanceSeed>& order() const { return order_; }
  std::size_t max_positions() const { return order_.size(); }
  const std::string& instance_at(std::size_t position) const { return instances_[order_[position].instance]; }

  ConfigId intern(const Configuration& config);
  std::optional<ConfigId> find(const Configuration& config) const;
  const Configuration& config(ConfigId id) const { return configs_[id]; }
  std::size_t num_configs() const { return configs_.size(); }

  /// N(theta): number of leading order positions this configuration has runs for.
  std::size_t num_runs(ConfigId id) const { return slots_[id].size(); }
  /// Latest record for a position, or nullptr.
  const RunRecord* slot(ConfigId id, std::size_t position) const;
  const std::vector<RunRecord>& records() const { return records_; }

  /// Appends a record; `position` must be N(id) or an already covered position.
  void append(ConfigId id, std::size_t position, double cutoff, const RunOutcome& outcome);

  /// Sum of PAR-k costs over the first `prefix` positions (lower bounds included as-is).
  double prefix_cost(ConfigId id, std::size_t prefix, const CostMetric& metric) const;
  bool prefix_exact(ConfigId id, std::size_t prefix) const;

  /// Writes "config_id,instance,seed,status,runtime,capped" rows.
  void write_csv(std::ostream& out) const;
  /// Writes "config_id,configuration" rows.
  void write_configs_csv(std::ostream& out, const ParameterSpace& space) const;

 private:
  std::vector<std::string> instances_;
  std::vector<InstanceSeed> order_;
  std::vector<Configuration> configs_;
  std::unordered_map<Configuration, ConfigId, ConfigurationHash> index_;
  std::vector<std::vector<std::size_t>> slots_;  // record index per covered position
  std::vector<RunRecord> records_;
};

/// PAR-k aggregate over the first `prefix_len` runs of a configuration.
AggregateScore cost_estimate(const RunHistory& history, ConfigId id, std::size_t prefix_len, const CostMetric& metric);

struct CapBound {
  double cutoff;
  double provably_worse_threshold;
  /// The challenger's spend already exceeds the threshold.
  bool rejected;
};

/// Cutoff for the challenger's next run on a prefix given the incumbent's
/// total there; bound_multiplier = kNoCapping disables capping.
CapBound compute_cap(const RunHistory& history, ConfigId incumbent, ConfigId challenger, std::size_t prefix_len,
                     double bound_multiplier, const CostMetric& metric);

struct Budget {
  std::optional<std::size_t> max_runs;
  std::optional<double> max_seconds;

  static Budget runs(std::size_t n) { return {n, std::nullopt}; }
  static Budget seconds(double s) { return {std::nullopt, s}; }
};

/// Thrown out of RunContext when the configurator's budget is spent.
class BudgetExhausted : public std::exception {
 public:
  const char* what() const noexcept override { return "configuration budget exhausted"; }
};

enum class Verdict { challenger_better, incumbent_better, tie };

/// Executes runs for one configurator: owns budget accounting and performs
/// every ledger append.
///
/// Time is measured on a virtual clock (sum of reported runtimes) for
/// in-process targets and on the wall clock otherwise.
class RunContext {
 public:
  RunContext(const Target& target, const ParameterSpace& space, RunHistory& history, CostMetric metric,
             int memory_limit_mb, Budget budget);

  const Target& target() const { return target_; }
  const ParameterSpace& space() const { return space_; }
  RunHistory& history() { return history_; }
  const RunHistory& history() const { return history_; }
  const CostMetric& metric() const { return metric_; }
  int memory_limit_mb() const { return memory_limit_mb_; }

  std::size_t runs_used() const { return runs_used_; }
  double elapsed() const;
  bool exhausted() const;
  /// Throws BudgetExhausted when no further run may start.
  void check_budget() const;

  RunSpec make_spec(ConfigId id, std::size_t position, double cutoff) const;
  /// Runs position `position` for `id` at `cutoff` and appends the result.
  const RunRecord& run(ConfigId id, std::size_t position, double cutoff);
  /// Appends an outcome produced elsewhere (e.g. by a RunPool) and charges the budget.
  const RunRecord& record(ConfigId id, std::size_t position, double cutoff, const RunOutcome& outcome);

  struct PrefixResult {
    double total = 0.0;
    std::size_t covered = 0;
    bool provably_worse = false;
  };

  /// Brings `id` to exact costs on the first `prefix` positions, reusing
  /// exact ledger entries. With a finite `bound` on the cumulative cost, runs
  /// are capped and evaluation stops once the total provably exceeds it.
  PrefixResult evaluate_prefix(ConfigId id, std::size_t prefix, double bound = kNoCapping);

  /// Runs the challenger through the prefix under adaptive capping and
  /// compares exact prefix totals. A capped challenger is never better.
  Verdict compare_capped(ConfigId incumbent, ConfigId challenger, std::size_t prefix, double bound_multiplier);

 private:
  const Target& target_;
  const ParameterSpace& space_;
  RunHistory& history_;
  CostMetric metric_;
  int memory_limit_mb_;
  Budget budget_;
  std::size_t runs_used_ = 0;
  double virtual_seconds_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

struct TrajectoryPoint {
  double time;
  std::size_t ledger_runs;
  ConfigId incumbent;
  std::string configuration;
  double train_cost;
};

/// Trajectory entry for the current incumbent: mean PAR-k over its N runs.
TrajectoryPoint trajectory_point(const RunContext& ctx, ConfigId incumbent);

struct ConfiguratorResult {
  Configuration incumbent;
  std::vector<TrajectoryPoint> trajectory;
  std::size_t runs_used = 0;
  double time_used = 0.0;
  /// The budget ran out before the default completed a single run.
  bool budget_exhausted_early = false;
  /// The configurator's ledger; position p < |train| uses seed 0 on every instance.
  std::shared_ptr<RunHistory> history;
};

CostMetric scenario_metric(const Scenario& scenario);
/// Fresh ledger over the scenario's training instances.
std::shared_ptr<RunHistory> make_history(const Scenario& scenario, std::uint64_t seed);

/// Writes "wallclock_s,ledger_runs,incumbent_id,train_cost" rows.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryPoint>& trajectory);

}  // namespace aconf
