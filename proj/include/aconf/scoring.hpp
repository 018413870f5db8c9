#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aconf/runner.hpp"

namespace aconf {

struct AggregateScore {
  double mean_cost = 0.0;
  std::size_t solved_count = 0;
  std::size_t attempted_count = 0;
  /// Some contributing run was capped, so mean_cost is only a lower bound.
  bool lower_bound = false;
};

/// PAR-k mean over one outcome per instance.
AggregateScore aggregate(const std::vector<RunOutcome>& outcomes, const CostMetric& metric);

/// Per-instance results of one competitor.
struct InstanceOutcome {
  std::string instance;
  RunOutcome outcome;
};

struct RankingEntry {
  std::string label;
  std::size_t solved_count = 0;
  /// Mean runtime over the instances this entry solved; 0 when it solved none.
  double mean_runtime_solved = 0.0;
  double par_k = 0.0;
};

/// Orders by solved count (descending), then mean runtime on solved instances
/// (ascending), then label. Throws if the entries cover different instances.
std::vector<RankingEntry> rank(const std::vector<std::pair<std::string, std::vector<InstanceOutcome>>>& entries,
                               const CostMetric& metric);

}  // namespace aconf
