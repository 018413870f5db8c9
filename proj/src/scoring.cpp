#include "aconf/scoring.hpp"

#include <algorithm>
#include <set>

namespace aconf {

AggregateScore aggregate(const std::vector<RunOutcome>& outcomes, const CostMetric& metric) {
  if (outcomes.empty()) throw InsufficientData("cannot aggregate an empty outcome list");
  AggregateScore s;
  double total = 0.0;
  for (const auto& o : outcomes) {
    total += penalized_cost(o, metric);
    if (o.solved()) ++s.solved_count;
    if (is_lower_bound(o)) s.lower_bound = true;
  }
  s.attempted_count = outcomes.size();
  s.mean_cost = total / static_cast<double>(outcomes.size());
  return s;
}

std::vector<RankingEntry> rank(const std::vector<std::pair<std::string, std::vector<InstanceOutcome>>>& entries,
                               const CostMetric& metric) {
  std::vector<RankingEntry> out;
  std::set<std::string> universe;
  bool first = true;
  for (const auto& [label, results] : entries) {
    std::set<std::string> ids;
    for (const auto& r : results) ids.insert(r.instance);
    if (ids.size() != results.size()) throw Error("entry '" + label + "' lists an instance twice");
    if (first) {
      universe = ids;
      first = false;
    } else if (ids != universe) {
      throw Error("entry '" + label + "' was evaluated on a different instance set");
    }

    RankingEntry e;
    e.label = label;
    double solved_time = 0.0, total = 0.0;
    for (const auto& r : results) {
      total += penalized_cost(r.outcome, metric);
      if (r.outcome.solved()) {
        ++e.solved_count;
        solved_time += r.outcome.runtime;
      }
    }
    e.mean_runtime_solved = e.solved_count ? solved_time / static_cast<double>(e.solved_count) : 0.0;
    e.par_k = results.empty() ? 0.0 : total / static_cast<double>(results.size());
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.solved_count != b.solved_count) return a.solved_count > b.solved_count;
    if (a.mean_runtime_solved != b.mean_runtime_solved) return a.mean_runtime_solved < b.mean_runtime_solved;
    return a.label < b.label;
  });
  return out;
}

}  // namespace aconf
