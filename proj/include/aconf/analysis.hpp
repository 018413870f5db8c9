#pragma once

#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "aconf/runner.hpp"
#include "aconf/scenario.hpp"
#include "aconf/scoring.hpp"

namespace aconf {

/// PAR-k(default) / PAR-k(configured) over the instances solved by at least
/// one of the two. Outcomes are matched by instance id. Throws
/// UndefinedStatistic when neither solved anything.
double speedup_factor(const std::vector<InstanceOutcome>& default_outcomes,
                      const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric);

struct SpeedupRecord {
  std::string label;
  std::size_t num_params = 0;
  /// Empty when the speedup is undefined.
  std::optional<double> speedup;
  int metric_k = 10;
};

SpeedupRecord speedup_record(const std::string& label, std::size_t num_params,
                             const std::vector<InstanceOutcome>& default_outcomes,
                             const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric);

/// Writes "label,num_params,speedup,metric_k"; undefined speedups print "undefined".
void write_speedups_csv(std::ostream& out, const std::vector<SpeedupRecord>& records);

/// exp(mean(ln(approach_cost / selected_cost))).
double geometric_mean_slowdown(const std::vector<std::pair<double, double>>& per_scenario);

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(const std::vector<double>& xs);

/// Pearson correlation of average ranks.
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct CorrelationRow {
  std::string configuration;
  double train_cost = 0.0;
  double test_cost = 0.0;
};

struct CorrelationStudy {
  std::vector<CorrelationRow> rows;
  double spearman_all = 0.0;
  /// Over the best max(2, floor(0.2 n)) rows by training cost; empty if undefined.
  std::optional<double> spearman_top;
  std::size_t top_count = 0;
};

std::size_t top_fraction_count(std::size_t n);

/// Samples n configurations uniformly, scores each on the full train and test
/// sets at kappa_max and correlates the two.
CorrelationStudy sample_correlation_study(const Scenario& scenario, const Target& target, std::size_t n,
                                          std::mt19937_64& rng, int workers = 1);

/// Writes "configuration,train_cost,test_cost" rows.
void write_correlation_csv(std::ostream& out, const CorrelationStudy& study);

/// Writes "instance,default_cost,configured_cost,default_status,configured_status"
/// rows; unsolved runs carry k * kappa_max.
void emit_scatter(std::ostream& out, const std::vector<InstanceOutcome>& default_outcomes,
                  const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric);
void emit_scatter(const std::string& path, const std::vector<InstanceOutcome>& default_outcomes,
                  const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric);

}  // namespace aconf
