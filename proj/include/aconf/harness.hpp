#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aconf/gga.hpp"
#include "aconf/paramils.hpp"
#include "aconf/runhistory.hpp"
#include "aconf/scenario.hpp"
#include "aconf/scoring.hpp"
#include "aconf/smac.hpp"

namespace aconf {

enum class Approach { paramils_discretized, gga, gga_discretized, smac, smac_discretized };

std::string to_string(Approach a);
Approach parse_approach(const std::string& s);
const std::vector<Approach>& all_approaches();
bool is_discretized(Approach a);

/// One configurator run of an approach on the scenario's space (discretized
/// with `grid` points per numeric parameter when the approach asks for it).
/// The incumbent is returned in the approach's own space.
ConfiguratorResult run_approach(Approach approach, const Scenario& scenario, const Target& target, Budget budget,
                                std::uint64_t seed, std::size_t grid = 7, int units = 4, const IlsParams& ils = {},
                                const GgaParams& gga = {}, const SmacParams& smac = {});

/// Scenario whose space is the discretized version of `scenario.space`.
Scenario discretized_scenario(const Scenario& scenario, std::size_t grid);

/// Re-expresses a configuration of `from` (e.g. a discretized space) in `to`
/// by parameter names and value labels.
Configuration translate(const ParameterSpace& from, const ParameterSpace& to, const Configuration& config);

/// Runs one configuration on every instance of a set (seeds[i] for instance
/// i), concurrently through a RunPool for process targets.
std::vector<InstanceOutcome> evaluate_instances(const Scenario& scenario, const Target& target,
                                                const Configuration& config, const InstanceSet& instances,
                                                const std::vector<std::uint64_t>& seeds, double cutoff,
                                                int workers = 1);

/// Seed 0 everywhere for deterministic targets, else one draw per instance from `seed`.
std::vector<std::uint64_t> instance_seeds(const Scenario& scenario, std::size_t count, std::uint64_t seed);

/// Test-set evaluation at `cutoff_override` or the scenario's kappa_max.
std::vector<InstanceOutcome> test_outcomes(const Scenario& scenario, const Target& target, const Configuration& config,
                                           std::optional<double> cutoff_override = std::nullopt, int workers = 1);
AggregateScore test_evaluate(const Scenario& scenario, const Target& target, const Configuration& config,
                             std::optional<double> cutoff_override = std::nullopt, int workers = 1);

struct CampaignPlan {
  Scenario scenario;
  std::vector<Approach> approaches = all_approaches();
  /// Independent runs for paramils and smac approaches.
  std::size_t independent_runs = 4;
  /// Concurrent race width of the single gga run (also the evaluation pool width).
  int units = 4;
  Budget budget;
  std::uint64_t seed = 0;
  std::size_t grid = 7;
  /// Per-run trajectories and ledgers go below this directory when set.
  std::string out_dir;
  IlsParams ils;
  GgaParams gga;
  SmacParams smac;
};

struct IncumbentEntry {
  Approach approach;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  /// Incumbent in the scenario's native space.
  Configuration config;
  std::string config_text;
  AggregateScore train;
  std::size_t runs_used = 0;
};

struct ApproachFailure {
  Approach approach;
  std::size_t run = 0;
  std::string message;
};

struct CampaignReport {
  std::vector<IncumbentEntry> incumbents;
  std::vector<ApproachFailure> failures;
  /// Index into `incumbents`; empty when nothing succeeded and the default was kept.
  std::optional<std::size_t> selected;
  Configuration selected_config;
  std::string selected_text;
  std::string default_text;
  AggregateScore default_train;
  AggregateScore default_test;
  AggregateScore configured_test;
  std::vector<InstanceOutcome> default_test_outcomes;
  std::vector<InstanceOutcome> configured_test_outcomes;
  /// Number of configurations evaluated on the test set besides the default; always 1.
  std::size_t configured_test_evaluations = 0;
  double cutoff = 0.0;
  int par_k = 10;
};

/// Runs every approach, validates each incumbent on the full training set
/// with uncapped runs, selects the training-best (ties by approach name, then
/// configuration text) and evaluates only the default and the selection on
/// the test set. A failing approach is recorded and skipped.
CampaignReport run_campaign(const CampaignPlan& plan, const Target& target);

/// Human-readable "default -> configured" summary.
void write_report_text(std::ostream& out, const CampaignReport& report);
/// Machine-readable report rows.
void write_report_csv(std::ostream& out, const CampaignReport& report);

/// Ranks competitors by pooled configured test outcomes over several
/// benchmarks (one report per benchmark, listed in the same order for every
/// competitor). Throws if the pooled instance universes differ.
std::vector<RankingEntry> rank_campaigns(
    const std::vector<std::pair<std::string, std::vector<CampaignReport>>>& entries, const CostMetric& metric);

}  // namespace aconf
