#pragma once

#include <cstdint>
#include <random>

#include "aconf/runhistory.hpp"
#include "aconf/scenario.hpp"

namespace aconf {

enum class IlsVariant { focused, basic };

struct IlsParams {
  IlsVariant variant = IlsVariant::focused;
  std::size_t perturbation_strength = 3;
  double restart_probability = 0.01;
  std::size_t random_initial = 10;
  /// Runs per configuration for BasicILS(N).
  std::size_t n_basic = 100;
  /// Adaptive-capping bound multiplier; kNoCapping disables capping.
  double bound_multiplier = 2.0;
};

struct IlsState {
  ConfigId current = 0;
  ConfigId incumbent = 0;
  std::mt19937_64 rng;
};

/// Outcome of one ILS comparison of a new configuration against an old one.
enum class IlsComparison { better, tie, worse };

/// True iff N(a) >= N(b) and a's cost on b's N-run prefix is no larger.
bool dominates(const RunHistory& history, ConfigId a, ConfigId b, const CostMetric& metric);

/// Decision engine shared by BasicILS and FocusedILS.
class IteratedLocalSearch {
 public:
  IteratedLocalSearch(RunContext& ctx, IlsParams params, std::uint64_t seed);

  IlsState& state() { return state_; }
  const std::vector<TrajectoryPoint>& trajectory() const { return trajectory_; }

  /// Compares `challenger` against `reference`, performing whatever runs the
  /// variant requires (FocusedILS: until one dominates the other).
  IlsComparison compare(ConfigId challenger, ConfigId reference);

  /// First-improvement step from `state().current`; false at a local optimum.
  bool local_search_step();
  void local_search();
  /// s random neighbor moves, or a uniform restart with probability p_restart.
  Configuration perturb(const Configuration& from);
  /// The new optimum replaces the old one unless it is worse.
  ConfigId accept(ConfigId old_optimum, ConfigId new_optimum);

  /// Default plus r random starts, then ILS until the budget is exhausted.
  void run();

 private:
  void ensure_run(ConfigId id, std::size_t position, double cutoff);
  void make_exact(ConfigId id);
  IlsComparison compare_focused(ConfigId challenger, ConfigId reference);
  IlsComparison compare_basic(ConfigId challenger, ConfigId reference);
  void consider_incumbent(ConfigId candidate);

  RunContext& ctx_;
  IlsParams params_;
  IlsState state_;
  std::size_t comparisons_since_improvement_ = 0;
  std::vector<TrajectoryPoint> trajectory_;
};

/// FocusedILS (or BasicILS per `params.variant`) on a discrete space.
ConfiguratorResult run_focused_ils(const Scenario& scenario, const Target& target, Budget budget, std::uint64_t seed,
                                   IlsParams params = {});

}  // namespace aconf
