#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aconf/paramspace.hpp"
#include "aconf/runner.hpp"
#include "aconf/scenario.hpp"
#include "aconf/scoring.hpp"

namespace aconf {

enum class SurfaceKind { valley, conditional_trap, crash_region, forbidden_edge, two_cluster };

std::string to_string(SurfaceKind k);
SurfaceKind parse_surface_kind(const std::string& s);

/// One additive distance term of the valley. Categorical terms name an
/// optimal label (distance 0 or 1); numeric terms measure normalized distance
/// to `optimum` over [lo, hi], in log space when `log_scale`.
struct SurfaceTerm {
  std::string param;
  std::optional<std::string> label_optimum;
  double optimum = 0.0;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = false;
  double weight = 1.0;
};

struct TrapSwitch {
  std::string param;
  std::string on_value;
  double trap_runtime = 1.0;
};

/// Crash predicate: a categorical label match, or a closed numeric interval.
struct CrashRegion {
  std::string param;
  std::optional<std::string> label;
  double lo = 0.0;
  double hi = 0.0;
};

struct ClusterSpec {
  double multiplier = 1.0;
  /// Per-cluster optimum overrides keyed by parameter name (numeric or label).
  std::map<std::string, std::string> optima;
};

/// Synthetic target algorithm with an analytically known runtime surface.
struct SyntheticSurface {
  SurfaceKind kind = SurfaceKind::valley;
  double base_runtime = 1.0;
  /// Multiplicative lognormal noise; 0 for deterministic targets.
  double noise_sigma = 0.0;
  /// Per-instance hardness factor exp(spread * (u - 0.5)), u a hash of the id.
  double instance_spread = 0.0;
  std::vector<SurfaceTerm> terms;
  std::optional<TrapSwitch> trap;
  std::optional<CrashRegion> crash;
  std::vector<ClusterSpec> clusters;
  /// Wrapper executable only: actually sleep for the computed runtime.
  bool sleep = false;
};

SyntheticSurface parse_surface_json(const std::string& text);
SyntheticSurface load_surface(const std::string& path);
std::string surface_to_json(const SyntheticSurface& surface);

/// Cluster an instance belongs to: ids of the form "c<k>_..." name it
/// explicitly, otherwise a hash of the id decides.
std::size_t instance_cluster(const SyntheticSurface& surface, const std::string& instance);
double instance_factor(const SyntheticSurface& surface, const std::string& instance);

/// Parameter values by name as label text; inactive parameters are absent.
using NamedValues = std::map<std::string, std::string>;

NamedValues named_values(const ParameterSpace& space, const Configuration& config);

/// Runtime the surface assigns before cutoff handling; nullopt inside a crash region.
std::optional<double> surface_runtime(const SyntheticSurface& surface, const NamedValues& values,
                                      const std::string& instance, std::uint64_t seed);

/// One synthetic run: a pure function of its inputs.
RunOutcome eval_surface(const SyntheticSurface& surface, const NamedValues& values, const std::string& instance,
                        std::uint64_t seed, double cutoff, double kappa_max,
                        ExpectedStatus expected = ExpectedStatus::unknown);
RunOutcome eval_surface(const SyntheticSurface& surface, const ParameterSpace& space, const Configuration& config,
                        const std::string& instance, std::uint64_t seed, double cutoff, double kappa_max,
                        ExpectedStatus expected = ExpectedStatus::unknown);

/// In-process target backed by a surface.
class SyntheticTarget : public Target {
 public:
  SyntheticTarget(SyntheticSurface surface, double kappa_max, InstanceSet known = {});
  RunOutcome run(const ParameterSpace& space, const RunSpec& spec, RunControl* control) const override;
  bool in_process() const override { return true; }
  const SyntheticSurface& surface() const { return surface_; }

 private:
  SyntheticSurface surface_;
  double kappa_max_;
  InstanceSet known_;
};

/// Scenario algo strings of the form "synthetic:<surface.json>" run in process.
inline constexpr const char* kSyntheticPrefix = "synthetic:";

/// Target for a scenario: in-process synthetic surface or a wrapper process.
std::unique_ptr<Target> make_target(const Scenario& scenario, const std::string& log_dir = {});
std::optional<SyntheticSurface> scenario_surface(const Scenario& scenario);

/// Every valid configuration of a discrete space, in enumeration order.
std::vector<Configuration> enumerate_space(const ParameterSpace& space, std::size_t limit = 1000000);

/// Noise-free PAR-k score of a configuration on an instance set (seed 0).
AggregateScore surface_score(const SyntheticSurface& surface, const ParameterSpace& space, const Configuration& config,
                             const InstanceSet& instances, const CostMetric& metric);

struct OracleResult {
  ParameterSpace space;  // the enumerated (discretized) space
  Configuration config;
  AggregateScore score;
  std::size_t evaluated = 0;
};

/// Exhaustive argmin over the space discretized with `grid` (ties keep the first).
OracleResult brute_force_optimum(const SyntheticSurface& surface, const ParameterSpace& space, std::size_t grid,
                                 const CostMetric& metric, const InstanceSet& train);

/// Ready-made synthetic scenario pieces.
struct SyntheticBundle {
  ParameterSpace space;
  SyntheticSurface surface;
  InstanceSet train;
  InstanceSet test;
  std::optional<InstanceFeatures> features;
  double cutoff = 2.0;
};

struct BundleOptions {
  std::size_t train = 50;
  std::size_t test = 50;
  double cutoff = 2.0;
  double noise_sigma = 0.0;
  /// two_cluster only: fraction of train (resp. test) instances in cluster 0.
  double train_cluster0 = 0.9;
  double test_cluster0 = 0.1;
  std::uint64_t seed = 1;
};

SyntheticBundle standard_bundle(SurfaceKind kind, const BundleOptions& options = {});

/// Builds a Scenario around a bundle, running the surface in process.
Scenario bundle_scenario(const SyntheticBundle& bundle, std::uint64_t seed = 0);

/// Writes space.pcs, surface.json, train.txt, test.txt, optional features.csv
/// and scenario.txt into `dir`. `algo` overrides the in-process target string.
void write_bundle(const SyntheticBundle& bundle, const std::string& dir, std::uint64_t seed,
                  const std::string& algo = {});

}  // namespace aconf
