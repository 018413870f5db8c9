#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "aconf/runhistory.hpp"
#include "aconf/scenario.hpp"

namespace aconf {

struct ForestParams {
  std::size_t num_trees = 40;
  double max_features_frac = 5.0 / 6.0;
  std::size_t min_samples_leaf = 3;
  bool bootstrap = true;
  std::size_t max_depth = 40;
  std::uint64_t seed = 0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Maps configurations (and optional instance features) to fixed-length
/// numeric vectors: categorical index, numerics min-max scaled (in log space
/// when flagged), plus an activity bit per conditional parameter. Inactive
/// parameters take the default's encoding.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const ParameterSpace& space, std::size_t num_features = 0);

  std::size_t dims() const { return cardinality_.size(); }
  /// Category count per dimension; 0 marks a numeric dimension.
  const std::vector<std::size_t>& cardinality() const { return cardinality_; }
  std::vector<double> encode(const Configuration& config, const std::vector<double>* features = nullptr) const;

 private:
  struct Slot {
    std::size_t param;
    bool activity_bit;
  };
  ParameterSpace space_;
  std::vector<Slot> slots_;
  std::vector<double> default_encoding_;
  std::vector<std::size_t> cardinality_;
  std::size_t num_features_ = 0;
};

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::vector<char> left_categories;
    int left = -1;
    int right = -1;
    double mean = 0.0;
    double variance = 0.0;
    std::size_t count = 0;
  };

  void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y, std::vector<std::size_t> rows,
           const std::vector<std::size_t>& cardinality, const ForestParams& params, std::mt19937_64& rng);
  /// Leaf (mean, variance) for an input.
  Prediction predict(const std::vector<double>& x) const;
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  /// `sorted[f]` holds the node's rows ordered by input f (numeric inputs).
  int build(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
            std::vector<std::vector<std::size_t>>& sorted, const std::vector<std::size_t>& cardinality, const ForestParams& params, std::mt19937_64& rng,
            std::size_t depth);
  std::vector<Node> nodes_;
  std::vector<char> goes_left_;
};

class RandomForest {
 public:
  /// Throws InsufficientData with fewer than two rows or two distinct inputs.
  void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const std::vector<std::size_t>& cardinality, const ForestParams& params);
  /// mean = average of tree means; variance = variance of tree means plus mean leaf variance.
  Prediction predict(const std::vector<double>& x) const;
  std::size_t num_trees() const { return trees_.size(); }
  /// Diagnostic text dump of every tree.
  std::string dump() const;

 private:
  std::vector<RegressionTree> trees_;
};

/// EI = (f* - mu) Phi(z) + sigma phi(z), z = (f* - mu) / sigma; max(0, f* - mu) at sigma = 0.
double expected_improvement(double mean, double variance, double incumbent_log_cost);

/// Model response for one run: log10 of its penalized cost, floored at 0.005 s.
double log_cost(const RunOutcome& outcome, const CostMetric& metric);

/// Random-forest performance model fitted on a run history.
class SmacModel {
 public:
  /// Rows per configuration (mean log-cost) without usable features, per run otherwise.
  static SmacModel fit(const RunHistory& history, const ParameterSpace& space,
                       const std::optional<InstanceFeatures>& features, const CostMetric& metric,
                       const ForestParams& params);

  bool uses_features() const { return !train_features_.empty(); }
  const Encoder& encoder() const { return encoder_; }
  const RandomForest& forest() const { return forest_; }

  Prediction predict(const Configuration& config, const std::vector<double>* features = nullptr) const;
  /// Mean over training instances of the per-instance predicted means (or predict without features).
  double marginal_predict(const Configuration& config) const;
  /// Marginal mean with the average per-instance variance.
  Prediction marginal(const Configuration& config) const;

 private:
  Encoder encoder_;
  RandomForest forest_;
  std::vector<std::vector<double>> train_features_;
};

struct SmacParams {
  ForestParams forest;
  /// Challengers per iteration, alternating model-guided and random.
  std::size_t challengers = 10;
  /// The list grows to (#configurations seen) / challenger_growth so that
  /// model fitting does not dominate once the history is large.
  std::size_t challenger_growth = 10;
  std::size_t random_samples = 1000;
  std::size_t local_search_starts = 10;
  std::size_t numeric_neighbors = 4;
  double neighbor_sigma = 0.2;
  double bound_multiplier = 2.0;
};

/// Neighbors used by the EI local search: every other value of each active
/// categorical, and Gaussian steps in scaled space for each active numeric.
std::vector<Configuration> smac_neighbors(const ParameterSpace& space, const Configuration& config,
                                          const SmacParams& params, std::mt19937_64& rng);

/// Alternates EI-maximizing local-search results with uniform random
/// configurations; without a model every entry is random.
std::vector<Configuration> select_challengers(const SmacModel* model, const ParameterSpace& space,
                                              const Configuration& incumbent, double incumbent_log_cost,
                                              std::mt19937_64& rng, std::size_t n, const SmacParams& params = {});

ConfiguratorResult run_smac(const Scenario& scenario, const Target& target, Budget budget, std::uint64_t seed,
                            SmacParams params = {});

}  // namespace aconf
