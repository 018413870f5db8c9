#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "aconf/runhistory.hpp"
#include "aconf/scenario.hpp"

namespace aconf {

struct GgaParams {
  std::size_t units = 4;
  std::size_t population = 50;
  std::size_t g_target = 75;
  std::size_t g_max = 100;
  std::size_t n_start = 4;
  /// Defaults to the number of training instances.
  std::optional<std::size_t> n_target;
  double mutation_rate = 0.05;
  /// Genomes older than this many generations leave the population.
  std::size_t max_age = 3;
};

enum class Gender { competitive, noncompetitive };

struct Genome {
  Configuration config;
  Gender gender = Gender::competitive;
  std::size_t age = 0;
};

/// N(g) = round(N_start + (N_target - N_start) * min(1, (g-1)/(G_target-1))).
std::size_t intensification_schedule(const GgaParams& params, std::size_t n_target, std::size_t generation);

/// Throws UnsupportedSpace for condition chains deeper than two or numeric parents.
void check_gga_space(const ParameterSpace& space);

/// Shuffled balanced gender list: ceil(n/2) competitive, floor(n/2) noncompetitive.
std::vector<Gender> assign_genders(std::size_t n, std::mt19937_64& rng);

/// Uniform crossover; numeric genes draw from the interval spanned by the parents.
Configuration recombine(const ParameterSpace& space, const Configuration& competitive,
                        const Configuration& noncompetitive, std::mt19937_64& rng);

/// Resamples each active gene with probability `rate`; forbidden results are discarded.
Configuration mutate(const ParameterSpace& space, const Configuration& config, double rate, std::mt19937_64& rng);

struct RaceResult {
  ConfigId winner = 0;
  /// Exact PAR-k total of the winner over the prefix.
  double total = 0.0;
};

/// Tournament over the first `prefix` positions. In-process targets (or
/// units = 1) race sequentially, capping each candidate at the best total so
/// far; otherwise up to `units` candidates run concurrently and are cut off
/// once a sibling finishes with a smaller total. Ties go to the
/// lexicographically first configuration string.
RaceResult race(RunContext& ctx, const std::vector<ConfigId>& candidates, std::size_t prefix, std::size_t units);

ConfiguratorResult run_gga(const Scenario& scenario, const Target& target, Budget budget, std::uint64_t seed,
                           GgaParams params = {});

}  // namespace aconf
