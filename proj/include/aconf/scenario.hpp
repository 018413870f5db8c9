#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aconf/paramspace.hpp"

namespace aconf {

enum class ExpectedStatus { sat, unsat, unknown };

struct Instance {
  std::string id;
  ExpectedStatus expected = ExpectedStatus::unknown;
};

struct InstanceSet {
  std::vector<Instance> instances;

  std::size_t size() const { return instances.size(); }
  bool contains(const std::string& id) const;
  const Instance* find(const std::string& id) const;
};

struct InstanceFeatures {
  std::vector<std::string> feature_names;
  std::map<std::string, std::vector<double>> rows;

  const std::vector<double>* row(const std::string& id) const {
    auto it = rows.find(id);
    return it == rows.end() ? nullptr : &it->second;
  }
  /// True iff every instance of `set` has a feature row.
  bool covers(const InstanceSet& set) const;
};

/// A configuration task.
struct Scenario {
  std::string target_command;
  std::string instance_info = "0";
  std::string execdir = ".";
  ParameterSpace space;
  InstanceSet train;
  InstanceSet test;
  std::optional<InstanceFeatures> features;
  double cutoff_seconds = 300.0;
  int memory_limit_mb = 3072;
  double wallclock_budget_seconds = 172800.0;
  int cores = 1;
  int par_k = 10;
  bool deterministic_target = false;
  std::uint64_t seed = 0;
};

/// Parses "key = value" scenario text. Relative file references resolve
/// against `base_dir`.
Scenario parse_scenario(const std::string& text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

InstanceSet parse_instances(const std::string& text);
InstanceSet load_instances(const std::string& path);

/// Feature CSV with header "instance,<f1>,<f2>,..."; rows for ids outside
/// `train` are dropped with a warning on stderr.
InstanceFeatures parse_features(const std::string& text, const InstanceSet& train);
InstanceFeatures load_features(const std::string& path, const InstanceSet& train);

std::string to_string(ExpectedStatus s);

}  // namespace aconf
