#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aconf/error.hpp"

namespace aconf {

enum class ParamKind { categorical, integer, real };

/// Sentinel stored for parameters whose conditions are not satisfied.
inline const double kInactive = std::numeric_limits<double>::quiet_NaN();

inline bool is_inactive(double v) { return std::isnan(v); }

/// One parameter of a configuration space.
///
/// Values are carried as doubles everywhere: categorical parameters store the
/// index into `values`, numeric parameters store the number itself (integers
/// are integral doubles).
struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::categorical;
  std::vector<std::string> values;  // categorical only
  double lo = 0.0;
  double hi = 0.0;
  double default_value = 0.0;
  bool log_scale = false;

  bool is_numeric() const { return kind != ParamKind::categorical; }
  bool in_domain(double v) const;
  /// Number of distinct values for categorical parameters; 0 for numeric ones.
  std::size_t cardinality() const { return is_numeric() ? 0 : values.size(); }

  std::string format(double v) const;
  std::optional<double> parse(std::string_view text) const;
  /// Numeric reading of a value: the number itself for numeric parameters, the
  /// parsed category label for categoricals whose label is a number (as
  /// produced by discretization), NaN otherwise.
  double numeric_value(double v) const;

  bool operator==(const ParameterSpec&) const = default;
};

struct ConditionClause {
  std::string child;
  std::string parent;
  std::vector<double> allowed_values;  // encoded in the parent's value space

  bool operator==(const ConditionClause&) const = default;
};

struct ForbiddenClause {
  std::vector<std::pair<std::string, double>> assignments;

  bool operator==(const ForbiddenClause&) const = default;
};

/// A point in a ParameterSpace, aligned with the space's parameter order.
///
/// Equality and hashing are bitwise on the canonical value vector, with every
/// INACTIVE entry treated as equal. Construct through ParameterSpace so values
/// are canonical.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<double> values) : values_(std::move(values)) {
    for (auto& v : values_) {
      if (std::isnan(v)) v = kInactive;
      if (v == 0.0) v = 0.0;  // fold -0.0
    }
  }

  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  bool operator==(const Configuration& other) const;
  std::uint64_t hash() const;

 private:
  std::vector<double> values_;
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& c) const { return static_cast<std::size_t>(c.hash()); }
};

enum class ViolationKind { out_of_domain, non_canonical_inactive, forbidden };

struct Violation {
  ViolationKind kind;
  std::string parameter;  // empty for forbidden matches
  std::string detail;
};

class ParameterSpace {
 public:
  ParameterSpace() = default;
  /// Validates every structural invariant; throws SpaceError on violation.
  ParameterSpace(std::vector<ParameterSpec> params, std::vector<ConditionClause> conditions,
                 std::vector<ForbiddenClause> forbidden);

  const std::vector<ParameterSpec>& parameters() const { return params_; }
  const std::vector<ConditionClause>& conditions() const { return conditions_; }
  const std::vector<ForbiddenClause>& forbidden() const { return forbidden_; }
  std::size_t size() const { return params_.size(); }

  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  const ParameterSpec& param(std::string_view name) const { return params_[index_of(name)]; }

  /// Parameters in an order where every parent precedes its children.
  const std::vector<std::size_t>& topological_order() const { return topo_; }
  /// Longest parent chain, counted in parameters (1 for unconditional spaces).
  std::size_t condition_depth() const;
  bool has_conditions_on(std::size_t i) const { return !parents_[i].empty(); }
  bool is_discrete() const;

  bool is_active(const Configuration& config, std::string_view name) const;
  bool is_active(const std::vector<double>& values, std::size_t i) const;

  /// Resolves activity top-down: inactive parameters become INACTIVE and
  /// newly active ones take their default.
  Configuration canonicalize(std::vector<double> values) const;
  Configuration default_configuration() const;

  std::vector<Violation> validate(const Configuration& config) const;
  bool is_valid(const Configuration& config) const { return validate(config).empty(); }
  bool is_forbidden(const Configuration& config) const;

  Configuration sample_uniform(std::mt19937_64& rng, std::size_t max_attempts = 10000) const;
  /// Uniform draw for one parameter ignoring conditions and forbidden clauses.
  double sample_value(std::size_t i, std::mt19937_64& rng) const;

  ParameterSpace discretize(std::size_t grid_size = 7) const;
  /// One-exchange neighborhood; requires a discrete space.
  std::vector<Configuration> neighbors(const Configuration& config) const;

  /// Canonical text form "a=1 b=x c=INACTIVE"; also the lexicographic key for
  /// deterministic tiebreaks.
  std::string to_string(const Configuration& config) const;
  /// Value of `name` as it would appear on a wrapper command line; nullopt if inactive.
  std::optional<std::string> value_string(const Configuration& config, std::string_view name) const;
  /// Builds a configuration from name/value text pairs; missing parameters take
  /// defaults, then the result is canonicalized.
  Configuration from_strings(const std::vector<std::pair<std::string, std::string>>& assignments) const;

  bool operator==(const ParameterSpace& other) const {
    return params_ == other.params_ && conditions_ == other.conditions_ && forbidden_ == other.forbidden_;
  }

 private:
  struct ParentLink {
    std::size_t parent;
    std::vector<double> allowed;
  };

  using ResolvedClause = std::vector<std::pair<std::size_t, double>>;

  bool clause_matches(const ResolvedClause& clause, const std::vector<double>& values) const;

  std::vector<ParameterSpec> params_;
  std::vector<ConditionClause> conditions_;
  std::vector<ForbiddenClause> forbidden_;
  std::vector<std::vector<ParentLink>> parents_;
  std::vector<ResolvedClause> forbidden_resolved_;
  std::vector<std::size_t> topo_;
};

ParameterSpace parse_pcs(std::string_view text);
ParameterSpace load_pcs(const std::string& path);
std::string serialize_pcs(const ParameterSpace& space);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

}  // namespace aconf
