#include "aconf/paramspace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <functional>
#include <unordered_set>

#include "space_check.hpp"

namespace aconf {

namespace {

bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

std::uint64_t bits_of(double v) {
  if (std::isnan(v)) return 0x7ff8dead00000000ULL;
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

bool contains(const std::vector<double>& set, double v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

// Rounds to 12 significant digits so grid points print as short decimals.
double snap(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// ParameterSpec

bool ParameterSpec::in_domain(double v) const {
  if (is_inactive(v)) return false;
  switch (kind) {
    case ParamKind::categorical:
      return is_integral(v) && v >= 0 && v < static_cast<double>(values.size());
    case ParamKind::integer:
      return is_integral(v) && v >= lo && v <= hi;
    case ParamKind::real:
      return std::isfinite(v) && v >= lo && v <= hi;
  }
  return false;
}

std::string ParameterSpec::format(double v) const {
  if (is_inactive(v)) return "INACTIVE";
  switch (kind) {
    case ParamKind::categorical:
      return values.at(static_cast<std::size_t>(v));
    case ParamKind::integer:
      return std::to_string(std::llround(v));
    case ParamKind::real:
      return format_number(v);
  }
  return {};
}

std::optional<double> ParameterSpec::parse(std::string_view text) const {
  if (kind == ParamKind::categorical) {
    auto it = std::find(values.begin(), values.end(), text);
    if (it == values.end()) return std::nullopt;
    return static_cast<double>(it - values.begin());
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  if (kind == ParamKind::integer && !is_integral(v)) return std::nullopt;
  return v;
}

double ParameterSpec::numeric_value(double v) const {
  if (is_inactive(v)) return kInactive;
  if (is_numeric()) return v;
  const auto& label = values.at(static_cast<std::size_t>(v));
  double out = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), out);
  if (ec != std::errc() || ptr != label.data() + label.size()) return kInactive;
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

bool Configuration::operator==(const Configuration& other) const {
  if (values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (bits_of(values_[i]) != bits_of(other.values_[i])) return false;
  }
  return true;
}

std::uint64_t Configuration::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : values_) {
    std::uint64_t b = bits_of(v);
    for (int k = 0; k < 8; ++k) {
      h ^= (b >> (8 * k)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Structural checks shared with the PCS parser

namespace detail {

void check_space(const std::vector<ParameterSpec>& params, const std::vector<ConditionClause>& conditions,
                 const std::vector<ForbiddenClause>& forbidden, const SourceLines* lines) {
  auto line_of = [&](const std::vector<int> SourceLines::*field, std::size_t i) {
    if (lines == nullptr) return 0;
    const auto& v = lines->*field;
    return i < v.size() ? v[i] : 0;
  };
  auto find = [&](const std::string& name) -> const ParameterSpec* {
    for (const auto& p : params)
      if (p.name == name) return &p;
    return nullptr;
  };

  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    int line = line_of(&SourceLines::params, i);
    if (!valid_name(p.name)) throw SpaceError("invalid parameter name '" + p.name + "'", line);
    for (std::size_t j = 0; j < i; ++j)
      if (params[j].name == p.name) throw SpaceError("duplicate parameter '" + p.name + "'", line);
    if (p.kind == ParamKind::categorical) {
      if (p.values.empty()) throw SpaceError("empty domain for '" + p.name + "'", line);
      for (std::size_t a = 0; a < p.values.size(); ++a)
        for (std::size_t b = a + 1; b < p.values.size(); ++b)
          if (p.values[a] == p.values[b])
            throw SpaceError("duplicate value '" + p.values[a] + "' in '" + p.name + "'", line);
    } else {
      if (!(p.lo < p.hi)) throw SpaceError("empty interval for '" + p.name + "'", line);
      if (p.log_scale && !(p.lo > 0)) throw SpaceError("log-scale '" + p.name + "' needs a positive lower bound", line);
      if (p.kind == ParamKind::integer && (!is_integral(p.lo) || !is_integral(p.hi)))
        throw SpaceError("integer '" + p.name + "' has non-integral bounds", line);
    }
    if (!p.in_domain(p.default_value)) throw SpaceError("default of '" + p.name + "' lies outside its domain", line);
  }

  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const auto& c = conditions[i];
    int line = line_of(&SourceLines::conditions, i);
    const auto* child = find(c.child);
    const auto* parent = find(c.parent);
    if (child == nullptr) throw SpaceError("condition on unknown parameter '" + c.child + "'", line);
    if (parent == nullptr) throw SpaceError("condition names unknown parent '" + c.parent + "'", line);
    if (c.child == c.parent) throw SpaceError("parameter '" + c.child + "' conditioned on itself", line);
    if (c.allowed_values.empty()) throw SpaceError("condition on '" + c.child + "' allows no values", line);
    for (double v : c.allowed_values)
      if (!parent->in_domain(v)) throw SpaceError("condition value outside the domain of '" + c.parent + "'", line);
  }

  // Cycle detection by DFS over child -> parent edges.
  std::vector<int> state(params.size(), 0);
  auto idx = [&](const std::string& name) {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].name == name) return i;
    return params.size();
  };
  std::function<void(std::size_t)> visit = [&](std::size_t node) {
    state[node] = 1;
    for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
      if (idx(conditions[ci].child) != node) continue;
      std::size_t parent = idx(conditions[ci].parent);
      if (state[parent] == 1)
        throw SpaceError("cyclic conditions through '" + params[node].name + "'",
                         line_of(&SourceLines::conditions, ci));
      if (state[parent] == 0) visit(parent);
    }
    state[node] = 2;
  };
  for (std::size_t i = 0; i < params.size(); ++i)
    if (state[i] == 0) visit(i);

  for (std::size_t i = 0; i < forbidden.size(); ++i) {
    int line = line_of(&SourceLines::forbidden, i);
    if (forbidden[i].assignments.empty()) throw SpaceError("empty forbidden clause", line);
    for (const auto& [name, value] : forbidden[i].assignments) {
      const auto* p = find(name);
      if (p == nullptr) throw SpaceError("forbidden clause names unknown parameter '" + name + "'", line);
      if (!p->in_domain(value)) throw SpaceError("forbidden value outside the domain of '" + name + "'", line);
    }
  }
}

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  for (char ch : name) {
    bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '@' || ch == ':' || ch == '.' ||
              ch == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// ParameterSpace

ParameterSpace::ParameterSpace(std::vector<ParameterSpec> params, std::vector<ConditionClause> conditions,
                               std::vector<ForbiddenClause> forbidden)
    : params_(std::move(params)), conditions_(std::move(conditions)), forbidden_(std::move(forbidden)) {
  detail::check_space(params_, conditions_, forbidden_, nullptr);

  parents_.assign(params_.size(), {});
  for (const auto& c : conditions_) {
    parents_[index_of(c.child)].push_back({index_of(c.parent), c.allowed_values});
  }
  for (const auto& f : forbidden_) {
    ResolvedClause r;
    for (const auto& [name, value] : f.assignments) r.emplace_back(index_of(name), value);
    forbidden_resolved_.push_back(std::move(r));
  }

  // Kahn's algorithm, always releasing the lowest ready index for a stable order.
  std::vector<std::size_t> pending(params_.size(), 0);
  for (std::size_t i = 0; i < params_.size(); ++i) pending[i] = parents_[i].size();
  std::vector<bool> done(params_.size(), false);
  while (topo_.size() < params_.size()) {
    std::size_t next = params_.size();
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!done[i] && pending[i] == 0) {
        next = i;
        break;
      }
    }
    done[next] = true;
    topo_.push_back(next);
    for (std::size_t i = 0; i < params_.size(); ++i)
      for (const auto& link : parents_[i])
        if (link.parent == next) --pending[i];
  }

  if (is_forbidden(default_configuration())) throw SpaceError("default configuration is forbidden");
}

std::optional<std::size_t> ParameterSpace::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

std::size_t ParameterSpace::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw SpaceError("unknown parameter '" + std::string(name) + "'");
  return *i;
}

std::size_t ParameterSpace::condition_depth() const {
  std::vector<std::size_t> depth(params_.size(), 1);
  for (std::size_t i : topo_)
    for (const auto& link : parents_[i]) depth[i] = std::max(depth[i], depth[link.parent] + 1);
  std::size_t out = params_.empty() ? 0 : 1;
  for (auto d : depth) out = std::max(out, d);
  return out;
}

bool ParameterSpace::is_discrete() const {
  return std::none_of(params_.begin(), params_.end(), [](const auto& p) { return p.kind == ParamKind::real; });
}

bool ParameterSpace::is_active(const std::vector<double>& values, std::size_t i) const {
  for (const auto& link : parents_[i]) {
    double pv = values[link.parent];
    if (is_inactive(pv) || !contains(link.allowed, pv)) return false;
    if (!is_active(values, link.parent)) return false;
  }
  return true;
}

bool ParameterSpace::is_active(const Configuration& config, std::string_view name) const {
  return is_active(config.values(), index_of(name));
}

Configuration ParameterSpace::canonicalize(std::vector<double> values) const {
  if (values.size() != params_.size()) throw Error("configuration size does not match the space");
  for (std::size_t i : topo_) {
    bool active = true;
    for (const auto& link : parents_[i]) {
      double pv = values[link.parent];
      if (is_inactive(pv) || !contains(link.allowed, pv)) {
        active = false;
        break;
      }
    }
    if (!active) {
      values[i] = kInactive;
    } else if (is_inactive(values[i])) {
      values[i] = params_[i].default_value;
    }
  }
  return Configuration(std::move(values));
}

Configuration ParameterSpace::default_configuration() const {
  std::vector<double> values;
  values.reserve(params_.size());
  for (const auto& p : params_) values.push_back(p.default_value);
  return canonicalize(std::move(values));
}

bool ParameterSpace::clause_matches(const ResolvedClause& clause, const std::vector<double>& values) const {
  for (const auto& [i, v] : clause) {
    if (is_inactive(values[i]) || values[i] != v) return false;
  }
  return true;
}

bool ParameterSpace::is_forbidden(const Configuration& config) const {
  for (const auto& clause : forbidden_resolved_)
    if (clause_matches(clause, config.values())) return true;
  return false;
}

std::vector<Violation> ParameterSpace::validate(const Configuration& config) const {
  if (config.size() != params_.size()) throw Error("configuration size does not match the space");
  std::vector<Violation> out;
  const auto& values = config.values();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    if (is_active(values, i)) {
      if (!p.in_domain(values[i]))
        out.push_back({ViolationKind::out_of_domain, p.name,
                       is_inactive(values[i]) ? "active parameter has no value" : "value outside domain"});
    } else if (!is_inactive(values[i])) {
      out.push_back({ViolationKind::non_canonical_inactive, p.name, "inactive parameter carries a value"});
    }
  }
  for (std::size_t f = 0; f < forbidden_resolved_.size(); ++f) {
    if (clause_matches(forbidden_resolved_[f], values))
      out.push_back({ViolationKind::forbidden, {}, "matches forbidden clause " + std::to_string(f + 1)});
  }
  return out;
}

double ParameterSpace::sample_value(std::size_t i, std::mt19937_64& rng) const {
  const auto& p = params_[i];
  switch (p.kind) {
    case ParamKind::categorical: {
      std::uniform_int_distribution<std::size_t> d(0, p.values.size() - 1);
      return static_cast<double>(d(rng));
    }
    case ParamKind::integer: {
      if (p.log_scale) {
        std::uniform_real_distribution<double> d(std::log(p.lo - 0.5 > 0 ? p.lo - 0.5 : p.lo), std::log(p.hi + 0.5));
        return std::clamp(std::round(std::exp(d(rng))), p.lo, p.hi);
      }
      std::uniform_int_distribution<long long> d(static_cast<long long>(p.lo), static_cast<long long>(p.hi));
      return static_cast<double>(d(rng));
    }
    case ParamKind::real: {
      if (p.log_scale) {
        std::uniform_real_distribution<double> d(std::log(p.lo), std::log(p.hi));
        return std::clamp(std::exp(d(rng)), p.lo, p.hi);
      }
      std::uniform_real_distribution<double> d(p.lo, p.hi);
      return d(rng);
    }
  }
  return kInactive;
}

Configuration ParameterSpace::sample_uniform(std::mt19937_64& rng, std::size_t max_attempts) const {
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<double> values(params_.size(), kInactive);
    for (std::size_t i : topo_) {
      bool active = true;
      for (const auto& link : parents_[i]) {
        if (is_inactive(values[link.parent]) || !contains(link.allowed, values[link.parent])) {
          active = false;
          break;
        }
      }
      if (active) values[i] = sample_value(i, rng);
    }
    Configuration config(std::move(values));
    if (!is_forbidden(config)) return config;
  }
  throw SpaceTooConstrained("no admissible configuration after " + std::to_string(max_attempts) +
                            " sampling attempts");
}

ParameterSpace ParameterSpace::discretize(std::size_t grid_size) const {
  if (grid_size < 2) throw Error("grid size must be at least 2");

  // Numeric values that conditions and forbidden clauses refer to must stay reachable.
  std::vector<std::vector<double>> referenced(params_.size());
  for (const auto& c : conditions_)
    for (double v : c.allowed_values) referenced[index_of(c.parent)].push_back(v);
  for (const auto& f : forbidden_)
    for (const auto& [name, v] : f.assignments) referenced[index_of(name)].push_back(v);

  std::vector<ParameterSpec> params;
  std::vector<std::vector<double>> grids(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    if (!p.is_numeric()) {
      params.push_back(p);
      continue;
    }
    auto to_scale = [&](double v) { return p.log_scale ? std::log(v) : v; };
    auto from_scale = [&](double v) { return p.log_scale ? std::exp(v) : v; };
    const double a = to_scale(p.lo), b = to_scale(p.hi);
    std::vector<double> grid;
    for (std::size_t k = 0; k < grid_size; ++k) {
      double v;
      if (k == 0) {
        v = p.lo;
      } else if (k + 1 == grid_size) {
        v = p.hi;
      } else {
        v = snap(from_scale(a + (b - a) * static_cast<double>(k) / static_cast<double>(grid_size - 1)));
      }
      if (p.kind == ParamKind::integer) v = std::round(v);
      grid.push_back(std::clamp(v, p.lo, p.hi));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto on_grid = [&](double v) {
      return std::any_of(grid.begin(), grid.end(),
                         [&](double g) { return std::abs(g - v) <= 1e-12 * std::max(1.0, std::abs(v)); });
    };
    if (!on_grid(p.default_value)) {
      // Displace the nearest interior point; endpoints stay.
      std::size_t best = grid.size();
      double best_dist = 0;
      for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
        double dist = std::abs(to_scale(grid[k]) - to_scale(p.default_value));
        if (best == grid.size() || dist < best_dist) {
          best = k;
          best_dist = dist;
        }
      }
      if (best == grid.size()) {
        grid.push_back(p.default_value);
      } else {
        grid[best] = p.default_value;
      }
      std::sort(grid.begin(), grid.end());
    }
    for (double v : referenced[i])
      if (!on_grid(v)) grid.push_back(v);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    ParameterSpec q;
    q.name = p.name;
    q.kind = ParamKind::categorical;
    for (double v : grid) q.values.push_back(p.format(v));
    q.default_value = static_cast<double>(
        std::min_element(grid.begin(), grid.end(),
                         [&](double x, double y) { return std::abs(x - p.default_value) < std::abs(y - p.default_value); }) -
        grid.begin());
    params.push_back(std::move(q));
    grids[i] = std::move(grid);
  }

  auto encode = [&](std::size_t i, double v) {
    if (!params_[i].is_numeric()) return v;
    const auto& grid = grids[i];
    auto it = std::min_element(grid.begin(), grid.end(),
                               [&](double x, double y) { return std::abs(x - v) < std::abs(y - v); });
    return static_cast<double>(it - grid.begin());
  };

  std::vector<ConditionClause> conditions = conditions_;
  for (auto& c : conditions) {
    std::size_t pi = index_of(c.parent);
    for (double& v : c.allowed_values) v = encode(pi, v);
  }
  std::vector<ForbiddenClause> forbidden = forbidden_;
  for (auto& f : forbidden)
    for (auto& [name, v] : f.assignments) v = encode(index_of(name), v);

  return ParameterSpace(std::move(params), std::move(conditions), std::move(forbidden));
}

std::vector<Configuration> ParameterSpace::neighbors(const Configuration& config) const {
  std::vector<Configuration> out;
  std::unordered_set<Configuration, ConfigurationHash> seen;
  const auto& values = config.values();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    if (is_inactive(values[i])) continue;
    std::vector<double> alternatives;
    if (p.kind == ParamKind::categorical) {
      for (std::size_t k = 0; k < p.values.size(); ++k) alternatives.push_back(static_cast<double>(k));
    } else if (p.kind == ParamKind::integer) {
      for (double v = p.lo; v <= p.hi; v += 1.0) alternatives.push_back(v);
    } else {
      throw UnsupportedSpace("neighborhoods require a discretized space ('" + p.name + "' is real-valued)");
    }
    for (double v : alternatives) {
      if (v == values[i]) continue;
      std::vector<double> next = values;
      next[i] = v;
      Configuration candidate = canonicalize(std::move(next));
      if (candidate == config || is_forbidden(candidate)) continue;
      if (seen.insert(candidate).second) out.push_back(std::move(candidate));
    }
  }
  return out;
}

std::string ParameterSpace::to_string(const Configuration& config) const {
  std::string out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (i > 0) out += ' ';
    out += params_[i].name;
    out += '=';
    out += params_[i].format(config[i]);
  }
  return out;
}

std::optional<std::string> ParameterSpace::value_string(const Configuration& config, std::string_view name) const {
  std::size_t i = index_of(name);
  if (is_inactive(config[i])) return std::nullopt;
  return params_[i].format(config[i]);
}

Configuration ParameterSpace::from_strings(const std::vector<std::pair<std::string, std::string>>& assignments) const {
  std::vector<double> values;
  for (const auto& p : params_) values.push_back(p.default_value);
  for (const auto& [name, text] : assignments) {
    std::size_t i = index_of(name);
    auto v = params_[i].parse(text);
    if (!v || !params_[i].in_domain(*v))
      throw Error("value '" + text + "' is not in the domain of '" + name + "'");
    values[i] = *v;
  }
  return canonicalize(std::move(values));
}

}  // namespace aconf
