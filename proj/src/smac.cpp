#include "aconf/smac.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

namespace aconf {

namespace {

double scale_value(const ParameterSpec& p, double v) {
  if (p.hi <= p.lo) return 0.0;
  if (p.log_scale && p.lo > 0) return (std::log(v) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo));
  return (v - p.lo) / (p.hi - p.lo);
}

double unscale_value(const ParameterSpec& p, double u) {
  u = std::clamp(u, 0.0, 1.0);
  double v = p.log_scale && p.lo > 0 ? std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)))
                                     : p.lo + u * (p.hi - p.lo);
  if (p.kind == ParamKind::integer) v = std::round(v);
  return std::clamp(v, p.lo, p.hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(const ParameterSpace& space, std::size_t num_features) : space_(space), num_features_(num_features) {
  const auto def = space.default_configuration();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& p = space.parameters()[i];
    slots_.push_back({i, false});
    cardinality_.push_back(p.kind == ParamKind::categorical ? p.values.size() : 0);
    default_encoding_.push_back(p.kind == ParamKind::categorical ? p.default_value : scale_value(p, p.default_value));
    if (space.has_conditions_on(i)) {
      slots_.push_back({i, true});
      cardinality_.push_back(0);
      default_encoding_.push_back(0.0);
    }
  }
  for (std::size_t f = 0; f < num_features; ++f) cardinality_.push_back(0);
}

std::vector<double> Encoder::encode(const Configuration& config, const std::vector<double>* features) const {
  std::vector<double> out;
  out.reserve(dims());
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const auto& slot = slots_[s];
    const double v = config[slot.param];
    if (slot.activity_bit) {
      out.push_back(is_inactive(v) ? 0.0 : 1.0);
    } else if (is_inactive(v)) {
      out.push_back(default_encoding_[s]);
    } else {
      const auto& p = space_.parameters()[slot.param];
      out.push_back(p.kind == ParamKind::categorical ? v : scale_value(p, v));
    }
  }
  if (num_features_ > 0) {
    if (features == nullptr || features->size() != num_features_) throw Error("instance features required");
    out.insert(out.end(), features->begin(), features->end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees

void RegressionTree::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                         std::vector<std::size_t> rows, const std::vector<std::size_t>& cardinality,
                         const ForestParams& params, std::mt19937_64& rng) {
  nodes_.clear();
  if (rows.empty()) throw InsufficientData("tree needs at least one row");
  std::vector<std::vector<std::size_t>> sorted(cardinality.size(), rows);
  for (std::size_t f = 0; f < cardinality.size(); ++f)
    if (cardinality[f] == 0)
      std::stable_sort(sorted[f].begin(), sorted[f].end(),
                       [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
  goes_left_.assign(x.size(), 0);
  build(x, y, sorted, cardinality, params, rng, 0);
}

int RegressionTree::build(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                          std::vector<std::vector<std::size_t>>& sorted, const std::vector<std::size_t>& cardinality,
                          const ForestParams& params, std::mt19937_64& rng, std::size_t depth) {
  const std::vector<std::size_t>& rows = sorted[0];
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  const double n = static_cast<double>(rows.size());
  double sum = 0.0, sq = 0.0;
  for (std::size_t r : rows) {
    sum += y[r];
    sq += y[r] * y[r];
  }
  {
    Node& node = nodes_[index];
    node.count = rows.size();
    node.mean = sum / n;
    node.variance = std::max(0.0, sq / n - node.mean * node.mean);
  }
  const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
  if (rows.size() < 2 * min_leaf || depth >= params.max_depth || nodes_[index].variance <= 1e-14) return index;

  const std::size_t d = cardinality.size();
  std::vector<std::size_t> feats(d);
  std::iota(feats.begin(), feats.end(), 0);
  std::shuffle(feats.begin(), feats.end(), rng);
  const auto n_try = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(params.max_features_frac * static_cast<double>(d))), 1, d);
  feats.resize(n_try);

  const double parent_sse = sq - sum * sum / n;
  double best_sse = parent_sse - 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<char> best_mask;

  for (std::size_t f : feats) {
    if (cardinality[f] == 0) {
      const auto& order = sorted[f];
      double ls = 0.0, lq = 0.0;
      for (std::size_t k = 1; k < order.size(); ++k) {
        const double v = y[order[k - 1]];
        ls += v;
        lq += v * v;
        if (k < min_leaf || order.size() - k < min_leaf) continue;
        const double a = x[order[k - 1]][f], b = x[order[k]][f];
        if (!(a < b)) continue;
        const double nl = static_cast<double>(k), nr = n - nl;
        const double rs = sum - ls, rq = sq - lq;
        const double sse = (lq - ls * ls / nl) + (rq - rs * rs / nr);
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = static_cast<int>(f);
          best_threshold = a + (b - a) / 2.0;
          best_mask.clear();
        }
      }
    } else {
      const std::size_t c = cardinality[f];
      std::vector<double> cs(c, 0.0), cq(c, 0.0);
      std::vector<std::size_t> cn(c, 0);
      for (std::size_t r : rows) {
        const auto k = static_cast<std::size_t>(x[r][f]);
        cs[k] += y[r];
        cq[k] += y[r] * y[r];
        ++cn[k];
      }
      std::vector<std::size_t> present;
      for (std::size_t k = 0; k < c; ++k)
        if (cn[k]) present.push_back(k);
      std::sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
        const double ma = cs[a] / static_cast<double>(cn[a]), mb = cs[b] / static_cast<double>(cn[b]);
        return ma != mb ? ma < mb : a < b;
      });
      double ls = 0.0, lq = 0.0;
      std::size_t ln = 0;
      for (std::size_t j = 0; j + 1 < present.size(); ++j) {
        const std::size_t k = present[j];
        ls += cs[k];
        lq += cq[k];
        ln += cn[k];
        if (ln < min_leaf || rows.size() - ln < min_leaf) continue;
        const double nl = static_cast<double>(ln), nr = n - nl;
        const double rs = sum - ls, rq = sq - lq;
        const double sse = (lq - ls * ls / nl) + (rq - rs * rs / nr);
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = static_cast<int>(f);
          best_mask.assign(c, 0);
          for (std::size_t t = 0; t <= j; ++t) best_mask[present[t]] = 1;
        }
      }
    }
  }
  if (best_feature < 0) return index;

  const auto f = static_cast<std::size_t>(best_feature);
  for (std::size_t r : rows) {
    goes_left_[r] = best_mask.empty() ? x[r][f] <= best_threshold
                                      : best_mask[static_cast<std::size_t>(x[r][f])] != 0;
  }
  std::vector<std::vector<std::size_t>> left(sorted.size()), right(sorted.size());
  for (std::size_t g = 0; g < sorted.size(); ++g) {
    for (std::size_t r : sorted[g]) (goes_left_[r] ? left[g] : right[g]).push_back(r);
    sorted[g].clear();
    sorted[g].shrink_to_fit();
  }

  nodes_[index].feature = best_feature;
  nodes_[index].threshold = best_threshold;
  nodes_[index].left_categories = best_mask;
  const int l = build(x, y, left, cardinality, params, rng, depth + 1);
  const int r = build(x, y, right, cardinality, params, rng, depth + 1);
  nodes_[index].left = l;
  nodes_[index].right = r;
  return index;
}

Prediction RegressionTree::predict(const std::vector<double>& x) const {
  int i = 0;
  while (nodes_[i].feature >= 0) {
    const Node& node = nodes_[i];
    const double v = x[static_cast<std::size_t>(node.feature)];
    bool left;
    if (node.left_categories.empty()) {
      left = v <= node.threshold;
    } else {
      const auto k = static_cast<std::size_t>(v);
      left = k < node.left_categories.size() && node.left_categories[k] != 0;
    }
    i = left ? node.left : node.right;
  }
  return {nodes_[i].mean, nodes_[i].variance};
}

void RandomForest::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                       const std::vector<std::size_t>& cardinality, const ForestParams& params) {
  if (x.size() != y.size()) throw Error("forest inputs and responses differ in length");
  if (params.num_trees == 0) throw Error("forest needs at least one tree");
  if (x.size() < 2) throw InsufficientData("forest needs at least two observations");
  bool distinct = false;
  for (std::size_t i = 1; i < x.size() && !distinct; ++i) distinct = x[i] != x[0];
  if (!distinct) throw InsufficientData("forest needs at least two distinct inputs");
  for (const auto& row : x)
    if (row.size() != cardinality.size()) throw Error("forest input has the wrong dimension");

  trees_.assign(params.num_trees, {});
  const std::size_t n = x.size();
  for (std::size_t b = 0; b < params.num_trees; ++b) {
    std::mt19937_64 rng(params.seed * 0x9e3779b97f4a7c15ULL + b + 1);
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    trees_[b].fit(x, y, std::move(rows), cardinality, params, rng);
  }
}

Prediction RandomForest::predict(const std::vector<double>& x) const {
  if (trees_.empty()) throw Error("forest is not fitted");
  double sum = 0.0, sq = 0.0, leaf_var = 0.0;
  for (const auto& t : trees_) {
    const auto p = t.predict(x);
    sum += p.mean;
    sq += p.mean * p.mean;
    leaf_var += p.variance;
  }
  const double b = static_cast<double>(trees_.size());
  const double mean = sum / b;
  return {mean, std::max(0.0, sq / b - mean * mean) + leaf_var / b};
}

std::string RandomForest::dump() const {
  std::ostringstream out;
  for (std::size_t b = 0; b < trees_.size(); ++b) {
    out << "tree " << b << '\n';
    const auto& nodes = trees_[b].nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& nd = nodes[i];
      out << "  " << i << ": ";
      if (nd.feature < 0) {
        out << "leaf mean=" << format_number(nd.mean) << " var=" << format_number(nd.variance) << " n=" << nd.count;
      } else if (nd.left_categories.empty()) {
        out << "x" << nd.feature << " <= " << format_number(nd.threshold) << " ? " << nd.left << " : " << nd.right;
      } else {
        out << "x" << nd.feature << " in {";
        bool first = true;
        for (std::size_t k = 0; k < nd.left_categories.size(); ++k) {
          if (!nd.left_categories[k]) continue;
          out << (first ? "" : ",") << k;
          first = false;
        }
        out << "} ? " << nd.left << " : " << nd.right;
      }
      out << '\n';
    }
  }
  return out.str();
}

double expected_improvement(double mean, double variance, double f_star) {
  const double sigma = std::sqrt(std::max(0.0, variance));
  const double diff = f_star - mean;
  if (!(sigma > 0.0)) return std::max(0.0, diff);
  const double z = diff / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return std::max(0.0, diff * cdf + sigma * pdf);
}

double log_cost(const RunOutcome& outcome, const CostMetric& metric) {
  return std::log10(std::max(penalized_cost(outcome, metric), 0.005));
}

// ---------------------------------------------------------------------------
// Model

SmacModel SmacModel::fit(const RunHistory& history, const ParameterSpace& space,
                         const std::optional<InstanceFeatures>& features, const CostMetric& metric,
                         const ForestParams& params) {
  SmacModel m;
  bool with_features = features.has_value() && !features->feature_names.empty();
  if (with_features) {
    for (const auto& id : history.instances()) {
      if (features->row(id) == nullptr) {
        with_features = false;
        break;
      }
    }
  }
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  if (with_features) {
    m.encoder_ = Encoder(space, features->feature_names.size());
    for (const auto& id : history.instances()) m.train_features_.push_back(*features->row(id));
    for (ConfigId c = 0; c < history.num_configs(); ++c) {
      for (std::size_t p = 0; p < history.num_runs(c); ++p) {
        x.push_back(m.encoder_.encode(history.config(c), features->row(history.instance_at(p))));
        y.push_back(log_cost(history.slot(c, p)->outcome, metric));
      }
    }
  } else {
    m.encoder_ = Encoder(space);
    for (ConfigId c = 0; c < history.num_configs(); ++c) {
      const std::size_t n = history.num_runs(c);
      if (n == 0) continue;
      double total = 0.0;
      for (std::size_t p = 0; p < n; ++p) total += log_cost(history.slot(c, p)->outcome, metric);
      x.push_back(m.encoder_.encode(history.config(c)));
      y.push_back(total / static_cast<double>(n));
    }
  }
  m.forest_.fit(x, y, m.encoder_.cardinality(), params);
  return m;
}

Prediction SmacModel::predict(const Configuration& config, const std::vector<double>* features) const {
  if (uses_features() && features == nullptr) return marginal(config);
  return forest_.predict(encoder_.encode(config, uses_features() ? features : nullptr));
}

double SmacModel::marginal_predict(const Configuration& config) const { return marginal(config).mean; }

Prediction SmacModel::marginal(const Configuration& config) const {
  if (!uses_features()) return forest_.predict(encoder_.encode(config));
  double sum = 0.0, var = 0.0;
  for (const auto& f : train_features_) {
    const auto p = forest_.predict(encoder_.encode(config, &f));
    sum += p.mean;
    var += p.variance;
  }
  const double n = static_cast<double>(train_features_.size());
  return {sum / n, var / n};
}

// ---------------------------------------------------------------------------
// Challenger selection

std::vector<Configuration> smac_neighbors(const ParameterSpace& space, const Configuration& config,
                                          const SmacParams& params, std::mt19937_64& rng) {
  std::vector<Configuration> out;
  std::normal_distribution<double> step(0.0, params.neighbor_sigma);
  const auto& values = config.values();
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (is_inactive(values[i])) continue;
    const auto& p = space.parameters()[i];
    auto push = [&](double v) {
      if (v == values[i]) return;
      auto next = values;
      next[i] = v;
      Configuration c = space.canonicalize(std::move(next));
      if (!space.is_forbidden(c)) out.push_back(std::move(c));
    };
    if (p.kind == ParamKind::categorical) {
      for (std::size_t k = 0; k < p.values.size(); ++k) push(static_cast<double>(k));
    } else {
      const double u = scale_value(p, values[i]);
      for (std::size_t k = 0; k < params.numeric_neighbors; ++k) {
        double target = u + step(rng);
        for (int tries = 0; tries < 10 && (target < 0.0 || target > 1.0); ++tries) target = u + step(rng);
        push(unscale_value(p, target));
      }
    }
  }
  return out;
}

std::vector<Configuration> select_challengers(const SmacModel* model, const ParameterSpace& space,
                                              const Configuration& incumbent, double f_star, std::mt19937_64& rng,
                                              std::size_t n, const SmacParams& params) {
  std::vector<Configuration> guided;
  if (model != nullptr) {
    auto ei_of = [&](const Configuration& c) {
      const auto p = model->marginal(c);
      return expected_improvement(p.mean, p.variance, f_star);
    };
    std::vector<std::pair<double, Configuration>> pool;
    pool.reserve(params.random_samples);
    for (std::size_t i = 0; i < params.random_samples; ++i) {
      Configuration c = space.sample_uniform(rng);
      pool.emplace_back(ei_of(c), std::move(c));
    }
    std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::pair<double, Configuration>> starts(
        pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(std::min(params.local_search_starts, pool.size())));
    starts.emplace_back(ei_of(incumbent), incumbent);

    std::vector<std::pair<double, Configuration>> found;
    for (auto& [ei, c] : starts) {
      for (int step = 0; step < 50; ++step) {
        double best_ei = ei;
        std::optional<Configuration> best;
        for (auto& nb : smac_neighbors(space, c, params, rng)) {
          const double v = ei_of(nb);
          if (v > best_ei) {
            best_ei = v;
            best = std::move(nb);
          }
        }
        if (!best) break;
        c = std::move(*best);
        ei = best_ei;
      }
      found.emplace_back(ei, c);
    }
    found.insert(found.end(), pool.begin(), pool.end());
    std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::set<std::uint64_t> seen{incumbent.hash()};
    for (auto& [ei, c] : found) {
      if (guided.size() >= (n + 1) / 2) break;
      if (seen.insert(c.hash()).second) guided.push_back(std::move(c));
    }
  }

  std::vector<Configuration> out;
  std::size_t g = 0;
  while (out.size() < n) {
    if (out.size() % 2 == 0 && g < guided.size()) out.push_back(guided[g++]);
    else out.push_back(space.sample_uniform(rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Main loop

ConfiguratorResult run_smac(const Scenario& scenario, const Target& target, Budget budget, std::uint64_t seed,
                            SmacParams params) {
  const ParameterSpace& space = scenario.space;
  const CostMetric metric = scenario_metric(scenario);
  ConfiguratorResult result;
  result.history = make_history(scenario, seed);
  RunHistory& h = *result.history;
  RunContext ctx(target, space, h, metric, scenario.memory_limit_mb, budget);
  std::mt19937_64 rng(seed);
  const std::size_t n_train = std::min(h.instances().size(), h.max_positions());

  ConfigId inc = h.intern(space.default_configuration());
  auto inc_log_cost = [&] {
    double total = 0.0;
    const std::size_t n = h.num_runs(inc);
    for (std::size_t p = 0; p < n; ++p) total += log_cost(h.slot(inc, p)->outcome, metric);
    return n ? total / static_cast<double>(n) : 0.0;
  };

  try {
    ctx.evaluate_prefix(inc, 1);
    result.trajectory.push_back(trajectory_point(ctx, inc));
    // Stop once iterations no longer produce runs (space exhausted).
    for (std::size_t iter = 0, idle = 0; idle < 10; ++iter) {
      ctx.check_budget();
      const std::size_t before = ctx.runs_used();
      if (h.num_runs(inc) < n_train) ctx.evaluate_prefix(inc, h.num_runs(inc) + 1);

      std::optional<SmacModel> model;
      try {
        ForestParams fp = params.forest;
        fp.seed = seed * 1000003ULL + iter;
        model = SmacModel::fit(h, space, scenario.features, metric, fp);
      } catch (const InsufficientData&) {
      }
      auto challengers = select_challengers(model ? &*model : nullptr, space, h.config(inc), inc_log_cost(), rng,
                                            std::max(params.challengers, h.num_configs() / params.challenger_growth),
                                            params);

      for (const auto& c : challengers) {
        const ConfigId chal = h.intern(c);
        if (chal == inc) continue;
        const std::size_t n_inc = h.num_runs(inc);
        for (std::size_t prefix = 1;; prefix = std::min(2 * prefix, n_inc)) {
          const Verdict v = ctx.compare_capped(inc, chal, prefix, params.bound_multiplier);
          if (v == Verdict::incumbent_better) break;
          if (prefix >= n_inc) {
            if (v == Verdict::challenger_better) {
              inc = chal;
              result.trajectory.push_back(trajectory_point(ctx, inc));
            }
            break;
          }
        }
      }
      idle = ctx.runs_used() == before ? idle + 1 : 0;
    }
  } catch (const BudgetExhausted&) {
  }

  result.incumbent = h.config(inc);
  result.runs_used = ctx.runs_used();
  result.time_used = ctx.elapsed();
  result.budget_exhausted_early = h.num_runs(inc) == 0;
  if (result.budget_exhausted_early) std::cerr << "warning: budget exhausted before any complete run\n";
  return result;
}

}  // namespace aconf
