#include "aconf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "aconf/error.hpp"
#include "aconf/harness.hpp"

namespace aconf {

double speedup_factor(const std::vector<InstanceOutcome>& default_outcomes,
                      const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric) {
  std::map<std::string, const RunOutcome*> configured;
  for (const auto& o : configured_outcomes) configured[o.instance] = &o.outcome;
  if (configured.size() != default_outcomes.size()) throw Error("speedup: outcome sets cover different instances");

  std::vector<RunOutcome> def, conf;
  for (const auto& o : default_outcomes) {
    auto it = configured.find(o.instance);
    if (it == configured.end()) throw Error("speedup: instance '" + o.instance + "' missing from configured outcomes");
    if (!o.outcome.solved() && !it->second->solved()) continue;
    def.push_back(o.outcome);
    conf.push_back(*it->second);
  }
  if (def.empty()) throw UndefinedStatistic("speedup undefined: no instance solved by either configuration");
  double d = aggregate(def, metric).mean_cost;
  double c = aggregate(conf, metric).mean_cost;
  if (!(c > 0.0)) throw UndefinedStatistic("speedup undefined: configured cost is zero");
  return d / c;
}

SpeedupRecord speedup_record(const std::string& label, std::size_t num_params,
                             const std::vector<InstanceOutcome>& default_outcomes,
                             const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric) {
  SpeedupRecord r{label, num_params, std::nullopt, metric.k};
  try {
    r.speedup = speedup_factor(default_outcomes, configured_outcomes, metric);
  } catch (const UndefinedStatistic&) {
  }
  return r;
}

void write_speedups_csv(std::ostream& out, const std::vector<SpeedupRecord>& records) {
  out << "label,num_params,speedup,metric_k\n";
  for (const auto& r : records) {
    out << r.label << ',' << r.num_params << ',';
    if (r.speedup) out << format_number(*r.speedup);
    else out << "undefined";
    out << ',' << r.metric_k << '\n';
  }
}

double geometric_mean_slowdown(const std::vector<std::pair<double, double>>& per_scenario) {
  if (per_scenario.empty()) throw UndefinedStatistic("slowdown of an empty set");
  double sum = 0.0;
  for (auto [approach, selected] : per_scenario) {
    if (!(approach > 0.0) || !(selected > 0.0)) throw Error("slowdown needs positive costs");
    sum += std::log(approach / selected);
  }
  return std::exp(sum / static_cast<double>(per_scenario.size()));
}

std::vector<double> average_ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw Error("spearman: vectors differ in length");
  if (xs.size() < 2) throw UndefinedStatistic("spearman needs at least two points");
  auto rx = average_ranks(xs);
  auto ry = average_ranks(ys);
  double n = static_cast<double>(rx.size());
  double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("spearman undefined for a constant vector");
  if (sxx == syy && sxy == sxx) return 1.0;
  if (sxx == syy && sxy == -sxx) return -1.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::size_t top_fraction_count(std::size_t n) { return std::max<std::size_t>(2, n / 5); }

CorrelationStudy sample_correlation_study(const Scenario& scenario, const Target& target, std::size_t n,
                                          std::mt19937_64& rng, int workers) {
  if (n < 5) throw Error("correlation study needs at least 5 configurations");
  const CostMetric metric = scenario_metric(scenario);
  const auto train_seeds = instance_seeds(scenario, scenario.train.size(), scenario.seed);
  const auto test_seeds = instance_seeds(scenario, scenario.test.size(), scenario.seed ^ 0x7e57ULL);
  auto mean_cost = [&](const std::vector<InstanceOutcome>& v) {
    std::vector<RunOutcome> o;
    for (const auto& x : v) o.push_back(x.outcome);
    return aggregate(o, metric).mean_cost;
  };

  CorrelationStudy study;
  for (std::size_t i = 0; i < n; ++i) {
    Configuration c = scenario.space.sample_uniform(rng);
    CorrelationRow row;
    row.configuration = scenario.space.to_string(c);
    row.train_cost = mean_cost(
        evaluate_instances(scenario, target, c, scenario.train, train_seeds, scenario.cutoff_seconds, workers));
    row.test_cost = mean_cost(
        evaluate_instances(scenario, target, c, scenario.test, test_seeds, scenario.cutoff_seconds, workers));
    study.rows.push_back(std::move(row));
  }

  std::vector<double> tr, te;
  for (const auto& r : study.rows) {
    tr.push_back(r.train_cost);
    te.push_back(r.test_cost);
  }
  study.spearman_all = spearman(tr, te);

  std::vector<std::size_t> order(study.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tr[a] < tr[b]; });
  study.top_count = top_fraction_count(n);
  std::vector<double> ttr, tte;
  for (std::size_t i = 0; i < study.top_count; ++i) {
    ttr.push_back(tr[order[i]]);
    tte.push_back(te[order[i]]);
  }
  try {
    study.spearman_top = spearman(ttr, tte);
  } catch (const UndefinedStatistic&) {
  }
  return study;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_correlation_csv(std::ostream& out, const CorrelationStudy& study) {
  out << "configuration,train_cost,test_cost\n";
  for (const auto& r : study.rows)
    out << csv_field(r.configuration) << ',' << format_number(r.train_cost) << ',' << format_number(r.test_cost)
        << '\n';
}

void emit_scatter(std::ostream& out, const std::vector<InstanceOutcome>& default_outcomes,
                  const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric) {
  std::map<std::string, const RunOutcome*> configured;
  for (const auto& o : configured_outcomes) configured[o.instance] = &o.outcome;
  if (configured.size() != default_outcomes.size()) throw Error("scatter: outcome sets cover different instances");
  out << "instance,default_cost,configured_cost,default_status,configured_status\n";
  for (const auto& o : default_outcomes) {
    auto it = configured.find(o.instance);
    if (it == configured.end()) throw Error("scatter: instance '" + o.instance + "' missing from configured outcomes");
    out << csv_field(o.instance) << ',' << format_number(penalized_cost(o.outcome, metric)) << ','
        << format_number(penalized_cost(*it->second, metric)) << ',' << to_string(o.outcome.status) << ','
        << to_string(it->second->status) << '\n';
  }
}

void emit_scatter(const std::string& path, const std::vector<InstanceOutcome>& default_outcomes,
                  const std::vector<InstanceOutcome>& configured_outcomes, const CostMetric& metric) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write '" + path + "'");
  emit_scatter(f, default_outcomes, configured_outcomes, metric);
}

}  // namespace aconf
