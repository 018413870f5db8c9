#include "aconf/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace aconf {

std::string to_string(Approach a) {
  switch (a) {
    case Approach::paramils_discretized:
      return "paramils-discretized";
    case Approach::gga:
      return "gga";
    case Approach::gga_discretized:
      return "gga-discretized";
    case Approach::smac:
      return "smac";
    case Approach::smac_discretized:
      return "smac-discretized";
  }
  return "smac";
}

const std::vector<Approach>& all_approaches() {
  static const std::vector<Approach> all{Approach::paramils_discretized, Approach::gga, Approach::gga_discretized,
                                         Approach::smac, Approach::smac_discretized};
  return all;
}

Approach parse_approach(const std::string& s) {
  for (Approach a : all_approaches())
    if (to_string(a) == s) return a;
  if (s == "paramils") return Approach::paramils_discretized;
  throw Error("unknown approach '" + s + "'");
}

bool is_discretized(Approach a) {
  return a == Approach::paramils_discretized || a == Approach::gga_discretized || a == Approach::smac_discretized;
}

Scenario discretized_scenario(const Scenario& scenario, std::size_t grid) {
  Scenario s = scenario;
  s.space = scenario.space.discretize(grid);
  return s;
}

Configuration translate(const ParameterSpace& from, const ParameterSpace& to, const Configuration& config) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& p : from.parameters()) {
    auto v = from.value_string(config, p.name);
    if (v) pairs.emplace_back(p.name, *v);
  }
  return to.from_strings(pairs);
}

ConfiguratorResult run_approach(Approach approach, const Scenario& scenario, const Target& target, Budget budget,
                                std::uint64_t seed, std::size_t grid, int units, const IlsParams& ils,
                                const GgaParams& gga, const SmacParams& smac) {
  const Scenario s = is_discretized(approach) ? discretized_scenario(scenario, grid) : scenario;
  switch (approach) {
    case Approach::paramils_discretized:
      return run_focused_ils(s, target, budget, seed, ils);
    case Approach::gga:
    case Approach::gga_discretized: {
      GgaParams p = gga;
      p.units = static_cast<std::size_t>(std::max(1, units));
      return run_gga(s, target, budget, seed, p);
    }
    case Approach::smac:
    case Approach::smac_discretized:
      return run_smac(s, target, budget, seed, smac);
  }
  throw Error("unknown approach");
}

std::vector<std::uint64_t> instance_seeds(const Scenario& scenario, std::size_t count, std::uint64_t seed) {
  std::vector<std::uint64_t> out(count, 0);
  if (scenario.deterministic_target) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> draw(0, (1ULL << 31) - 1);
  for (auto& s : out) s = draw(rng);
  return out;
}

std::vector<InstanceOutcome> evaluate_instances(const Scenario& scenario, const Target& target,
                                                const Configuration& config, const InstanceSet& instances,
                                                const std::vector<std::uint64_t>& seeds, double cutoff, int workers) {
  if (seeds.size() != instances.size()) throw Error("one seed per instance required");
  std::vector<InstanceOutcome> out(instances.size());
  auto spec_for = [&](std::size_t i) {
    return RunSpec{config, instances.instances[i].id, seeds[i], cutoff, scenario.memory_limit_mb};
  };
  if (target.in_process() || workers <= 1) {
    for (std::size_t i = 0; i < instances.size(); ++i)
      out[i] = {instances.instances[i].id, target.run(scenario.space, spec_for(i), nullptr)};
    return out;
  }
  RunPool pool(target, scenario.space, workers);
  std::map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < instances.size(); ++i) index[pool.submit(spec_for(i))] = i;
  while (pool.outstanding() > 0) {
    auto done = pool.wait_next();
    const std::size_t i = index.at(done.ticket);
    out[i] = {instances.instances[i].id, done.outcome};
  }
  return out;
}

std::vector<InstanceOutcome> test_outcomes(const Scenario& scenario, const Target& target, const Configuration& config,
                                           std::optional<double> cutoff_override, int workers) {
  const double cutoff = cutoff_override.value_or(scenario.cutoff_seconds);
  if (!(cutoff > 0)) throw Error("cutoff must be positive");
  return evaluate_instances(scenario, target, config, scenario.test,
                            instance_seeds(scenario, scenario.test.size(), scenario.seed ^ 0x7e57ULL), cutoff,
                            workers);
}

namespace {

std::vector<RunOutcome> outcomes_of(const std::vector<InstanceOutcome>& v) {
  std::vector<RunOutcome> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.outcome);
  return out;
}

CostMetric test_metric(const Scenario& scenario, std::optional<double> cutoff_override) {
  return {scenario.par_k, cutoff_override.value_or(scenario.cutoff_seconds)};
}

/// Full-train validation with seed 0 per instance, reusing exact ledger runs.
class Validator {
 public:
  Validator(const Scenario& scenario, const Target& target, int workers)
      : scenario_(scenario), target_(target), workers_(workers) {}

  AggregateScore validate(const Configuration& native, const RunHistory* history,
                          const std::optional<Configuration>& own) {
    const std::string key = scenario_.space.to_string(native);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      std::map<std::string, RunOutcome> known;
      if (history != nullptr && own) {
        if (auto id = history->find(*own)) {
          const std::size_t n = std::min(history->num_runs(*id), history->instances().size());
          for (std::size_t p = 0; p < n; ++p) {
            const RunRecord* r = history->slot(*id, p);
            if (history->order()[p].seed == 0 && !is_lower_bound(r->outcome) &&
                (r->outcome.solved() || r->cutoff >= scenario_.cutoff_seconds))
              known[history->instance_at(p)] = r->outcome;
          }
        }
      }
      InstanceSet missing;
      for (const auto& inst : scenario_.train.instances)
        if (!known.count(inst.id)) missing.instances.push_back(inst);
      if (!missing.instances.empty()) {
        const std::vector<std::uint64_t> zeros(missing.size(), 0);
        for (auto& o : evaluate_instances(scenario_, target_, native, missing, zeros, scenario_.cutoff_seconds,
                                          workers_))
          known[o.instance] = o.outcome;
      }
      std::vector<RunOutcome> ordered;
      for (const auto& inst : scenario_.train.instances) ordered.push_back(known.at(inst.id));
      it = cache_.emplace(key, aggregate(ordered, scenario_metric(scenario_))).first;
    }
    return it->second;
  }

 private:
  const Scenario& scenario_;
  const Target& target_;
  int workers_;
  std::map<std::string, AggregateScore> cache_;
};

void write_run_files(const std::string& dir, const ParameterSpace& space, const ConfiguratorResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream traj(fs::path(dir) / "trajectory.csv");
  write_trajectory_csv(traj, r.trajectory);
  if (r.history) {
    std::ofstream runs(fs::path(dir) / "runs.csv");
    r.history->write_csv(runs);
    std::ofstream configs(fs::path(dir) / "configs.csv");
    r.history->write_configs_csv(configs, space);
  }
}

}  // namespace

AggregateScore test_evaluate(const Scenario& scenario, const Target& target, const Configuration& config,
                             std::optional<double> cutoff_override, int workers) {
  return aggregate(outcomes_of(test_outcomes(scenario, target, config, cutoff_override, workers)),
                   test_metric(scenario, cutoff_override));
}

CampaignReport run_campaign(const CampaignPlan& plan, const Target& target) {
  const Scenario& sc = plan.scenario;
  if (sc.train.instances.empty()) throw ScenarioError("campaign needs training instances");
  CampaignReport report;
  report.cutoff = sc.cutoff_seconds;
  report.par_k = sc.par_k;
  Validator validator(sc, target, plan.units);
  const Configuration def = sc.space.default_configuration();
  report.default_text = sc.space.to_string(def);
  report.default_train = validator.validate(def, nullptr, std::nullopt);

  for (std::size_t a = 0; a < plan.approaches.size(); ++a) {
    const Approach approach = plan.approaches[a];
    const std::size_t runs = approach == Approach::gga || approach == Approach::gga_discretized
                                 ? 1
                                 : std::max<std::size_t>(1, plan.independent_runs);
    for (std::size_t j = 0; j < runs; ++j) {
      const std::uint64_t seed = plan.seed * 1000003ULL + static_cast<std::uint64_t>(approach) * 1000 + j;
      try {
        const Scenario own = is_discretized(approach) ? discretized_scenario(sc, plan.grid) : sc;
        ConfiguratorResult r = run_approach(approach, sc, target, plan.budget, seed, plan.grid, plan.units, plan.ils,
                                            plan.gga, plan.smac);
        if (!plan.out_dir.empty())
          write_run_files((std::filesystem::path(plan.out_dir) / (to_string(approach) + "-" + std::to_string(j)))
                              .string(),
                          own.space, r);
        IncumbentEntry e;
        e.approach = approach;
        e.run = j;
        e.seed = seed;
        e.config = translate(own.space, sc.space, r.incumbent);
        e.config_text = sc.space.to_string(e.config);
        e.train = validator.validate(e.config, r.history.get(), r.incumbent);
        e.runs_used = r.runs_used;
        report.incumbents.push_back(std::move(e));
      } catch (const std::exception& ex) {
        std::cerr << "warning: " << to_string(approach) << " run " << j << " failed: " << ex.what() << '\n';
        report.failures.push_back({approach, j, ex.what()});
      }
    }
  }

  for (std::size_t i = 0; i < report.incumbents.size(); ++i) {
    if (!report.selected) {
      report.selected = i;
      continue;
    }
    const auto& c = report.incumbents[i];
    const auto& b = report.incumbents[*report.selected];
    const auto key = [](const IncumbentEntry& e) {
      return std::make_tuple(e.train.mean_cost, to_string(e.approach), e.config_text, e.run);
    };
    if (key(c) < key(b)) report.selected = i;
  }
  report.selected_config = report.selected ? report.incumbents[*report.selected].config : def;
  report.selected_text = sc.space.to_string(report.selected_config);

  report.default_test_outcomes = test_outcomes(sc, target, def, std::nullopt, plan.units);
  report.default_test = aggregate(outcomes_of(report.default_test_outcomes), scenario_metric(sc));
  report.configured_test_outcomes = test_outcomes(sc, target, report.selected_config, std::nullopt, plan.units);
  report.configured_test = aggregate(outcomes_of(report.configured_test_outcomes), scenario_metric(sc));
  report.configured_test_evaluations = 1;
  return report;
}

void write_report_text(std::ostream& out, const CampaignReport& r) {
  out << "cutoff " << format_number(r.cutoff) << " s, PAR-" << r.par_k << "\n\n";
  out << std::left << std::setw(25) << "approach" << std::setw(5) << "run" << std::setw(14) << "train PAR"
      << std::setw(10) << "solved" << "configuration\n";
  auto short_num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(6) << v;
    return s.str();
  };
  auto row = [&](const std::string& name, const std::string& run, const AggregateScore& s, const std::string& cfg) {
    out << std::left << std::setw(25) << name << std::setw(5) << run << std::setw(14) << short_num(s.mean_cost)
        << std::setw(10) << (std::to_string(s.solved_count) + "/" + std::to_string(s.attempted_count)) << cfg << '\n';
  };
  row("default", "-", r.default_train, "");
  for (std::size_t i = 0; i < r.incumbents.size(); ++i) {
    const auto& e = r.incumbents[i];
    row(to_string(e.approach) + (r.selected == i ? " *" : "  "), std::to_string(e.run), e.train, e.config_text);
  }
  for (const auto& f : r.failures) out << to_string(f.approach) << " run " << f.run << " failed: " << f.message << '\n';
  out << "\nselected: ";
  if (r.selected) out << to_string(r.incumbents[*r.selected].approach) << " run " << r.incumbents[*r.selected].run;
  else out << "default";
  out << "\n" << r.selected_text << "\n\n";
  auto timeouts = [](const AggregateScore& s) { return s.attempted_count - s.solved_count; };
  out << "test: timeouts " << timeouts(r.default_test) << " -> " << timeouts(r.configured_test) << " of "
      << r.configured_test.attempted_count << ", PAR-" << r.par_k << " " << short_num(r.default_test.mean_cost)
      << " -> " << short_num(r.configured_test.mean_cost) << '\n';
}

void write_report_csv(std::ostream& out, const CampaignReport& r) {
  out << "kind,approach,run,seed,train_par,train_solved,test_par,test_solved,test_attempted,configuration\n";
  auto quoted = [](const std::string& s) { return '"' + s + '"'; };
  auto test_cols = [&](const AggregateScore& s) {
    return format_number(s.mean_cost) + ',' + std::to_string(s.solved_count) + ',' + std::to_string(s.attempted_count);
  };
  out << "default,,,," << format_number(r.default_train.mean_cost) << ',' << r.default_train.solved_count << ','
      << test_cols(r.default_test) << ',' << quoted(r.default_text) << '\n';
  for (std::size_t i = 0; i < r.incumbents.size(); ++i) {
    const auto& e = r.incumbents[i];
    out << (r.selected == i ? "selected" : "incumbent") << ',' << to_string(e.approach) << ',' << e.run << ','
        << e.seed << ',' << format_number(e.train.mean_cost) << ',' << e.train.solved_count << ','
        << (r.selected == i ? test_cols(r.configured_test) : ",,") << ',' << quoted(e.config_text) << '\n';
  }
  if (!r.selected)
    out << "selected,default,,," << format_number(r.default_train.mean_cost) << ',' << r.default_train.solved_count
        << ',' << test_cols(r.configured_test) << ',' << quoted(r.selected_text) << '\n';
  for (const auto& f : r.failures) out << "failed," << to_string(f.approach) << ',' << f.run << ",,,,,,," << '\n';
}

std::vector<RankingEntry> rank_campaigns(
    const std::vector<std::pair<std::string, std::vector<CampaignReport>>>& entries, const CostMetric& metric) {
  std::vector<std::pair<std::string, std::vector<InstanceOutcome>>> pooled;
  for (const auto& [label, reports] : entries) {
    std::vector<InstanceOutcome> all;
    for (std::size_t b = 0; b < reports.size(); ++b)
      for (const auto& o : reports[b].configured_test_outcomes)
        all.push_back({"b" + std::to_string(b) + "/" + o.instance, o.outcome});
    pooled.emplace_back(label, std::move(all));
  }
  return rank(pooled, metric);
}

}  // namespace aconf
