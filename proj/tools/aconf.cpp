#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "aconf/analysis.hpp"
#include "aconf/error.hpp"
#include "aconf/harness.hpp"
#include "aconf/paramspace.hpp"
#include "aconf/scenario.hpp"
#include "aconf/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace aconf;

namespace {

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
  return out;
}

// "a=1 b=x" (spaces or commas); INACTIVE entries are ignored.
Configuration parse_config(const ParameterSpace& space, const std::string& text) {
  std::string t = text;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::istringstream in(t);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error("configuration token '" + tok + "' is not name=value");
    std::string value = tok.substr(eq + 1);
    if (value == "INACTIVE") continue;
    kv.emplace_back(tok.substr(0, eq), value);
  }
  Configuration c = space.from_strings(kv);
  auto v = space.validate(c);
  if (!v.empty()) throw Error("invalid configuration: " + (v[0].parameter.empty() ? "" : v[0].parameter + ": ") + v[0].detail);
  return c;
}

Budget make_budget(double seconds, std::size_t runs) {
  Budget b;
  if (seconds > 0) b.max_seconds = seconds;
  if (runs > 0) b.max_runs = runs;
  if (!b.max_seconds && !b.max_runs) b.max_seconds = 172800.0;
  return b;
}

void write_outcomes_csv(std::ostream& out, const std::vector<InstanceOutcome>& v) {
  out << "instance,status,runtime,capped\n";
  for (const auto& o : v)
    out << o.instance << ',' << to_string(o.outcome.status) << ',' << format_number(o.outcome.runtime) << ','
        << (o.outcome.capped ? 1 : 0) << '\n';
}

// Reads scatter.csv back into per-instance outcomes.
std::pair<std::vector<InstanceOutcome>, std::vector<InstanceOutcome>> read_scatter(const std::string& path,
                                                                                   double cutoff) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  std::vector<InstanceOutcome> def, conf;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw Error(path + ":" + std::to_string(lineno) + ": expected 5 columns");
    auto outcome = [&](const std::string& cost, const std::string& status) {
      auto st = parse_status(status);
      if (!st) throw Error(path + ":" + std::to_string(lineno) + ": unknown status '" + status + "'");
      RunOutcome o{*st, 0.0, false};
      o.runtime = o.solved() ? std::stod(cost) : cutoff;
      return o;
    };
    def.push_back({f[0], outcome(f[1], f[3])});
    conf.push_back({f[0], outcome(f[2], f[4])});
  }
  return {def, conf};
}

struct Common {
  std::string scenario;
  std::uint64_t seed = 0;
  int cores = 4;
  double budget_seconds = 0;
  std::size_t budget_runs = 0;
  std::size_t grid = 7;
  std::string out_dir = "aconf-out";
};

Scenario load(const Common& c) {
  Scenario s = load_scenario(c.scenario);
  return s;
}

int cmd_validate_space(const std::string& path) {
  ParameterSpace space = load_pcs(path);
  std::cout << "ok: " << space.size() << " parameters, " << space.conditions().size() << " conditions, "
            << space.forbidden().size() << " forbidden clauses, depth " << space.condition_depth() << '\n';
  return 0;
}

int cmd_sample(const std::string& pcs, const Common& c, std::size_t n) {
  ParameterSpace space = !pcs.empty() ? load_pcs(pcs) : load(c).space;
  std::mt19937_64 rng(c.seed);
  for (std::size_t i = 0; i < n; ++i) std::cout << space.to_string(space.sample_uniform(rng)) << '\n';
  return 0;
}

int cmd_run_one(const Common& c, const std::string& config, const std::string& instance, double cutoff) {
  Scenario s = load(c);
  auto target = make_target(s);
  RunSpec spec;
  spec.config = config.empty() ? s.space.default_configuration() : parse_config(s.space, config);
  spec.instance_id = instance;
  spec.seed = c.seed;
  spec.cutoff_seconds = cutoff > 0 ? cutoff : s.cutoff_seconds;
  spec.memory_limit_mb = s.memory_limit_mb;
  RunOutcome o = execute_run(*target, s.space, spec);
  std::cout << to_string(o.status) << ", " << format_number(o.runtime) << (o.capped ? ", capped" : "") << '\n';
  return 0;
}

int cmd_configure(const Common& c, const std::string& approach_name) {
  Scenario s = load(c);
  auto target = make_target(s);
  Approach a = parse_approach(approach_name);
  ConfiguratorResult r = run_approach(a, s, *target, make_budget(c.budget_seconds, c.budget_runs), c.seed, c.grid,
                                      c.cores);
  const Scenario own = is_discretized(a) ? discretized_scenario(s, c.grid) : s;
  Configuration native = translate(own.space, s.space, r.incumbent);
  {
    auto out = open_out(c.out_dir, "trajectory.csv");
    write_trajectory_csv(out, r.trajectory);
  }
  if (r.history) {
    auto runs = open_out(c.out_dir, "runs.csv");
    r.history->write_csv(runs);
    auto configs = open_out(c.out_dir, "configs.csv");
    r.history->write_configs_csv(configs, own.space);
  }
  open_out(c.out_dir, "incumbent.txt") << s.space.to_string(native) << '\n';
  std::cout << "runs " << r.runs_used << ", time " << format_number(r.time_used) << " s\n"
            << s.space.to_string(native) << '\n';
  return 0;
}

int cmd_campaign(const Common& c, const std::vector<std::string>& approaches, std::size_t runs) {
  CampaignPlan plan;
  plan.scenario = load(c);
  auto target = make_target(plan.scenario, (fs::path(c.out_dir) / "logs").string());
  if (!approaches.empty()) {
    plan.approaches.clear();
    for (const auto& a : approaches) plan.approaches.push_back(parse_approach(a));
  }
  plan.independent_runs = runs;
  plan.units = c.cores;
  plan.budget = make_budget(c.budget_seconds, c.budget_runs);
  plan.seed = c.seed;
  plan.grid = c.grid;
  plan.out_dir = c.out_dir;
  CampaignReport r = run_campaign(plan, *target);

  const CostMetric metric{r.par_k, r.cutoff};
  write_report_text(std::cout, r);
  {
    auto out = open_out(c.out_dir, "report.txt");
    write_report_text(out, r);
  }
  {
    auto out = open_out(c.out_dir, "report.csv");
    write_report_csv(out, r);
  }
  {
    auto out = open_out(c.out_dir, "scatter.csv");
    emit_scatter(out, r.default_test_outcomes, r.configured_test_outcomes, metric);
  }
  json summary;
  summary["label"] = fs::path(c.scenario).parent_path().filename().string();
  summary["num_params"] = plan.scenario.space.size();
  summary["cutoff"] = r.cutoff;
  summary["par_k"] = r.par_k;
  summary["selected_train"] = r.selected ? r.incumbents[*r.selected].train.mean_cost : r.default_train.mean_cost;
  json best = json::object();
  for (const auto& e : r.incumbents) {
    const auto name = to_string(e.approach);
    if (!best.contains(name) || e.train.mean_cost < best[name].get<double>()) best[name] = e.train.mean_cost;
  }
  summary["approach_train"] = best;
  open_out(c.out_dir, "summary.json") << summary.dump(2) << '\n';
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& config, double cutoff) {
  Scenario s = load(c);
  auto target = make_target(s);
  Configuration conf = config.empty() ? s.space.default_configuration() : parse_config(s.space, config);
  std::optional<double> override;
  if (cutoff > 0) override = cutoff;
  auto outcomes = test_outcomes(s, *target, conf, override, c.cores);
  std::vector<RunOutcome> plain;
  for (const auto& o : outcomes) plain.push_back(o.outcome);
  const double kappa = override.value_or(s.cutoff_seconds);
  AggregateScore a = aggregate(plain, CostMetric{s.par_k, kappa});
  {
    auto out = open_out(c.out_dir, "test_outcomes.csv");
    write_outcomes_csv(out, outcomes);
  }
  std::cout << "cutoff " << format_number(kappa) << " s: PAR-" << s.par_k << ' ' << format_number(a.mean_cost)
            << ", solved " << a.solved_count << '/' << a.attempted_count << '\n';
  return 0;
}

int cmd_analyze(const Common& c, const std::vector<std::string>& dirs, int par_k, std::size_t samples) {
  if (dirs.empty() && samples == 0) throw UsageError("analyze needs campaign directories or --samples with --scenario");
  std::vector<SpeedupRecord> speedups;
  std::map<std::string, std::vector<std::pair<double, double>>> slowdowns;
  for (const auto& d : dirs) {
    std::ifstream in(fs::path(d) / "summary.json");
    if (!in) throw Error("cannot read '" + (fs::path(d) / "summary.json").string() + "'");
    json summary;
    try {
      summary = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(d + "/summary.json: " + e.what());
    }
    const double cutoff = summary.at("cutoff").get<double>();
    const int k = par_k > 0 ? par_k : summary.at("par_k").get<int>();
    auto [def, conf] = read_scatter((fs::path(d) / "scatter.csv").string(), cutoff);
    std::string label = summary.value("label", std::string());
    if (label.empty()) label = fs::path(d).filename().string();
    speedups.push_back(speedup_record(label, summary.at("num_params").get<std::size_t>(), def, conf, {k, cutoff}));
    const double selected = summary.at("selected_train").get<double>();
    for (const auto& [name, cost] : summary.at("approach_train").items())
      if (selected > 0 && cost.get<double>() > 0) slowdowns[name].emplace_back(cost.get<double>(), selected);
  }
  if (!dirs.empty()) {
    auto out = open_out(c.out_dir, "speedups.csv");
    write_speedups_csv(out, speedups);
    write_speedups_csv(std::cout, speedups);
    auto sd = open_out(c.out_dir, "slowdowns.csv");
    sd << "approach,scenarios,geometric_mean_slowdown\n";
    for (const auto& [name, pairs] : slowdowns)
      sd << name << ',' << pairs.size() << ',' << format_number(geometric_mean_slowdown(pairs)) << '\n';
  }
  if (samples > 0) {
    if (c.scenario.empty()) throw UsageError("--samples needs --scenario");
    Scenario s = load(c);
    auto target = make_target(s);
    std::mt19937_64 rng(c.seed);
    CorrelationStudy study = sample_correlation_study(s, *target, samples, rng, c.cores);
    auto out = open_out(c.out_dir, "correlation.csv");
    write_correlation_csv(out, study);
    std::cout << "spearman all " << format_number(study.spearman_all) << ", top " << study.top_count << ' '
              << (study.spearman_top ? format_number(*study.spearman_top) : std::string("undefined")) << '\n';
  }
  return 0;
}

int cmd_synth(const Common& c, const std::string& kind, const BundleOptions& opts, const std::string& wrapper) {
  SyntheticBundle b = standard_bundle(parse_surface_kind(kind), opts);
  std::string algo;
  if (!wrapper.empty()) algo = fs::absolute(wrapper).string();
  write_bundle(b, c.out_dir, c.seed, algo);
  std::cout << "wrote " << (fs::path(c.out_dir) / "scenario.txt").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algorithm configuration toolkit"};
  app.require_subcommand(1, 1);
  Common c;
  auto common = [&](CLI::App* sub, bool needs_scenario) {
    auto* opt = sub->add_option("--scenario", c.scenario, "Scenario file");
    if (needs_scenario) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Seed");
    sub->add_option("--cores", c.cores, "Parallel target runs")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", c.out_dir, "Output directory");
  };
  auto budget = [&](CLI::App* sub) {
    sub->add_option("--budget-seconds", c.budget_seconds, "Configuration time budget")->check(CLI::NonNegativeNumber);
    sub->add_option("--budget-runs", c.budget_runs, "Configuration run budget");
    sub->add_option("--grid", c.grid, "Grid points per numeric parameter when discretizing")->check(CLI::Range(2, 1000));
  };

  std::string pcs;
  auto* validate = app.add_subcommand("validate-space", "Parse and check a PCS file");
  validate->add_option("pcs", pcs, "PCS file")->required()->check(CLI::ExistingFile);

  std::size_t n = 10;
  auto* sample = app.add_subcommand("sample", "Draw uniform configurations");
  sample->add_option("pcs", pcs, "PCS file (or use --scenario)");
  sample->add_option("-n", n, "Number of configurations");
  common(sample, false);

  std::string config, instance;
  double cutoff = 0;
  auto* run_one = app.add_subcommand("run-one", "Execute a single target run");
  common(run_one, true);
  run_one->add_option("--config", config, "Configuration as name=value pairs (default configuration if absent)");
  run_one->add_option("--instance", instance, "Instance id")->required();
  run_one->add_option("--cutoff", cutoff, "Cutoff in seconds")->check(CLI::PositiveNumber);

  std::string approach = "smac";
  auto* configure = app.add_subcommand("configure", "Run one configurator");
  common(configure, true);
  budget(configure);
  configure->add_option("--approach", approach, "paramils-discretized, gga, gga-discretized, smac, smac-discretized");

  std::vector<std::string> approaches;
  std::size_t runs = 4;
  auto* campaign = app.add_subcommand("campaign", "Run every approach, select on train, evaluate on test");
  common(campaign, true);
  budget(campaign);
  campaign->add_option("--approach", approaches, "Restrict to these approaches (repeatable)");
  campaign->add_option("--runs", runs, "Independent runs per paramils/smac approach")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a configuration on the test set");
  common(evaluate, true);
  evaluate->add_option("--config", config, "Configuration as name=value pairs (default configuration if absent)");
  evaluate->add_option("--cutoff", cutoff, "Override the per-run cutoff")->check(CLI::PositiveNumber);

  std::vector<std::string> dirs;
  int par_k = 0;
  std::size_t samples = 0;
  auto* analyze = app.add_subcommand("analyze", "Speedups, slowdowns and train/test correlations");
  common(analyze, false);
  analyze->add_option("campaigns", dirs, "Campaign output directories");
  analyze->add_option("--par-k", par_k, "Recompute speedups with this penalty factor")->check(CLI::PositiveNumber);
  analyze->add_option("--samples", samples, "Random configurations for the correlation study");

  std::string kind = "valley", wrapper;
  BundleOptions opts;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scenario bundle");
  synth->add_option("--kind", kind, "valley, conditional_trap, crash_region, forbidden_edge, two_cluster");
  synth->add_option("--seed", c.seed, "Scenario seed");
  synth->add_option("--out-dir", c.out_dir, "Bundle directory")->required();
  synth->add_option("--train", opts.train, "Training instances");
  synth->add_option("--test", opts.test, "Test instances");
  synth->add_option("--cutoff", opts.cutoff, "Cutoff in seconds")->check(CLI::PositiveNumber);
  synth->add_option("--noise", opts.noise_sigma, "Lognormal runtime noise")->check(CLI::NonNegativeNumber);
  synth->add_option("--wrapper", wrapper, "Run through this wrapper executable instead of in process");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate_space(pcs);
    if (*sample) {
      if (pcs.empty() && c.scenario.empty()) throw UsageError("sample needs a PCS file or --scenario");
      return cmd_sample(pcs, c, n);
    }
    if (*run_one) return cmd_run_one(c, config, instance, cutoff);
    if (*configure) return cmd_configure(c, approach);
    if (*campaign) return cmd_campaign(c, approaches, runs);
    if (*evaluate) return cmd_evaluate(c, config, cutoff);
    if (*analyze) return cmd_analyze(c, dirs, par_k, samples);
    if (*synth) return cmd_synth(c, kind, opts, wrapper);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
