// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "aconf/analysis.hpp"
#include "aconf/gga.hpp"
#include "aconf/harness.hpp"
#include "aconf/paramils.hpp"
#include "aconf/smac.hpp"
#include "aconf/synthetic.hpp"

using namespace aconf;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

// Pinned tolerances.
constexpr double kOracleSlack = 0.10;      // criterion 1: within 10% of the oracle
constexpr double kSpeedupRelTol = 1e-3;    // criterion 7: 0.1%
constexpr double kRmseLimit = 0.1;         // criterion 9: log10 RMSE

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double train_par10(const SyntheticBundle& b, const ParameterSpace& space, const Configuration& c) {
  return surface_score(b.surface, space, c, b.train, {10, b.cutoff}).mean_cost;
}

// 1. Each configurator reaches the grid oracle's training PAR-10 within 10% on >= 9 of 10 seeds.
Outcome oracle_optimality() {
  auto b = standard_bundle(SurfaceKind::valley, {.train = 50, .test = 50, .cutoff = 2.0});
  Scenario sc = bundle_scenario(b);
  Scenario disc = discretized_scenario(sc, 7);
  SyntheticTarget target(b.surface, b.cutoff);
  const double oracle = brute_force_optimum(b.surface, sc.space, 7, {10, b.cutoff}, b.train).score.mean_cost;
  const Budget budget = Budget::runs(5000);
  int hits[3] = {0, 0, 0};
  double worst[3] = {0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    double ratio[3];
    auto ils = run_focused_ils(disc, target, budget, seed);
    ratio[0] = train_par10(b, disc.space, ils.incumbent) / oracle;
    auto gga = run_gga(sc, target, budget, seed);
    ratio[1] = train_par10(b, sc.space, gga.incumbent) / oracle;
    auto smac = run_smac(sc, target, budget, seed);
    ratio[2] = train_par10(b, sc.space, smac.incumbent) / oracle;
    for (int k = 0; k < 3; ++k) {
      hits[k] += ratio[k] <= 1.0 + kOracleSlack;
      worst[k] = std::max(worst[k], ratio[k]);
    }
  }
  bool pass = hits[0] >= 9 && hits[1] >= 9 && hits[2] >= 9;
  return {pass, "oracle " + fmt("%.6g", oracle) + "; seeds within 10%: focused-ils " + std::to_string(hits[0]) +
                    "/10, gga " + std::to_string(hits[1]) + "/10, smac " + std::to_string(hits[2]) +
                    "/10; worst ratios " + fmt("%.4f %.4f %.4f", worst[0], worst[1], worst[2])};
}

// 2. FocusedILS and SMAC turn the conditional switch on within 2000 runs on every seed.
Outcome conditional_trap() {
  auto b = standard_bundle(SurfaceKind::conditional_trap);
  Scenario sc = bundle_scenario(b);
  Scenario disc = discretized_scenario(sc, 7);
  SyntheticTarget target(b.surface, b.cutoff);
  int ils_on = 0, smac_on = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto ils = run_focused_ils(disc, target, Budget::runs(2000), seed);
    ils_on += disc.space.value_string(ils.incumbent, "switch") == std::optional<std::string>("on");
    auto smac = run_smac(sc, target, Budget::runs(2000), seed);
    smac_on += sc.space.value_string(smac.incumbent, "switch") == std::optional<std::string>("on");
  }
  return {ils_on == 10 && smac_on == 10,
          "switch on: focused-ils " + std::to_string(ils_on) + "/10, smac " + std::to_string(smac_on) + "/10"};
}

// 3. Runs inside the crash region are recorded at 10 * kappa_max and no incumbent lands there.
Outcome crash_region() {
  auto b = standard_bundle(SurfaceKind::crash_region);
  Scenario sc = bundle_scenario(b);
  Scenario disc = discretized_scenario(sc, 7);
  SyntheticTarget target(b.surface, b.cutoff);
  const double penalty = 10.0 * b.cutoff;
  auto inside = [](const ParameterSpace& space, const Configuration& c) {
    auto v = space.value_string(c, "level");
    if (!v) return false;
    double x = std::stod(*v);
    return x >= 0.55 && x <= 0.85;
  };
  std::size_t region_records = 0, bad_records = 0, incumbents_inside = 0, incumbents = 0;
  auto audit = [&](const ParameterSpace& space, const ConfiguratorResult& r) {
    for (const auto& rec : r.history->records()) {
      if (!inside(space, r.history->config(rec.config))) continue;
      ++region_records;
      if (penalized_cost(rec.outcome, {10, b.cutoff}) != penalty) ++bad_records;
    }
    ++incumbents;
    incumbents_inside += inside(space, r.incumbent);
  };
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    audit(disc.space, run_focused_ils(disc, target, Budget::runs(2000), seed));
    audit(sc.space, run_gga(sc, target, Budget::runs(2000), seed));
    audit(sc.space, run_smac(sc, target, Budget::runs(2000), seed));
  }
  return {region_records > 0 && bad_records == 0 && incumbents_inside == 0,
          std::to_string(region_records) + " region records, " + std::to_string(bad_records) +
              " not at 10*kappa; incumbents inside " + std::to_string(incumbents_inside) + "/" +
              std::to_string(incumbents)};
}

// 4. Capped comparisons agree with uncapped ones on deterministic surfaces.
Outcome capping_soundness() {
  const SurfaceKind kinds[] = {SurfaceKind::valley, SurfaceKind::conditional_trap, SurfaceKind::crash_region,
                               SurfaceKind::forbidden_edge, SurfaceKind::two_cluster};
  std::vector<SyntheticBundle> bundles;
  for (auto k : kinds) bundles.push_back(standard_bundle(k, {.train = 20, .test = 2}));
  std::mt19937_64 rng(2024);
  int agree = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto& b = bundles[static_cast<std::size_t>(t) % bundles.size()];
    SyntheticTarget target(b.surface, b.cutoff);
    const Configuration inc = rng() % 4 == 0 ? b.space.default_configuration() : b.space.sample_uniform(rng);
    const Configuration chal = rng() % 8 == 0 ? inc : b.space.sample_uniform(rng);
    const std::size_t prefix = 1 + rng() % b.train.size();
    std::vector<std::string> ids;
    for (const auto& i : b.train.instances) ids.push_back(i.id);
    auto verdict = [&](double bm) {
      RunHistory h(ids, 7, true);
      RunContext ctx(target, b.space, h, {10, b.cutoff}, 3072, Budget::runs(1000));
      const ConfigId i = h.intern(inc), c = h.intern(chal);
      ctx.evaluate_prefix(i, prefix);
      return ctx.compare_capped(i, c, prefix, bm);
    };
    agree += verdict(2.0) == verdict(kNoCapping);
  }
  return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " verdicts match bm=inf"};
}

// 5. PAR-k arithmetic.
Outcome par_arithmetic() {
  const RunOutcome timeout{RunStatus::timeout, 300.0, false};
  const double p10 = penalized_cost(timeout, 300.0, 10), p1 = penalized_cost(timeout, 300.0, 1);
  return {p10 == 3000.0 && p1 == 300.0, fmt("PAR-10 %.17g, PAR-1 %.17g", p10, p1)};
}

// 6. Ties on solved count are broken by mean runtime on solved instances.
Outcome ranking() {
  auto entry = [](const std::vector<double>& times) {
    std::vector<InstanceOutcome> v;
    for (std::size_t i = 0; i < times.size(); ++i) v.push_back({"i" + std::to_string(i), {RunStatus::sat, times[i], false}});
    return v;
  };
  auto r = rank({{"c", entry({7.68, 7.68, 7.68})}, {"a", entry({1.58, 1.58, 1.58})}, {"b", entry({4.20, 4.20, 4.20})}},
                {10, 300});
  std::string order;
  for (const auto& e : r) order += e.label + fmt("(%.2f) ", e.mean_runtime_solved);
  bool pass = r.size() == 3 && r[0].label == "a" && r[1].label == "b" && r[2].label == "c";
  return {pass, "order " + order};
}

// 7. Speedup of an all-timeout default over a configured mean of 2 s.
Outcome speedup() {
  std::vector<InstanceOutcome> def, conf;
  for (int i = 0; i < 250; ++i) {
    def.push_back({"i" + std::to_string(i), {RunStatus::timeout, 300.0, false}});
    conf.push_back({"i" + std::to_string(i), {RunStatus::sat, 2.0, false}});
  }
  double s = speedup_factor(def, conf, {10, 300});
  return {std::abs(s - 1500.0) <= kSpeedupRelTol * 1500.0, fmt("speedup %.10g", s)};
}

// 8. GGA intensification schedule endpoints.
Outcome gga_schedule() {
  GgaParams p;
  bool pass = true;
  for (std::size_t target : {50u, 250u, 1000u}) {
    pass = pass && intensification_schedule(p, target, 1) == 4;
    for (std::size_t g = 75; g <= 100; ++g) pass = pass && intensification_schedule(p, target, g) == target;
  }
  return {pass, "N(1) = " + std::to_string(intensification_schedule(p, 250, 1)) +
                    ", N(75..100) = " + std::to_string(intensification_schedule(p, 250, 75)) + " for N_target 250"};
}

// 9. Model sanity: marginal = mean of per-instance predictions, EI >= 0, separable fit.
Outcome model_sanity() {
  auto b = standard_bundle(SurfaceKind::two_cluster, {.train = 30, .test = 4});
  Scenario sc = bundle_scenario(b);
  SyntheticTarget target(b.surface, b.cutoff);
  auto r = run_smac(sc, target, Budget::runs(600), 1);
  auto model = SmacModel::fit(*r.history, sc.space, sc.features, scenario_metric(sc), ForestParams{});
  std::mt19937_64 rng(5);
  bool bitwise = model.uses_features();
  for (int i = 0; i < 50 && bitwise; ++i) {
    auto c = sc.space.sample_uniform(rng);
    double sum = 0.0;
    for (const auto& id : r.history->instances()) sum += model.predict(c, sc.features->row(id)).mean;
    bitwise = model.marginal_predict(c) == sum / static_cast<double>(r.history->instances().size());
  }

  std::uniform_real_distribution<double> mu(-5, 5), var(0, 10);
  std::size_t negative = 0;
  for (int i = 0; i < 100000; ++i) negative += expected_improvement(mu(rng), var(rng), mu(rng)) < 0.0;

  ParameterSpace space = parse_pcs("x [0,1] [0]\ny [0,1] [0]\n");
  Encoder enc(space);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 200; ++i) {
    auto c = space.sample_uniform(rng);
    x.push_back(enc.encode(c));
    y.push_back(std::log10(1.0 + std::abs(c[0] - 0.3) + 2.0 * std::abs(c[1] - 0.7)));
  }
  RandomForest forest;
  forest.fit(x, y, enc.cardinality(), ForestParams{});
  double se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) se += std::pow(forest.predict(x[i]).mean - y[i], 2);
  const double rmse = std::sqrt(se / static_cast<double>(x.size()));
  return {bitwise && negative == 0 && rmse < kRmseLimit,
          std::string("marginal bitwise ") + (bitwise ? "yes" : "no") + ", negative EI " + std::to_string(negative) +
              "/100000, in-sample log-RMSE " + fmt("%.4f", rmse)};
}

// Counts test-set runs per configuration.
class CountingTarget : public Target {
 public:
  CountingTarget(const Target& inner, InstanceSet test) : inner_(inner), test_(std::move(test)) {}
  RunOutcome run(const ParameterSpace& space, const RunSpec& spec, RunControl* control) const override {
    if (test_.contains(spec.instance_id)) ++test_runs_[space.to_string(spec.config)][spec.instance_id];
    return inner_.run(space, spec, control);
  }
  bool in_process() const override { return inner_.in_process(); }
  std::map<std::string, std::map<std::string, int>>& test_runs() const { return test_runs_; }

 private:
  const Target& inner_;
  InstanceSet test_;
  mutable std::map<std::string, std::map<std::string, int>> test_runs_;
};

// 10. Campaign pipeline: selection by full-train cost, one test evaluation for the selection.
Outcome pipeline() {
  const SurfaceKind kinds[] = {SurfaceKind::valley, SurfaceKind::crash_region, SurfaceKind::forbidden_edge,
                               SurfaceKind::conditional_trap};
  int ok = 0;
  std::string first_problem;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto b = standard_bundle(kinds[seed % 4], {.train = 15, .test = 15});
    CampaignPlan plan;
    plan.scenario = bundle_scenario(b, seed);
    plan.budget = Budget::runs(300);
    plan.independent_runs = 2;
    plan.seed = seed;
    plan.gga.population = 16;
    SyntheticTarget inner(b.surface, b.cutoff);
    CountingTarget target(inner, b.test);
    auto r = run_campaign(plan, target);
    bool good = r.selected.has_value();
    // Independent full-train costs from the analytic surface.
    double best = 1e300;
    for (const auto& e : r.incumbents) best = std::min(best, train_par10(b, plan.scenario.space, e.config));
    if (good) good = train_par10(b, plan.scenario.space, r.selected_config) == best;
    // The test set sees the default and the selection only, once per instance.
    const std::string def = plan.scenario.space.to_string(plan.scenario.space.default_configuration());
    for (const auto& [config, per_instance] : target.test_runs()) {
      good = good && (config == def || config == r.selected_text);
      for (const auto& [inst, n] : per_instance) good = good && n == (config == def && def == r.selected_text ? 2 : 1);
      good = good && per_instance.size() == b.test.size();
    }
    good = good && target.test_runs().count(r.selected_text) == 1 && r.configured_test_evaluations == 1;
    ok += good;
    if (!good && first_problem.empty()) first_problem = "; first failing seed " + std::to_string(seed);
  }
  return {ok == 20, std::to_string(ok) + "/20 campaigns satisfy the invariant" + first_problem};
}

// Random PCS text with conditions and forbidden clauses.
std::string random_pcs(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nparams(1, 8), kind(0, 2), ncat(2, 5);
  std::uniform_real_distribution<double> u(0, 1);
  const int n = nparams(rng);
  std::string text;
  std::vector<std::pair<std::string, std::vector<std::string>>> cats;
  std::vector<std::string> lines;
  for (int i = 0; i < n; ++i) {
    const std::string name = "p" + std::to_string(i);
    const int k = kind(rng);
    if (k == 0) {
      std::vector<std::string> vals;
      const int m = ncat(rng);
      for (int v = 0; v < m; ++v) vals.push_back("v" + std::to_string(v));
      std::string line = name + " {";
      for (int v = 0; v < m; ++v) line += (v ? "," : "") + vals[static_cast<std::size_t>(v)];
      line += "} [" + vals[rng() % vals.size()] + "]";
      lines.push_back(line);
      cats.emplace_back(name, vals);
    } else if (k == 1) {
      const long lo = static_cast<long>(rng() % 20) + 1, hi = lo + 1 + static_cast<long>(rng() % 200);
      const long def = lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
      lines.push_back(name + " [" + std::to_string(lo) + "," + std::to_string(hi) + "] [" + std::to_string(def) + "] " +
                      (u(rng) < 0.3 ? "il" : "i"));
    } else {
      const double lo = std::round(u(rng) * 100) / 100 + 0.01, hi = lo + 0.5 + std::round(u(rng) * 1000) / 10;
      const double def = lo + (hi - lo) * std::round(u(rng) * 100) / 100;
      lines.push_back(name + " [" + format_number(lo) + "," + format_number(hi) + "] [" + format_number(def) + "]" +
                      (u(rng) < 0.3 ? " l" : ""));
    }
  }
  for (const auto& l : lines) text += l + "\n";
  // Conditions: a later parameter depends on an earlier categorical.
  for (int i = 1; i < n; ++i) {
    if (u(rng) > 0.4) continue;
    std::vector<std::size_t> parents;
    for (std::size_t c = 0; c < cats.size(); ++c)
      if (std::stoi(cats[c].first.substr(1)) < i) parents.push_back(c);
    if (parents.empty()) continue;
    const auto& [pname, vals] = cats[parents[rng() % parents.size()]];
    text += "p" + std::to_string(i) + " | " + pname + " in {" + vals[rng() % vals.size()] + "}\n";
  }
  if (cats.size() >= 2 && u(rng) < 0.5) {
    const auto& a = cats[0];
    const auto& b = cats[1];
    text += "{" + a.first + "=" + a.second[rng() % a.second.size()] + ", " + b.first + "=" +
            b.second[rng() % b.second.size()] + "}\n";
  }
  return text;
}

// 11. PCS round trips, sampling validity and neighborhood validity.
Outcome pcs_properties() {
  std::mt19937_64 rng(11);
  std::size_t spaces = 0, roundtrip_bad = 0, samples = 0, invalid_samples = 0, neighbors = 0, bad_neighbors = 0;
  while (spaces < 500) {
    ParameterSpace space;
    try {
      space = parse_pcs(random_pcs(rng));
    } catch (const SpaceError&) {
      continue;  // the random forbidden clause hit the default
    }
    ++spaces;
    if (!(parse_pcs(serialize_pcs(space)) == space)) ++roundtrip_bad;
    const ParameterSpace disc = space.discretize(5);
    for (int i = 0; i < 20; ++i) {
      auto c = space.sample_uniform(rng);
      ++samples;
      if (!space.is_valid(c)) ++invalid_samples;
      auto d = disc.sample_uniform(rng);
      for (const auto& nb : disc.neighbors(d)) {
        ++neighbors;
        if (!disc.is_valid(nb) || disc.is_forbidden(nb) || nb == d) ++bad_neighbors;
      }
    }
  }
  return {roundtrip_bad == 0 && invalid_samples == 0 && bad_neighbors == 0 && samples >= 10000,
          std::to_string(spaces) + " spaces (" + std::to_string(roundtrip_bad) + " round-trip failures), " +
              std::to_string(invalid_samples) + "/" + std::to_string(samples) + " invalid samples, " +
              std::to_string(bad_neighbors) + "/" + std::to_string(neighbors) + " bad neighbors"};
}

// 12. Train/test rank correlation of random configurations.
Outcome correlation() {
  auto same = standard_bundle(SurfaceKind::valley, {.train = 20, .test = 20});
  same.surface.instance_spread = 0.0;  // every instance behaves identically
  Scenario s1 = bundle_scenario(same);
  SyntheticTarget t1(same.surface, same.cutoff);
  std::mt19937_64 rng(12);
  auto identical = sample_correlation_study(s1, t1, 100, rng);

  auto mixed = standard_bundle(SurfaceKind::two_cluster, {.train = 40, .test = 40});
  Scenario s2 = bundle_scenario(mixed);
  SyntheticTarget t2(mixed.surface, mixed.cutoff);
  auto shifted = sample_correlation_study(s2, t2, 100, rng);
  const bool pass = identical.spearman_all == 1.0 && shifted.spearman_top && *shifted.spearman_top < shifted.spearman_all;
  return {pass, fmt("identical surface %.17g; two_cluster overall %.4f, top-20%% %.4f", identical.spearman_all,
                    shifted.spearman_all, shifted.spearman_top.value_or(std::nan("")))};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-optimality", oracle_optimality}, {"conditional-trap", conditional_trap},
      {"crash-region", crash_region},           {"capping-soundness", capping_soundness},
      {"par-arithmetic", par_arithmetic},       {"ranking-tiebreak", ranking},
      {"speedup-factor", speedup},              {"gga-schedule", gga_schedule},
      {"model-sanity", model_sanity},           {"pipeline-invariant", pipeline},
      {"pcs-properties", pcs_properties},       {"correlation-study", correlation}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-20s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
