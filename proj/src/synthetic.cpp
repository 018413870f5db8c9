#include "aconf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace aconf {

namespace {

using nlohmann::json;

constexpr const char* kInlinePrefix = "synthetic-json:";

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return mix64(h);
}

double unit_from(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

std::optional<double> as_number(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

double term_distance(const SurfaceTerm& term, const std::string& label, const std::string* override_optimum) {
  if (term.label_optimum) {
    const std::string& opt = override_optimum ? *override_optimum : *term.label_optimum;
    return label == opt ? 0.0 : 1.0;
  }
  auto x = as_number(label);
  if (!x) return 1.0;
  double opt = term.optimum;
  if (override_optimum) {
    if (auto o = as_number(*override_optimum)) opt = *o;
  }
  auto scale = [&](double v) { return term.log_scale ? std::log(std::max(v, 1e-300)) : v; };
  double span = scale(term.hi) - scale(term.lo);
  if (!(span > 0)) return 0.0;
  return std::clamp(std::abs(scale(*x) - scale(opt)) / span, 0.0, 1.0);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::valley:
      return "valley";
    case SurfaceKind::conditional_trap:
      return "conditional_trap";
    case SurfaceKind::crash_region:
      return "crash_region";
    case SurfaceKind::forbidden_edge:
      return "forbidden_edge";
    case SurfaceKind::two_cluster:
      return "two_cluster";
  }
  return "valley";
}

SurfaceKind parse_surface_kind(const std::string& s) {
  for (auto k : {SurfaceKind::valley, SurfaceKind::conditional_trap, SurfaceKind::crash_region,
                 SurfaceKind::forbidden_edge, SurfaceKind::two_cluster})
    if (to_string(k) == s) return k;
  throw Error("unknown surface kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// JSON

SyntheticSurface parse_surface_json(const std::string& text) {
  SyntheticSurface s;
  try {
    json j = json::parse(text);
    s.kind = parse_surface_kind(j.at("kind").get<std::string>());
    s.base_runtime = j.value("base_runtime", 1.0);
    s.noise_sigma = j.value("noise_sigma", 0.0);
    s.instance_spread = j.value("instance_spread", 0.0);
    s.sleep = j.value("sleep", false);
    for (const auto& t : j.value("terms", json::array())) {
      SurfaceTerm term;
      term.param = t.at("param").get<std::string>();
      term.weight = t.value("weight", 1.0);
      const auto& opt = t.at("optimum");
      if (opt.is_string()) {
        term.label_optimum = opt.get<std::string>();
      } else {
        term.optimum = opt.get<double>();
        term.lo = t.at("lo").get<double>();
        term.hi = t.at("hi").get<double>();
        term.log_scale = t.value("log", false);
      }
      s.terms.push_back(std::move(term));
    }
    if (j.contains("trap")) {
      const auto& t = j["trap"];
      s.trap = TrapSwitch{t.at("param").get<std::string>(), t.at("on").get<std::string>(), t.at("runtime").get<double>()};
    }
    if (j.contains("crash")) {
      const auto& c = j["crash"];
      CrashRegion r;
      r.param = c.at("param").get<std::string>();
      if (c.contains("value")) {
        r.label = c["value"].get<std::string>();
      } else {
        r.lo = c.at("lo").get<double>();
        r.hi = c.at("hi").get<double>();
      }
      s.crash = r;
    }
    for (const auto& c : j.value("clusters", json::array())) {
      ClusterSpec spec;
      spec.multiplier = c.value("multiplier", 1.0);
      const json optima = c.value("optima", json::object());
      for (const auto& [name, v] : optima.items())
        spec.optima[name] = v.is_string() ? v.get<std::string>() : format_number(v.get<double>());
      s.clusters.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad surface description: ") + e.what());
  }
  if (!(s.base_runtime > 0)) throw Error("surface base_runtime must be positive");
  if (s.kind == SurfaceKind::conditional_trap && !s.trap) throw Error("conditional_trap surface needs a 'trap'");
  if (s.kind == SurfaceKind::crash_region && !s.crash) throw Error("crash_region surface needs a 'crash'");
  if (s.kind == SurfaceKind::two_cluster && s.clusters.size() < 2) throw Error("two_cluster surface needs two clusters");
  return s;
}

SyntheticSurface load_surface(const std::string& path) { return parse_surface_json(read_file(path)); }

std::string surface_to_json(const SyntheticSurface& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["base_runtime"] = s.base_runtime;
  j["noise_sigma"] = s.noise_sigma;
  j["instance_spread"] = s.instance_spread;
  if (s.sleep) j["sleep"] = true;
  j["terms"] = json::array();
  for (const auto& t : s.terms) {
    json jt{{"param", t.param}, {"weight", t.weight}};
    if (t.label_optimum) {
      jt["optimum"] = *t.label_optimum;
    } else {
      jt["optimum"] = t.optimum;
      jt["lo"] = t.lo;
      jt["hi"] = t.hi;
      if (t.log_scale) jt["log"] = true;
    }
    j["terms"].push_back(jt);
  }
  if (s.trap) j["trap"] = {{"param", s.trap->param}, {"on", s.trap->on_value}, {"runtime", s.trap->trap_runtime}};
  if (s.crash) {
    if (s.crash->label) j["crash"] = {{"param", s.crash->param}, {"value", *s.crash->label}};
    else j["crash"] = {{"param", s.crash->param}, {"lo", s.crash->lo}, {"hi", s.crash->hi}};
  }
  if (!s.clusters.empty()) {
    j["clusters"] = json::array();
    for (const auto& c : s.clusters) j["clusters"].push_back({{"multiplier", c.multiplier}, {"optima", c.optima}});
  }
  return j.dump();
}

// ---------------------------------------------------------------------------
// Evaluation

std::size_t instance_cluster(const SyntheticSurface& surface, const std::string& instance) {
  if (surface.clusters.empty()) return 0;
  const std::size_t n = surface.clusters.size();
  if (instance.size() > 2 && instance[0] == 'c' && std::isdigit(static_cast<unsigned char>(instance[1]))) {
    std::size_t k = 0, i = 1;
    while (i < instance.size() && std::isdigit(static_cast<unsigned char>(instance[i]))) k = k * 10 + (instance[i++] - '0');
    if (i < instance.size() && instance[i] == '_') return k % n;
  }
  return hash_string(instance, 7) % n;
}

double instance_factor(const SyntheticSurface& surface, const std::string& instance) {
  if (surface.instance_spread == 0.0) return 1.0;
  return std::exp(surface.instance_spread * (unit_from(hash_string(instance)) - 0.5));
}

NamedValues named_values(const ParameterSpace& space, const Configuration& config) {
  NamedValues out;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (!is_inactive(config[i])) out[space.parameters()[i].name] = space.parameters()[i].format(config[i]);
  return out;
}

std::optional<double> surface_runtime(const SyntheticSurface& s, const NamedValues& values, const std::string& instance,
                                      std::uint64_t seed) {
  auto value_of = [&](const std::string& name) -> const std::string* {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
  };

  if (s.crash) {
    if (const auto* v = value_of(s.crash->param)) {
      bool inside = false;
      if (s.crash->label) {
        inside = *v == *s.crash->label;
      } else if (auto x = as_number(*v)) {
        inside = *x >= s.crash->lo && *x <= s.crash->hi;
      }
      if (inside) return std::nullopt;
    }
  }

  double runtime;
  const auto* trap_value = s.trap ? value_of(s.trap->param) : nullptr;
  if (s.trap && (trap_value == nullptr || *trap_value != s.trap->on_value)) {
    runtime = s.trap->trap_runtime;
  } else {
    const ClusterSpec* cluster = nullptr;
    if (s.kind == SurfaceKind::two_cluster && !s.clusters.empty()) cluster = &s.clusters[instance_cluster(s, instance)];
    double sum = 0.0;
    for (const auto& term : s.terms) {
      const auto* v = value_of(term.param);
      if (v == nullptr) continue;
      const std::string* override_opt = nullptr;
      if (cluster != nullptr) {
        auto it = cluster->optima.find(term.param);
        if (it != cluster->optima.end()) override_opt = &it->second;
      }
      sum += term.weight * term_distance(term, *v, override_opt);
    }
    runtime = s.base_runtime * (1.0 + sum) * instance_factor(s, instance);
    if (cluster != nullptr) runtime *= cluster->multiplier;
  }

  if (s.noise_sigma > 0.0) {
    std::string key;
    for (const auto& [name, v] : values) key += name + '=' + v + ';';
    std::uint64_t h = hash_string(key, hash_string(instance) ^ mix64(seed));
    double u1 = std::max(unit_from(h), 1e-300);
    double u2 = unit_from(mix64(h));
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    runtime *= std::exp(s.noise_sigma * z);
  }
  return runtime;
}

RunOutcome eval_surface(const SyntheticSurface& surface, const NamedValues& values, const std::string& instance,
                        std::uint64_t seed, double cutoff, double kappa_max, ExpectedStatus expected) {
  cutoff = std::min(cutoff, kappa_max);
  auto runtime = surface_runtime(surface, values, instance, seed);
  if (!runtime) {
    double t = std::min(0.1 * surface.base_runtime * instance_factor(surface, instance), cutoff);
    return {RunStatus::crashed, t, false};
  }
  if (*runtime > cutoff) return {RunStatus::timeout, cutoff, cutoff < kappa_max};
  RunStatus status = RunStatus::success;
  if (expected == ExpectedStatus::sat) status = RunStatus::sat;
  if (expected == ExpectedStatus::unsat) status = RunStatus::unsat;
  return {status, *runtime, false};
}

RunOutcome eval_surface(const SyntheticSurface& surface, const ParameterSpace& space, const Configuration& config,
                        const std::string& instance, std::uint64_t seed, double cutoff, double kappa_max,
                        ExpectedStatus expected) {
  return eval_surface(surface, named_values(space, config), instance, seed, cutoff, kappa_max, expected);
}

SyntheticTarget::SyntheticTarget(SyntheticSurface surface, double kappa_max, InstanceSet known)
    : surface_(std::move(surface)), kappa_max_(kappa_max), known_(std::move(known)) {}

RunOutcome SyntheticTarget::run(const ParameterSpace& space, const RunSpec& spec, RunControl* control) const {
  double cutoff = spec.cutoff_seconds;
  if (control != nullptr) {
    if (control->cancelled.load()) return {RunStatus::timeout, 0.0, true};
    cutoff = std::min(cutoff, control->cutoff.load());
  }
  const auto* inst = known_.find(spec.instance_id);
  return eval_surface(surface_, space, spec.config, spec.instance_id, spec.seed, cutoff, kappa_max_,
                      inst ? inst->expected : ExpectedStatus::unknown);
}

std::optional<SyntheticSurface> scenario_surface(const Scenario& scenario) {
  const auto& cmd = scenario.target_command;
  if (cmd.rfind(kInlinePrefix, 0) == 0) return parse_surface_json(cmd.substr(std::string(kInlinePrefix).size()));
  if (cmd.rfind(kSyntheticPrefix, 0) == 0) {
    std::filesystem::path p = cmd.substr(std::string(kSyntheticPrefix).size());
    if (p.is_relative()) p = std::filesystem::path(scenario.execdir) / p;
    return load_surface(p.string());
  }
  return std::nullopt;
}

std::unique_ptr<Target> make_target(const Scenario& scenario, const std::string& log_dir) {
  if (auto surface = scenario_surface(scenario)) {
    InstanceSet known = scenario.train;
    known.instances.insert(known.instances.end(), scenario.test.instances.begin(), scenario.test.instances.end());
    return std::make_unique<SyntheticTarget>(std::move(*surface), scenario.cutoff_seconds, std::move(known));
  }
  return std::make_unique<ProcessTarget>(scenario, log_dir);
}

// ---------------------------------------------------------------------------
// Oracle

std::vector<Configuration> enumerate_space(const ParameterSpace& space, std::size_t limit) {
  for (const auto& p : space.parameters())
    if (p.kind == ParamKind::real) throw UnsupportedSpace("cannot enumerate real-valued parameter '" + p.name + "'");
  const auto& order = space.topological_order();
  std::vector<Configuration> out;
  std::vector<double> values(space.size(), kInactive);
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == order.size()) {
      Configuration c(values);
      if (!space.is_forbidden(c)) {
        if (out.size() >= limit) throw Error("space has more than " + std::to_string(limit) + " configurations");
        out.push_back(std::move(c));
      }
      return;
    }
    const std::size_t i = order[depth];
    const auto& p = space.parameters()[i];
    if (!space.is_active(values, i)) {
      values[i] = kInactive;
      rec(depth + 1);
      return;
    }
    if (p.kind == ParamKind::categorical) {
      for (std::size_t k = 0; k < p.values.size(); ++k) {
        values[i] = static_cast<double>(k);
        rec(depth + 1);
      }
    } else {
      for (double v = p.lo; v <= p.hi; v += 1.0) {
        values[i] = v;
        rec(depth + 1);
      }
    }
    values[i] = kInactive;
  };
  rec(0);
  return out;
}

AggregateScore surface_score(const SyntheticSurface& surface, const ParameterSpace& space, const Configuration& config,
                             const InstanceSet& instances, const CostMetric& metric) {
  SyntheticSurface exact = surface;
  exact.noise_sigma = 0.0;
  const auto named = named_values(space, config);
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(instances.size());
  for (const auto& inst : instances.instances)
    outcomes.push_back(eval_surface(exact, named, inst.id, 0, metric.cutoff, metric.cutoff, inst.expected));
  return aggregate(outcomes, metric);
}

OracleResult brute_force_optimum(const SyntheticSurface& surface, const ParameterSpace& space, std::size_t grid,
                                 const CostMetric& metric, const InstanceSet& train) {
  OracleResult r;
  r.space = space.is_discrete() ? space : space.discretize(grid);
  bool first = true;
  for (const auto& c : enumerate_space(r.space)) {
    auto score = surface_score(surface, r.space, c, train, metric);
    ++r.evaluated;
    if (first || score.mean_cost < r.score.mean_cost) {
      r.config = c;
      r.score = score;
      first = false;
    }
  }
  if (first) throw SpaceTooConstrained("space admits no configuration");
  return r;
}

// ---------------------------------------------------------------------------
// Standard bundles

namespace {

SurfaceTerm label_term(const std::string& param, const std::string& optimum, double weight) {
  SurfaceTerm t;
  t.param = param;
  t.label_optimum = optimum;
  t.weight = weight;
  return t;
}

SurfaceTerm numeric_term(const std::string& param, double optimum, double lo, double hi, double weight,
                         bool log_scale = false) {
  SurfaceTerm t;
  t.param = param;
  t.optimum = optimum;
  t.lo = lo;
  t.hi = hi;
  t.weight = weight;
  t.log_scale = log_scale;
  return t;
}

InstanceSet make_instances(const std::string& prefix, std::size_t n, std::size_t offset) {
  InstanceSet s;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03zu", i + offset);
    s.instances.push_back({prefix + buf, ExpectedStatus::unknown});
  }
  return s;
}

InstanceSet make_cluster_instances(const std::string& tag, std::size_t n, double frac0) {
  InstanceSet s;
  const auto n0 = static_cast<std::size_t>(std::llround(frac0 * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "c%d_%s%03zu", i < n0 ? 0 : 1, tag.c_str(), i);
    s.instances.push_back({buf, ExpectedStatus::unknown});
  }
  return s;
}

}  // namespace

SyntheticBundle standard_bundle(SurfaceKind kind, const BundleOptions& o) {
  SyntheticBundle b;
  b.cutoff = o.cutoff;
  b.surface.kind = kind;
  b.surface.noise_sigma = o.noise_sigma;
  b.train = make_instances("train_", o.train, 0);
  b.test = make_instances("test_", o.test, 0);

  switch (kind) {
    case SurfaceKind::valley:
      b.space = parse_pcs(
          "alg {greedy,lookahead,random} [greedy]\n"
          "pre {none,light,full} [none]\n"
          "depth [1,13] [1] i\n"
          "restarts [10,1000] [10] il\n"
          "ratio [0,1] [0.9]\n");
      b.surface.base_runtime = 0.5;
      b.surface.instance_spread = 1.0;
      b.surface.terms = {label_term("alg", "random", 0.5), label_term("pre", "light", 0.3),
                         numeric_term("depth", 9, 1, 13, 0.24), numeric_term("restarts", 100, 10, 1000, 0.2, true),
                         numeric_term("ratio", 0.5, 0, 1, 0.3)};
      break;

    case SurfaceKind::conditional_trap:
      b.space = parse_pcs(
          "switch {off,on} [off]\n"
          "gain [0,1] [0.2]\n"
          "mode {p,q,r} [p]\n"
          "noise [0,1] [0.5]\n"
          "gain | switch in {on}\n"
          "mode | switch in {on}\n");
      b.surface.base_runtime = 0.2;
      b.surface.instance_spread = 0.6;
      b.surface.trap = TrapSwitch{"switch", "on", 1.0};
      b.surface.terms = {numeric_term("gain", 0.8, 0, 1, 6.0), label_term("mode", "r", 3.0),
                         numeric_term("noise", 0.5, 0, 1, 0.5)};
      break;

    case SurfaceKind::crash_region:
      b.space = parse_pcs(
          "heur {a,b,c} [a]\n"
          "level [0,1] [0.1]\n"
          "width [1,9] [1] i\n");
      b.surface.base_runtime = 0.3;
      b.surface.instance_spread = 0.6;
      b.surface.crash = CrashRegion{"level", std::nullopt, 0.55, 0.85};
      b.surface.terms = {label_term("heur", "b", 0.8), numeric_term("level", 0.7, 0, 1, 2.0),
                         numeric_term("width", 5, 1, 9, 0.5)};
      break;

    case SurfaceKind::forbidden_edge:
      b.space = parse_pcs(
          "engine {x,y,z} [x]\n"
          "boost {off,on} [off]\n"
          "scale [0,1] [0]\n"
          "{engine=z, boost=on}\n");
      b.surface.base_runtime = 0.3;
      b.surface.instance_spread = 0.6;
      b.surface.terms = {label_term("engine", "z", 1.0), label_term("boost", "on", 0.4),
                         numeric_term("scale", 0.5, 0, 1, 0.6)};
      break;

    case SurfaceKind::two_cluster: {
      b.space = parse_pcs(
          "family {f1,f2,f3} [f1]\n"
          "bias [0,1] [0.5]\n"
          "tilt [0,1] [0]\n");
      b.surface.base_runtime = 0.2;
      b.surface.instance_spread = 0.3;
      b.surface.terms = {label_term("family", "f2", 2.0), numeric_term("bias", 0.5, 0, 1, 1.0),
                         numeric_term("tilt", 0.5, 0, 1, 0.3)};
      ClusterSpec c0, c1;
      c0.optima["bias"] = "0.2";
      c1.optima["bias"] = "0.8";
      c1.multiplier = 1.2;
      b.surface.clusters = {c0, c1};
      b.train = make_cluster_instances("train_", o.train, o.train_cluster0);
      b.test = make_cluster_instances("test_", o.test, o.test_cluster0);
      InstanceFeatures f;
      f.feature_names = {"cluster_signal", "size"};
      std::mt19937_64 rng(o.seed);
      std::normal_distribution<double> jitter(0.0, 0.05);
      std::uniform_real_distribution<double> size(0.0, 1.0);
      for (const auto& inst : b.train.instances) {
        double cluster = static_cast<double>(instance_cluster(b.surface, inst.id));
        f.rows[inst.id] = {cluster + jitter(rng), size(rng)};
      }
      b.features = std::move(f);
      break;
    }
  }
  return b;
}

Scenario bundle_scenario(const SyntheticBundle& bundle, std::uint64_t seed) {
  Scenario s;
  s.target_command = std::string(kInlinePrefix) + surface_to_json(bundle.surface);
  s.space = bundle.space;
  s.train = bundle.train;
  s.test = bundle.test;
  s.features = bundle.features;
  s.cutoff_seconds = bundle.cutoff;
  s.deterministic_target = bundle.surface.noise_sigma == 0.0;
  s.seed = seed;
  s.cores = 1;
  return s;
}

void write_bundle(const SyntheticBundle& bundle, const std::string& dir, std::uint64_t seed, const std::string& algo) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
    out << content;
  };
  auto instances_text = [](const InstanceSet& set) {
    std::string out;
    for (const auto& inst : set.instances) {
      out += inst.id;
      if (inst.expected != ExpectedStatus::unknown) out += ' ' + to_string(inst.expected);
      out += '\n';
    }
    return out;
  };
  write("space.pcs", serialize_pcs(bundle.space));
  write("surface.json", surface_to_json(bundle.surface) + "\n");
  write("train.txt", instances_text(bundle.train));
  write("test.txt", instances_text(bundle.test));

  std::ostringstream sc;
  sc << "algo = " << (algo.empty() ? std::string(kSyntheticPrefix) + "surface.json" : algo) << '\n'
     << "paramfile = space.pcs\n"
     << "instance_file = train.txt\n"
     << "test_instance_file = test.txt\n"
     << "cutoff_time = " << format_number(bundle.cutoff) << '\n'
     << "deterministic = " << (bundle.surface.noise_sigma == 0.0 ? "true" : "false") << '\n'
     << "seed = " << seed << '\n';
  if (!algo.empty()) sc << "instance_info = surface.json\n";
  if (bundle.features) {
    std::ostringstream f;
    f << "instance";
    for (const auto& n : bundle.features->feature_names) f << ',' << n;
    f << '\n';
    for (const auto& [id, row] : bundle.features->rows) {
      f << id;
      for (double v : row) f << ',' << format_number(v);
      f << '\n';
    }
    write("features.csv", f.str());
    sc << "feature_file = features.csv\n";
  }
  write("scenario.txt", sc.str());
}

}  // namespace aconf
