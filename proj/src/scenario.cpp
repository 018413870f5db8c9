#include "aconf/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

namespace aconf {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used == value.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ScenarioError("'" + key + "' expects a number, got '" + value + "'");
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ScenarioError("'" + key + "' expects an integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ScenarioError("'" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

std::string to_string(ExpectedStatus s) {
  switch (s) {
    case ExpectedStatus::sat:
      return "SAT";
    case ExpectedStatus::unsat:
      return "UNSAT";
    case ExpectedStatus::unknown:
      return "UNKNOWN";
  }
  return "UNKNOWN";
}

bool InstanceSet::contains(const std::string& id) const { return find(id) != nullptr; }

const Instance* InstanceSet::find(const std::string& id) const {
  for (const auto& inst : instances)
    if (inst.id == id) return &inst;
  return nullptr;
}

bool InstanceFeatures::covers(const InstanceSet& set) const {
  return std::all_of(set.instances.begin(), set.instances.end(),
                     [&](const Instance& inst) { return rows.count(inst.id) > 0; });
}

InstanceSet parse_instances(const std::string& text) {
  InstanceSet out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tok(line);
    std::string id, status, extra;
    if (!(tok >> id)) continue;
    Instance inst{id, ExpectedStatus::unknown};
    if (tok >> status) {
      if (status == "SAT") inst.expected = ExpectedStatus::sat;
      else if (status == "UNSAT") inst.expected = ExpectedStatus::unsat;
      else if (status == "UNKNOWN") inst.expected = ExpectedStatus::unknown;
      else throw ScenarioError("line " + std::to_string(line_no) + ": bad status token '" + status + "'");
      if (tok >> extra) throw ScenarioError("line " + std::to_string(line_no) + ": unexpected text '" + extra + "'");
    }
    if (!seen.insert(id).second)
      throw ScenarioError("line " + std::to_string(line_no) + ": duplicate instance '" + id + "'");
    out.instances.push_back(std::move(inst));
  }
  if (out.instances.empty()) throw ScenarioError("instance list is empty");
  return out;
}

InstanceSet load_instances(const std::string& path) { return parse_instances(read_file(path)); }

InstanceFeatures parse_features(const std::string& text, const InstanceSet& train) {
  InstanceFeatures out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ScenarioError("feature file is empty");
  auto header = split(trim(line), ',');
  if (header.size() < 2) throw ScenarioError("feature header needs an instance column and at least one feature");
  for (std::size_t i = 1; i < header.size(); ++i) out.feature_names.push_back(trim(header[i]));
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ScenarioError("feature line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                          " cells, expected " + std::to_string(header.size()));
    std::string id = trim(cells[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      std::string cell = trim(cells[i]);
      double v = 0;
      bool ok = false;
      try {
        std::size_t used = 0;
        v = std::stod(cell, &used);
        ok = used == cell.size() && std::isfinite(v);
      } catch (const std::exception&) {
      }
      if (!ok)
        throw ScenarioError("feature line " + std::to_string(line_no) + ": non-numeric cell '" + cell + "'");
      row.push_back(v);
    }
    if (!train.contains(id)) {
      std::cerr << "warning: feature row for '" << id << "' ignored (not a training instance)\n";
      continue;
    }
    out.rows[id] = std::move(row);
  }
  return out;
}

InstanceFeatures load_features(const std::string& path, const InstanceSet& train) {
  return parse_features(read_file(path), train);
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  static const std::set<std::string> known = {
      "algo",  "paramfile",     "instance_file", "test_instance_file", "cutoff_time", "feature_file", "memory_limit_mb",
      "wallclock_limit", "cores", "par_k",       "deterministic",      "test_sample", "seed",         "execdir",
      "instance_info"};
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError("line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!known.count(key)) throw ScenarioError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!kv.emplace(key, value).second)
      throw ScenarioError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  for (const char* key : {"algo", "paramfile", "instance_file", "test_instance_file", "cutoff_time"})
    if (!kv.count(key)) throw ScenarioError(std::string("missing mandatory key '") + key + "'");

  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (fs::path(base_dir) / p).string(); };

  Scenario s;
  s.target_command = kv["algo"];
  try {
    s.space = load_pcs(resolve(kv["paramfile"]));
  } catch (const SpaceError& e) {
    throw ScenarioError(std::string("paramfile: ") + e.what());
  }
  s.train = load_instances(resolve(kv["instance_file"]));
  s.test = load_instances(resolve(kv["test_instance_file"]));
  s.cutoff_seconds = parse_real("cutoff_time", kv["cutoff_time"]);
  if (!(s.cutoff_seconds > 0)) throw ScenarioError("cutoff_time must be positive");
  s.execdir = kv.count("execdir") ? resolve(kv["execdir"]) : base_dir;
  if (kv.count("instance_info")) s.instance_info = kv["instance_info"];
  if (kv.count("memory_limit_mb")) s.memory_limit_mb = static_cast<int>(parse_int("memory_limit_mb", kv["memory_limit_mb"]));
  if (kv.count("wallclock_limit")) s.wallclock_budget_seconds = parse_real("wallclock_limit", kv["wallclock_limit"]);
  s.cores = kv.count("cores") ? static_cast<int>(parse_int("cores", kv["cores"])) : 4;
  if (kv.count("par_k")) s.par_k = static_cast<int>(parse_int("par_k", kv["par_k"]));
  if (kv.count("deterministic")) s.deterministic_target = parse_bool("deterministic", kv["deterministic"]);
  if (kv.count("seed")) s.seed = static_cast<std::uint64_t>(parse_int("seed", kv["seed"]));
  if (s.memory_limit_mb <= 0) throw ScenarioError("memory_limit_mb must be positive");
  if (!(s.wallclock_budget_seconds > 0)) throw ScenarioError("wallclock_limit must be positive");
  if (s.cores < 1) throw ScenarioError("cores must be at least 1");
  if (s.par_k < 1) throw ScenarioError("par_k must be at least 1");

  for (const auto& inst : s.test.instances)
    if (s.train.contains(inst.id)) throw ScenarioError("instance '" + inst.id + "' is in both train and test sets");

  if (kv.count("test_sample")) {
    auto n = parse_int("test_sample", kv["test_sample"]);
    if (n <= 0) throw ScenarioError("test_sample must be positive");
    if (static_cast<std::size_t>(n) < s.test.size()) {
      std::mt19937_64 rng(s.seed);
      auto& v = s.test.instances;
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
        std::swap(v[i], v[pick(rng)]);
      }
      v.resize(static_cast<std::size_t>(n));
    }
  }

  if (kv.count("feature_file")) s.features = load_features(resolve(kv["feature_file"]), s.train);
  return s;
}

Scenario load_scenario(const std::string& path) {
  auto base = fs::path(path).parent_path();
  return parse_scenario(read_file(path), base.empty() ? "." : base.string());
}

}  // namespace aconf
