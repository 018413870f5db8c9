#include "aconf/runhistory.hpp"

#include <algorithm>
#include <random>

namespace aconf {

RunHistory::RunHistory(std::vector<std::string> instances, std::uint64_t campaign_seed, bool deterministic,
                       std::size_t max_runs_per_config)
    : instances_(std::move(instances)) {
  if (instances_.empty()) throw InsufficientData("a run history needs at least one instance");
  std::vector<std::size_t> perm(instances_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::mt19937_64 rng(campaign_seed);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  const std::size_t passes = deterministic ? 1 : std::max<std::size_t>(1, max_runs_per_config / perm.size());
  for (std::size_t pass = 0; pass < passes; ++pass)
    for (std::size_t i : perm) order_.push_back({i, deterministic ? 0 : pass});
}

ConfigId RunHistory::intern(const Configuration& config) {
  auto [it, inserted] = index_.emplace(config, configs_.size());
  if (inserted) {
    configs_.push_back(config);
    slots_.emplace_back();
  }
  return it->second;
}

std::optional<ConfigId> RunHistory::find(const Configuration& config) const {
  auto it = index_.find(config);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const RunRecord* RunHistory::slot(ConfigId id, std::size_t position) const {
  const auto& s = slots_.at(id);
  return position < s.size() ? &records_[s[position]] : nullptr;
}

void RunHistory::append(ConfigId id, std::size_t position, double cutoff, const RunOutcome& outcome) {
  auto& s = slots_.at(id);
  if (position > s.size() || position >= order_.size())
    throw Error("runs must follow the shared instance order (position " + std::to_string(position) + ", N=" +
                std::to_string(s.size()) + ")");
  records_.push_back({id, position, cutoff, outcome});
  if (position == s.size()) s.push_back(records_.size() - 1);
  else s[position] = records_.size() - 1;
}

double RunHistory::prefix_cost(ConfigId id, std::size_t prefix, const CostMetric& metric) const {
  const auto& s = slots_.at(id);
  if (prefix > s.size()) throw InsufficientData("configuration has fewer runs than the requested prefix");
  double total = 0.0;
  for (std::size_t p = 0; p < prefix; ++p) total += penalized_cost(records_[s[p]].outcome, metric);
  return total;
}

bool RunHistory::prefix_exact(ConfigId id, std::size_t prefix) const {
  const auto& s = slots_.at(id);
  if (prefix > s.size()) return false;
  for (std::size_t p = 0; p < prefix; ++p)
    if (is_lower_bound(records_[s[p]].outcome)) return false;
  return true;
}

void RunHistory::write_csv(std::ostream& out) const {
  out << "config_id,instance,seed,status,runtime,capped\n";
  for (const auto& r : records_) {
    out << r.config << ',' << instance_at(r.position) << ',' << order_[r.position].seed << ','
        << to_string(r.outcome.status) << ',' << format_number(r.outcome.runtime) << ','
        << (r.outcome.capped ? 1 : 0) << '\n';
  }
}

void RunHistory::write_configs_csv(std::ostream& out, const ParameterSpace& space) const {
  out << "config_id,configuration\n";
  for (std::size_t i = 0; i < configs_.size(); ++i) out << i << ",\"" << space.to_string(configs_[i]) << "\"\n";
}

AggregateScore cost_estimate(const RunHistory& history, ConfigId id, std::size_t prefix_len, const CostMetric& metric) {
  if (prefix_len == 0) throw InsufficientData("cost estimate over an empty prefix");
  if (history.num_runs(id) < prefix_len) throw InsufficientData("configuration has fewer runs than the prefix");
  std::vector<RunOutcome> outcomes;
  outcomes.reserve(prefix_len);
  for (std::size_t p = 0; p < prefix_len; ++p) outcomes.push_back(history.slot(id, p)->outcome);
  return aggregate(outcomes, metric);
}

CapBound compute_cap(const RunHistory& history, ConfigId incumbent, ConfigId challenger, std::size_t prefix_len,
                     double bound_multiplier, const CostMetric& metric) {
  const double inc_total = history.prefix_cost(incumbent, prefix_len, metric);
  const double spent = history.prefix_cost(challenger, std::min(prefix_len, history.num_runs(challenger)), metric);
  if (bound_multiplier == kNoCapping) return {metric.cutoff, kNoCapping, false};
  const double threshold = bound_multiplier * inc_total;
  const double cutoff = std::min(metric.cutoff, std::max(kMinCutoff, threshold - spent));
  return {cutoff, threshold, spent > threshold};
}

// ---------------------------------------------------------------------------
// RunContext

RunContext::RunContext(const Target& target, const ParameterSpace& space, RunHistory& history, CostMetric metric,
                       int memory_limit_mb, Budget budget)
    : target_(target),
      space_(space),
      history_(history),
      metric_(metric),
      memory_limit_mb_(memory_limit_mb),
      budget_(budget),
      start_(std::chrono::steady_clock::now()) {}

double RunContext::elapsed() const {
  if (target_.in_process()) return virtual_seconds_;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool RunContext::exhausted() const {
  if (budget_.max_runs && runs_used_ >= *budget_.max_runs) return true;
  if (budget_.max_seconds && elapsed() >= *budget_.max_seconds) return true;
  return false;
}

void RunContext::check_budget() const {
  if (exhausted()) throw BudgetExhausted();
}

RunSpec RunContext::make_spec(ConfigId id, std::size_t position, double cutoff) const {
  const auto& slot = history_.order().at(position);
  return RunSpec{history_.config(id), history_.instances()[slot.instance], slot.seed, cutoff, memory_limit_mb_};
}

const RunRecord& RunContext::run(ConfigId id, std::size_t position, double cutoff) {
  check_budget();
  RunOutcome outcome = target_.run(space_, make_spec(id, position, cutoff), nullptr);
  return record(id, position, cutoff, outcome);
}

const RunRecord& RunContext::record(ConfigId id, std::size_t position, double cutoff, const RunOutcome& outcome) {
  history_.append(id, position, cutoff, outcome);
  ++runs_used_;
  if (target_.in_process()) virtual_seconds_ += outcome.runtime;
  return history_.records().back();
}

RunContext::PrefixResult RunContext::evaluate_prefix(ConfigId id, std::size_t prefix, double bound) {
  prefix = std::min(prefix, history_.max_positions());
  const bool capping = bound != kNoCapping;
  PrefixResult r;
  for (std::size_t pos = 0; pos < prefix; ++pos) {
    if (capping && r.total > bound) {
      r.provably_worse = true;
      return r;
    }
    const double cutoff = capping ? std::min(metric_.cutoff, std::max(kMinCutoff, bound - r.total)) : metric_.cutoff;
    const RunRecord* slot = history_.slot(id, pos);
    if (slot != nullptr && !is_lower_bound(slot->outcome)) {
      r.total += penalized_cost(slot->outcome, metric_);
      r.covered = pos + 1;
      continue;
    }
    if (slot != nullptr && slot->cutoff >= cutoff) {
      // The stored lower bound already exceeds what this comparison allows.
      r.total += slot->outcome.runtime;
      r.covered = pos + 1;
      r.provably_worse = true;
      return r;
    }
    const RunRecord& rec = run(id, pos, cutoff);
    r.covered = pos + 1;
    if (is_lower_bound(rec.outcome)) {
      r.total += rec.outcome.runtime;
      r.provably_worse = true;
      return r;
    }
    r.total += penalized_cost(rec.outcome, metric_);
  }
  if (capping && r.total > bound) r.provably_worse = true;
  return r;
}

Verdict RunContext::compare_capped(ConfigId incumbent, ConfigId challenger, std::size_t prefix,
                                   double bound_multiplier) {
  prefix = std::min(prefix, history_.max_positions());
  const double inc_total = evaluate_prefix(incumbent, prefix).total;
  const double bound = bound_multiplier == kNoCapping ? kNoCapping : bound_multiplier * inc_total;
  const PrefixResult chal = evaluate_prefix(challenger, prefix, bound);
  if (chal.provably_worse) return Verdict::incumbent_better;
  if (chal.total < inc_total) return Verdict::challenger_better;
  if (chal.total > inc_total) return Verdict::incumbent_better;
  return Verdict::tie;
}

CostMetric scenario_metric(const Scenario& scenario) { return {scenario.par_k, scenario.cutoff_seconds}; }

std::shared_ptr<RunHistory> make_history(const Scenario& scenario, std::uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(scenario.train.size());
  for (const auto& inst : scenario.train.instances) ids.push_back(inst.id);
  return std::make_shared<RunHistory>(std::move(ids), seed, scenario.deterministic_target);
}

TrajectoryPoint trajectory_point(const RunContext& ctx, ConfigId incumbent) {
  const auto& h = ctx.history();
  const std::size_t n = h.num_runs(incumbent);
  const double cost = n ? h.prefix_cost(incumbent, n, ctx.metric()) / static_cast<double>(n) : 0.0;
  return {ctx.elapsed(), ctx.runs_used(), incumbent, ctx.space().to_string(h.config(incumbent)), cost};
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryPoint>& trajectory) {
  out << "wallclock_s,ledger_runs,incumbent_id,train_cost\n";
  for (const auto& t : trajectory)
    out << format_number(t.time) << ',' << t.ledger_runs << ',' << t.incumbent << ',' << format_number(t.train_cost)
        << '\n';
}

}  // namespace aconf
