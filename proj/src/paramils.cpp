#include "aconf/paramils.hpp"

#include <algorithm>
#include <iostream>

namespace aconf {

bool dominates(const RunHistory& history, ConfigId a, ConfigId b, const CostMetric& metric) {
  const std::size_t na = history.num_runs(a), nb = history.num_runs(b);
  if (na < nb) return false;
  return history.prefix_cost(a, nb, metric) <= history.prefix_cost(b, nb, metric);
}

IteratedLocalSearch::IteratedLocalSearch(RunContext& ctx, IlsParams params, std::uint64_t seed)
    : ctx_(ctx), params_(params) {
  if (params_.perturbation_strength == 0) throw Error("perturbation strength must be positive");
  if (params_.n_basic == 0) throw Error("BasicILS needs N >= 1");
  state_.rng.seed(seed);
}

void IteratedLocalSearch::ensure_run(ConfigId id, std::size_t position, double cutoff) {
  const RunRecord* slot = ctx_.history().slot(id, position);
  if (slot != nullptr && (!is_lower_bound(slot->outcome) || slot->cutoff >= cutoff)) return;
  ctx_.run(id, position, cutoff);
}

void IteratedLocalSearch::make_exact(ConfigId id) {
  const std::size_t n = ctx_.history().num_runs(id);
  for (std::size_t p = 0; p < n; ++p) ensure_run(id, p, ctx_.metric().cutoff);
}

IlsComparison IteratedLocalSearch::compare_focused(ConfigId challenger, ConfigId reference) {
  auto& h = ctx_.history();
  const auto& metric = ctx_.metric();
  const double kappa = metric.cutoff;
  make_exact(challenger);
  make_exact(reference);

  ConfigId lo = challenger, hi = reference;
  if (h.num_runs(challenger) > h.num_runs(reference)) std::swap(lo, hi);
  if (h.num_runs(lo) == h.num_runs(hi) && h.num_runs(hi) < h.max_positions()) ensure_run(hi, h.num_runs(hi), kappa);

  while (h.num_runs(lo) == 0 ||
         (!dominates(h, challenger, reference, metric) && !dominates(h, reference, challenger, metric))) {
    const std::size_t i = h.num_runs(lo);
    if (i >= h.max_positions()) break;
    if (h.num_runs(hi) <= i) ensure_run(hi, i, kappa);
    double cutoff = kappa;
    if (params_.bound_multiplier != kNoCapping) {
      const double bound = params_.bound_multiplier * h.prefix_cost(hi, i + 1, metric);
      cutoff = std::min(kappa, std::max(kMinCutoff, bound - h.prefix_cost(lo, i, metric)));
    }
    ensure_run(lo, i, cutoff);
  }

  const bool fwd = dominates(h, challenger, reference, metric);
  const bool back = dominates(h, reference, challenger, metric);
  const ConfigId winner = fwd ? challenger : reference;
  for (std::size_t b = 0; b < comparisons_since_improvement_ && h.num_runs(winner) < h.max_positions(); ++b)
    ensure_run(winner, h.num_runs(winner), kappa);
  if (fwd && back) return IlsComparison::tie;
  return fwd ? IlsComparison::better : IlsComparison::worse;
}

IlsComparison IteratedLocalSearch::compare_basic(ConfigId challenger, ConfigId reference) {
  const std::size_t n = std::min(params_.n_basic, ctx_.history().max_positions());
  switch (ctx_.compare_capped(reference, challenger, n, params_.bound_multiplier)) {
    case Verdict::challenger_better:
      return IlsComparison::better;
    case Verdict::tie:
      return IlsComparison::tie;
    case Verdict::incumbent_better:
      break;
  }
  return IlsComparison::worse;
}

void IteratedLocalSearch::consider_incumbent(ConfigId candidate) {
  if (candidate == state_.incumbent) return;
  if (ctx_.history().num_runs(candidate) == 0) return;
  if (!dominates(ctx_.history(), candidate, state_.incumbent, ctx_.metric())) return;
  state_.incumbent = candidate;
  comparisons_since_improvement_ = 0;
  trajectory_.push_back(trajectory_point(ctx_, candidate));
}

IlsComparison IteratedLocalSearch::compare(ConfigId challenger, ConfigId reference) {
  if (challenger == reference) return IlsComparison::tie;
  ++comparisons_since_improvement_;
  IlsComparison c = params_.variant == IlsVariant::focused ? compare_focused(challenger, reference)
                                                           : compare_basic(challenger, reference);
  consider_incumbent(challenger);
  consider_incumbent(reference);
  return c;
}

bool IteratedLocalSearch::local_search_step() {
  auto& h = ctx_.history();
  auto nbrs = ctx_.space().neighbors(h.config(state_.current));
  std::shuffle(nbrs.begin(), nbrs.end(), state_.rng);
  for (const auto& n : nbrs) {
    const ConfigId id = h.intern(n);
    if (compare(id, state_.current) == IlsComparison::better) {
      state_.current = id;
      return true;
    }
  }
  return false;
}

void IteratedLocalSearch::local_search() {
  while (local_search_step()) {
  }
}

Configuration IteratedLocalSearch::perturb(const Configuration& from) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(state_.rng) < params_.restart_probability) return ctx_.space().sample_uniform(state_.rng);
  Configuration c = from;
  for (std::size_t s = 0; s < params_.perturbation_strength; ++s) {
    auto nbrs = ctx_.space().neighbors(c);
    if (nbrs.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
    c = nbrs[pick(state_.rng)];
  }
  return c;
}

ConfigId IteratedLocalSearch::accept(ConfigId old_optimum, ConfigId new_optimum) {
  return compare(new_optimum, old_optimum) == IlsComparison::worse ? old_optimum : new_optimum;
}

void IteratedLocalSearch::run() {
  auto& h = ctx_.history();
  const ConfigId def = h.intern(ctx_.space().default_configuration());
  state_.current = state_.incumbent = def;
  try {
    ensure_run(def, 0, ctx_.metric().cutoff);
    trajectory_.push_back(trajectory_point(ctx_, def));
    for (std::size_t r = 0; r < params_.random_initial; ++r) {
      const ConfigId c = h.intern(ctx_.space().sample_uniform(state_.rng));
      if (compare(c, state_.current) == IlsComparison::better) state_.current = c;
    }
    local_search();
    // A fully explored small space stops consuming runs; end there.
    std::size_t idle = 0;
    while (idle < 1000) {
      ctx_.check_budget();
      const std::size_t before = ctx_.runs_used();
      const ConfigId old = state_.current;
      state_.current = h.intern(perturb(h.config(old)));
      local_search();
      state_.current = accept(old, state_.current);
      idle = ctx_.runs_used() == before ? idle + 1 : 0;
    }
  } catch (const BudgetExhausted&) {
  }
}

ConfiguratorResult run_focused_ils(const Scenario& scenario, const Target& target, Budget budget, std::uint64_t seed,
                                   IlsParams params) {
  if (!scenario.space.is_discrete())
    throw UnsupportedSpace("ParamILS requires a discretized parameter space");
  ConfiguratorResult result;
  result.history = make_history(scenario, seed);
  RunContext ctx(target, scenario.space, *result.history, scenario_metric(scenario), scenario.memory_limit_mb, budget);
  IteratedLocalSearch ils(ctx, params, seed);
  ils.run();

  const ConfigId inc = ils.state().incumbent;
  result.incumbent = result.history->config(inc);
  result.trajectory = ils.trajectory();
  result.runs_used = ctx.runs_used();
  result.time_used = ctx.elapsed();
  result.budget_exhausted_early = result.history->num_runs(inc) == 0;
  if (result.budget_exhausted_early) std::cerr << "warning: budget exhausted before any complete run\n";
  return result;
}

}  // namespace aconf
