#include "aconf/gga.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

namespace aconf {

std::size_t intensification_schedule(const GgaParams& p, std::size_t n_target, std::size_t g) {
  if (g == 0) throw Error("generations are numbered from 1");
  if (p.n_start > n_target) throw Error("N_start exceeds N_target");
  const double frac = p.g_target <= 1 ? 1.0
                                      : std::min(1.0, static_cast<double>(g - 1) / static_cast<double>(p.g_target - 1));
  const double n = static_cast<double>(p.n_start) + static_cast<double>(n_target - p.n_start) * frac;
  return static_cast<std::size_t>(std::llround(n));
}

void check_gga_space(const ParameterSpace& space) {
  if (space.condition_depth() > 2)
    throw UnsupportedSpace("GGA cannot handle conditional chains deeper than two levels");
  for (const auto& c : space.conditions())
    if (space.param(c.parent).is_numeric())
      throw UnsupportedSpace("GGA cannot handle conditions on numeric parent '" + c.parent + "'");
}

std::vector<Gender> assign_genders(std::size_t n, std::mt19937_64& rng) {
  std::vector<Gender> g(n, Gender::noncompetitive);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) g[i] = Gender::competitive;
  std::shuffle(g.begin(), g.end(), rng);
  return g;
}

namespace {

double draw_between(const ParameterSpec& p, double a, double b, std::mt19937_64& rng) {
  if (a > b) std::swap(a, b);
  if (a == b) return a;
  if (p.kind == ParamKind::integer) {
    if (p.log_scale && a > 0) {
      std::uniform_real_distribution<double> d(std::log(a), std::log(b));
      return std::clamp(std::round(std::exp(d(rng))), a, b);
    }
    std::uniform_int_distribution<long long> d(static_cast<long long>(a), static_cast<long long>(b));
    return static_cast<double>(d(rng));
  }
  if (p.log_scale && a > 0) {
    std::uniform_real_distribution<double> d(std::log(a), std::log(b));
    return std::clamp(std::exp(d(rng)), a, b);
  }
  std::uniform_real_distribution<double> d(a, b);
  return std::clamp(d(rng), a, b);
}

/// Parameter indices taking part in some forbidden clause the values match.
std::vector<std::size_t> offending(const ParameterSpace& space, const std::vector<double>& values) {
  std::vector<std::size_t> out;
  for (const auto& clause : space.forbidden()) {
    bool match = true;
    for (const auto& [name, v] : clause.assignments) {
      const double x = values[space.index_of(name)];
      if (is_inactive(x) || x != v) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    for (const auto& [name, v] : clause.assignments) out.push_back(space.index_of(name));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Configuration recombine(const ParameterSpace& space, const Configuration& pc, const Configuration& pn,
                        std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  std::vector<double> values(space.size(), kInactive);
  for (std::size_t i : space.topological_order()) {
    const auto& p = space.parameters()[i];
    const double a = pc[i], b = pn[i];
    if (is_inactive(a) || is_inactive(b)) values[i] = is_inactive(a) ? b : a;
    else if (p.kind == ParamKind::categorical) values[i] = coin(rng) ? a : b;
    else values[i] = draw_between(p, a, b, rng);
  }
  Configuration child = space.canonicalize(values);
  for (int attempt = 0; attempt < 100 && space.is_forbidden(child); ++attempt) {
    auto v = child.values();
    for (std::size_t i : offending(space, v)) v[i] = space.sample_value(i, rng);
    child = space.canonicalize(std::move(v));
  }
  return space.is_forbidden(child) ? pc : child;
}

Configuration mutate(const ParameterSpace& space, const Configuration& config, double rate, std::mt19937_64& rng) {
  std::bernoulli_distribution flip(rate);
  auto values = config.values();
  bool changed = false;
  for (std::size_t i : space.topological_order()) {
    if (!space.is_active(values, i)) continue;
    if (flip(rng)) {
      values[i] = space.sample_value(i, rng);
      changed = true;
    }
  }
  if (!changed) return config;
  Configuration out = space.canonicalize(std::move(values));
  return space.is_forbidden(out) ? config : out;
}

namespace {

bool prefer(const RunContext& ctx, ConfigId a, double ta, ConfigId b, double tb) {
  if (ta != tb) return ta < tb;
  const auto& h = ctx.history();
  return ctx.space().to_string(h.config(a)) < ctx.space().to_string(h.config(b));
}

RaceResult sequential_race(RunContext& ctx, const std::vector<ConfigId>& candidates, std::size_t prefix) {
  RaceResult best;
  bool have = false;
  for (ConfigId c : candidates) {
    const auto r = have ? ctx.evaluate_prefix(c, prefix, best.total) : ctx.evaluate_prefix(c, prefix);
    if (r.provably_worse) continue;
    if (!have || prefer(ctx, c, r.total, best.winner, best.total)) {
      best = {c, r.total};
      have = true;
    }
  }
  return best;
}

struct Lane {
  ConfigId id;
  std::size_t pos = 0;
  double spent = 0.0;
  double cutoff = 0.0;
  std::optional<std::uint64_t> ticket;
  bool finished = false;
};

RaceResult parallel_race(RunContext& ctx, const std::vector<ConfigId>& candidates, std::size_t prefix,
                         std::size_t units) {
  const auto& h = ctx.history();
  const auto& metric = ctx.metric();
  RunPool pool(ctx.target(), ctx.space(), static_cast<int>(units));
  std::vector<Lane> lanes;
  std::map<std::uint64_t, std::size_t> by_ticket;
  std::size_t next = 0;
  RaceResult best;
  bool have = false;

  auto allowance = [&](const Lane& l) {
    return have ? std::min(metric.cutoff, std::max(kMinCutoff, best.total - l.spent)) : metric.cutoff;
  };

  // Moves a lane forward over reusable ledger entries and submits its next
  // run; returns false when the lane is finished or eliminated.
  auto advance = [&](std::size_t li) -> bool {
    Lane& l = lanes[li];
    for (;;) {
      if (have && l.spent > best.total) return false;
      if (l.pos == prefix) {
        l.finished = true;
        if (!have || prefer(ctx, l.id, l.spent, best.winner, best.total)) {
          best = {l.id, l.spent};
          have = true;
          for (auto& other : lanes) {
            if (!other.ticket) continue;
            if (other.spent >= best.total) {
              pool.cancel(*other.ticket);
            } else {
              other.cutoff = std::min(other.cutoff, std::max(kMinCutoff, best.total - other.spent));
              pool.shrink_cutoff(*other.ticket, other.cutoff);
            }
          }
        }
        return false;
      }
      const double cutoff = allowance(l);
      const RunRecord* slot = h.slot(l.id, l.pos);
      if (slot != nullptr && !is_lower_bound(slot->outcome)) {
        l.spent += penalized_cost(slot->outcome, metric);
        ++l.pos;
        continue;
      }
      if (slot != nullptr && slot->cutoff >= cutoff) return false;
      ctx.check_budget();
      l.cutoff = cutoff;
      l.ticket = pool.submit(ctx.make_spec(l.id, l.pos, cutoff));
      by_ticket[*l.ticket] = li;
      return true;
    }
  };

  std::size_t running = 0;
  auto fill = [&] {
    while (running < units && next < candidates.size()) {
      Lane lane;
      lane.id = candidates[next++];
      lanes.push_back(lane);
      if (advance(lanes.size() - 1)) ++running;
    }
  };

  try {
    fill();
    while (running > 0) {
      auto done = pool.wait_next();
      const std::size_t li = by_ticket.at(done.ticket);
      by_ticket.erase(done.ticket);
      Lane& l = lanes[li];
      l.ticket.reset();
      --running;
      const bool lower = is_lower_bound(done.outcome);
      ctx.record(l.id, l.pos, lower ? std::min(l.cutoff, done.outcome.runtime) : l.cutoff, done.outcome);
      if (!lower) {
        l.spent += penalized_cost(done.outcome, metric);
        ++l.pos;
        if (advance(li)) ++running;
      }
      fill();
    }
  } catch (...) {
    for (auto& l : lanes)
      if (l.ticket) pool.cancel(*l.ticket);
    while (pool.outstanding() > 0) {
      auto done = pool.wait_next();
      auto it = by_ticket.find(done.ticket);
      if (it != by_ticket.end()) {
        const Lane& l = lanes[it->second];
        ctx.record(l.id, l.pos, std::min(l.cutoff, done.outcome.runtime), done.outcome);
      }
    }
    throw;
  }
  if (!have) throw Error("race finished without a winner");
  return best;
}

}  // namespace

RaceResult race(RunContext& ctx, const std::vector<ConfigId>& candidates, std::size_t prefix, std::size_t units) {
  if (candidates.empty()) throw Error("race needs at least one candidate");
  prefix = std::min(prefix, ctx.history().max_positions());
  if (prefix == 0) throw Error("race over an empty prefix");
  if (units <= 1 || ctx.target().in_process() || candidates.size() == 1)
    return sequential_race(ctx, candidates, prefix);
  return parallel_race(ctx, candidates, prefix, units);
}

ConfiguratorResult run_gga(const Scenario& scenario, const Target& target, Budget budget, std::uint64_t seed,
                           GgaParams params) {
  check_gga_space(scenario.space);
  if (params.units == 0 || params.population < 2 || params.g_max == 0 || params.g_target == 0)
    throw Error("invalid GGA parameters");
  if (params.g_target > params.g_max) throw Error("G_target exceeds G_max");
  const ParameterSpace& space = scenario.space;
  const CostMetric metric = scenario_metric(scenario);
  ConfiguratorResult result;
  result.history = make_history(scenario, seed);
  RunHistory& h = *result.history;
  const std::size_t n_train = h.instances().size();
  const std::size_t n_target = std::min(params.n_target.value_or(n_train), h.max_positions());
  if (params.n_start > n_target) params.n_start = n_target;
  RunContext ctx(target, space, h, metric, scenario.memory_limit_mb, budget);
  std::mt19937_64 rng(seed);

  std::vector<Genome> pop;
  const auto genders = assign_genders(params.population, rng);
  pop.push_back({space.default_configuration(), genders[0], 0});
  for (std::size_t i = 1; i < params.population; ++i) pop.push_back({space.sample_uniform(rng), genders[i], 0});

  const ConfigId def = h.intern(space.default_configuration());
  std::vector<ConfigId> last_winners{def};
  std::optional<ConfigId> incumbent;
  std::bernoulli_distribution coin(0.5);

  try {
    for (std::size_t g = 1; g <= params.g_max; ++g) {
      ctx.check_budget();
      const std::size_t n = intensification_schedule(params, n_target, g);
      std::vector<ConfigId> competitors;
      std::vector<const Genome*> partners;
      for (const auto& genome : pop) {
        if (genome.gender == Gender::competitive) competitors.push_back(h.intern(genome.config));
        else partners.push_back(&genome);
      }
      std::sort(competitors.begin(), competitors.end());
      competitors.erase(std::unique(competitors.begin(), competitors.end()), competitors.end());
      std::shuffle(competitors.begin(), competitors.end(), rng);

      std::vector<ConfigId> winners;
      RaceResult gen_best;
      for (std::size_t start = 0; start < competitors.size(); start += params.units) {
        const std::vector<ConfigId> group(competitors.begin() + static_cast<std::ptrdiff_t>(start),
                                          competitors.begin() +
                                              static_cast<std::ptrdiff_t>(std::min(start + params.units, competitors.size())));
        const RaceResult r = race(ctx, group, n, params.units);
        if (winners.empty() || prefer(ctx, r.winner, r.total, gen_best.winner, gen_best.total)) gen_best = r;
        winners.push_back(r.winner);
      }
      if (winners.empty()) {
        // No competitive genome left: promote a noncompetitive one.
        pop.front().gender = Gender::competitive;
        continue;
      }
      last_winners = winners;
      if (!incumbent || *incumbent != gen_best.winner) {
        incumbent = gen_best.winner;
        result.trajectory.push_back(trajectory_point(ctx, gen_best.winner));
      }

      std::vector<Genome> offspring;
      const std::size_t n_off =
          std::max(winners.size(), (params.population + 3) / 4);
      auto breed = [&](std::size_t j) {
        const Configuration& parent = h.config(winners[j % winners.size()]);
        const Configuration* mate = &parent;
        if (!partners.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, partners.size() - 1);
          mate = &partners[pick(rng)]->config;
        }
        Configuration child = mutate(space, recombine(space, parent, *mate, rng), params.mutation_rate, rng);
        return Genome{std::move(child), coin(rng) ? Gender::competitive : Gender::noncompetitive, 0};
      };
      for (std::size_t j = 0; j < n_off; ++j) offspring.push_back(breed(j));

      for (auto& genome : pop) ++genome.age;
      std::erase_if(pop, [&](const Genome& x) { return x.age > params.max_age; });
      while (pop.size() + offspring.size() > params.population && !pop.empty()) {
        auto oldest = std::max_element(pop.begin(), pop.end(),
                                       [](const Genome& a, const Genome& b) { return a.age < b.age; });
        pop.erase(oldest);
      }
      for (auto& child : offspring) pop.push_back(std::move(child));
      for (std::size_t j = n_off; pop.size() < params.population; ++j) pop.push_back(breed(j));
    }
  } catch (const BudgetExhausted&) {
  }

  if (!incumbent) {
    std::cerr << "warning: budget exhausted before the first generation completed\n";
    result.incumbent = space.default_configuration();
    result.runs_used = ctx.runs_used();
    result.time_used = ctx.elapsed();
    result.budget_exhausted_early = true;
    return result;
  }

  // Final selection on the full training prefix, outside the configuration budget.
  RunContext final_ctx(target, space, h, metric, scenario.memory_limit_mb, Budget{});
  std::vector<ConfigId> finalists = last_winners;
  if (std::find(finalists.begin(), finalists.end(), *incumbent) == finalists.end())
    finalists.push_back(*incumbent);
  const RaceResult fin = race(final_ctx, finalists, n_train, params.units);
  if (*incumbent != fin.winner) result.trajectory.push_back(trajectory_point(ctx, fin.winner));
  result.incumbent = h.config(fin.winner);
  result.runs_used = ctx.runs_used() + final_ctx.runs_used();
  result.time_used = ctx.elapsed();
  return result;
}

}  // namespace aconf
