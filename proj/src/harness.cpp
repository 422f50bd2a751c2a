#include "knnod/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "knnod/convergence.hpp"
#include "knnod/dynamics.hpp"
#include "knnod/random.hpp"

namespace knnod {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string at_index(const char* field, std::size_t i) { return std::string(field) + "[" + std::to_string(i) + "]"; }

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

template <OpinionScalar S>
S draw_opinion(const OpinionSpec<S>& spec, Rng& rng) {
  return std::visit(overloaded{[](const S& v) { return v; },
                               [&rng](const UniformOpinion& u) { return ScalarTraits<S>::from_double(rng.uniform(u.lo, u.hi)); }},
                    spec);
}

/// Ids present and the running configuration of one simulation.
template <OpinionScalar S>
struct Population {
  std::vector<AgentId> ids;
  Configuration<S> config;
  std::size_t next_id = 1;

  std::size_t position_of(AgentId id) const {
    const auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) throw ScenarioError("events", "agent " + std::to_string(id.value) + " not present");
    return static_cast<std::size_t>(it - ids.begin());
  }

  void add(S opinion) {
    ids.push_back(AgentId{next_id++});
    config = config.appended(std::move(opinion));
  }

  void remove(AgentId id) {
    const std::size_t pos = position_of(id);
    ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(pos));
    config = config.without(AgentId::from_index(pos));
  }
};

/// Classification of the current state; the probe is the model's update.
template <OpinionScalar S>
EquilibriumReport classify_state(const Model<S>& model, const Configuration<S>& x, double tolerance) {
  if constexpr (ScalarTraits<S>::exact) {
    return std::visit(overloaded{[&](const KnnModel& m) { return classify(x, m.k); },
                                 [&](const AbcModel<S>& m) {
                                   EquilibriumReport r;
                                   r.is_equilibrium = is_abc_equilibrium(x, m.d);
                                   r.is_clustered = r.is_equilibrium;
                                   r.is_consensus = r.is_equilibrium && is_consensus(x);
                                   return r;
                                 }},
                      model);
  } else {
    return std::visit(overloaded{[&](const KnnModel& m) { return classify_numerical(x, m.k, tolerance); },
                                 [&](const AbcModel<S>& m) {
                                   return classify_numerical_with(
                                       x, 1, tolerance, [&](AgentId i) { return abc_updated_opinion(x, i, m.d); });
                                 }},
                      model);
  }
}

template <OpinionScalar S>
std::vector<std::size_t> final_cluster_sizes(const Configuration<S>& x, double tolerance) {
  if constexpr (ScalarTraits<S>::exact) {
    return partition_clusters(x).sizes();
  } else {
    return quantize_clusters(x, tolerance).sizes();
  }
}

LimitClass limit_of(const EquilibriumReport& r) {
  if (r.is_consensus) return LimitClass::consensus;
  if (r.is_clustered) return LimitClass::clustered;
  if (r.is_equilibrium) return LimitClass::non_clustered;
  return LimitClass::not_converged;
}

}  // namespace

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::converged: return "converged";
    case StopReason::equilibrium_detected: return "equilibrium_detected";
    case StopReason::max_steps: return "max_steps";
    case StopReason::schedule_exhausted: return "schedule_exhausted";
  }
  return "unknown";
}

std::string_view to_string(LimitClass limit) {
  switch (limit) {
    case LimitClass::consensus: return "consensus";
    case LimitClass::clustered: return "clustered";
    case LimitClass::non_clustered: return "non_clustered";
    case LimitClass::not_converged: return "not_converged";
  }
  return "unknown";
}

template <OpinionScalar S>
void validate(const ScenarioSpec<S>& spec) {
  std::size_t n = 0;
  std::visit(overloaded{[&](const UniformInitial& u) {
                          if (u.n < 1) throw ScenarioError("initial.n", "must be >= 1");
                          if (!(u.lo <= u.hi)) throw ScenarioError("initial.lo", "lo must not exceed hi");
                          n = u.n;
                        },
                        [&](const ExplicitInitial<S>& e) {
                          if (e.opinions.empty()) throw ScenarioError("initial.opinions", "must not be empty");
                          n = e.opinions.size();
                        },
                        [&](const ClustersInitial<S>& c) {
                          if (c.clusters.empty()) throw ScenarioError("initial.clusters", "must not be empty");
                          for (std::size_t g = 0; g < c.clusters.size(); ++g) {
                            if (c.clusters[g].count < 1) throw ScenarioError(at_index("initial.clusters", g) + ".count", "must be >= 1");
                            n += c.clusters[g].count;
                          }
                        }},
             spec.initial);

  if (!(spec.tolerance > 0)) throw ScenarioError("tolerance", "must be > 0");

  const auto check_k = [&](std::size_t population, const std::string& when) {
    if (const auto* knn = std::get_if<KnnModel>(&spec.model)) {
      if (knn->k < 1 || knn->k > population) {
        throw ScenarioError("model.k", "k=" + std::to_string(knn->k) + " must satisfy 1 <= k <= n=" +
                                           std::to_string(population) + when);
      }
    }
  };
  if (const auto* abc = std::get_if<AbcModel<S>>(&spec.model); abc != nullptr && abc->d < S(0)) {
    throw ScenarioError("model.d", "must be >= 0");
  }
  if (std::holds_alternative<ShrinkCycleSchedule>(spec.schedule) && !std::holds_alternative<KnnModel>(spec.model)) {
    throw ScenarioError("schedule.type", "shrink schedule requires a k-NN model");
  }
  check_k(n, "");

  // Replay the events symbolically to check ids and population sizes.
  std::vector<AgentId> present;
  for (std::size_t i = 0; i < n; ++i) present.push_back(AgentId::from_index(i));
  std::size_t next_id = n + 1;
  std::vector<std::pair<std::size_t, std::vector<AgentId>>> population_from;  // (step, ids from that step on)
  population_from.emplace_back(0, present);
  for (std::size_t e = 0; e < spec.events.size(); ++e) {
    const std::size_t step = event_step(spec.events[e]);
    if (e > 0 && step <= event_step(spec.events[e - 1])) {
      throw ScenarioError(at_index("events", e) + ".step", "event steps must be strictly increasing");
    }
    std::visit(overloaded{[&](const AddAgent<S>& add) {
                            if (const auto* u = std::get_if<UniformOpinion>(&add.opinion); u && !(u->lo <= u->hi)) {
                              throw ScenarioError(at_index("events", e) + ".opinion", "lo must not exceed hi");
                            }
                            present.push_back(AgentId{next_id++});
                          },
                          [&](const RemoveAgent& rm) {
                            const auto it = std::find(present.begin(), present.end(), rm.agent);
                            if (it == present.end()) {
                              throw ScenarioError(at_index("events", e) + ".agent",
                                                  "agent " + std::to_string(rm.agent.value) + " not present at step " +
                                                      std::to_string(step));
                            }
                            present.erase(it);
                          }},
               spec.events[e]);
    if (present.empty()) throw ScenarioError(at_index("events", e), "population would become empty");
    check_k(present.size(), " after event " + std::to_string(e));
    if (population_from.back().first == step) {
      population_from.back().second = present;
    } else {
      population_from.emplace_back(step, present);
    }
  }

  if (const auto* explicit_schedule = std::get_if<ExplicitSchedule>(&spec.schedule)) {
    std::size_t phase = 0;
    for (std::size_t t = 0; t < explicit_schedule->agents.size(); ++t) {
      while (phase + 1 < population_from.size() && population_from[phase + 1].first <= t) ++phase;
      const auto& ids = population_from[phase].second;
      if (std::find(ids.begin(), ids.end(), explicit_schedule->agents[t]) == ids.end()) {
        throw ScenarioError(at_index("schedule.agents", t),
                            "agent " + std::to_string(explicit_schedule->agents[t].value) + " not present at step " +
                                std::to_string(t));
      }
    }
  }
}

template <OpinionScalar S>
Configuration<S> initial_configuration(const ScenarioSpec<S>& spec) {
  return std::visit(overloaded{[](const UniformInitial& u) {
                                 Rng rng(u.seed);
                                 std::vector<S> values;
                                 values.reserve(u.n);
                                 for (std::size_t i = 0; i < u.n; ++i) values.push_back(ScalarTraits<S>::from_double(rng.uniform(u.lo, u.hi)));
                                 return Configuration<S>(std::move(values));
                               },
                               [](const ExplicitInitial<S>& e) { return Configuration<S>(e.opinions); },
                               [](const ClustersInitial<S>& c) {
                                 std::vector<S> values;
                                 for (const auto& block : c.clusters) values.insert(values.end(), block.count, block.opinion);
                                 return Configuration<S>(std::move(values));
                               }},
                    spec.initial);
}

template <OpinionScalar S>
SimulationResult<S> simulate(const ScenarioSpec<S>& spec, const StepObserver<S>& observer) {
  validate(spec);

  Population<S> pop;
  pop.config = initial_configuration(spec);
  for (std::size_t i = 0; i < pop.config.size(); ++i) pop.ids.push_back(AgentId::from_index(i));
  pop.next_id = pop.config.size() + 1;

  Rng event_rng(spec.event_seed);
  std::optional<Rng> schedule_rng;
  if (const auto* u = std::get_if<UniformRandomSchedule>(&spec.schedule)) schedule_rng.emplace(u->seed);
  const std::optional<ShrinkSchedule> shrink =
      std::holds_alternative<ShrinkCycleSchedule>(spec.schedule)
          ? std::optional<ShrinkSchedule>(ShrinkSchedule::for_k(std::get<KnnModel>(spec.model).k))
          : std::nullopt;

  const S tolerance = ScalarTraits<S>::from_double(spec.tolerance);
  SimulationResult<S> result;
  auto& record = result.trajectory;
  const auto snapshot = [&](std::size_t t) {
    if (!record.snapshots.empty() && record.snapshots.back().step == t) record.snapshots.pop_back();
    record.snapshots.push_back({t, pop.ids, std::vector<S>(pop.config.opinions().begin(), pop.config.opinions().end())});
  };

  std::size_t next_event = 0;
  std::size_t last_check = 0;
  bool checked_once = false;
  if (observer) observer({0, pop.ids, pop.config, std::nullopt, false});

  std::size_t t = 0;
  for (;; ++t) {
    bool fired = false;
    while (next_event < spec.events.size() && event_step(spec.events[next_event]) == t) {
      std::visit(overloaded{[&](const AddAgent<S>& add) { pop.add(draw_opinion(add.opinion, event_rng)); },
                            [&](const RemoveAgent& rm) { pop.remove(rm.agent); }},
                 spec.events[next_event]);
      ++next_event;
      fired = true;
    }
    if (fired && observer) observer({t, pop.ids, pop.config, std::nullopt, true});

    const std::size_t n = pop.config.size();
    record.diameters.push_back(diameter(pop.config));
    if (!result.hitting_time && record.diameters.back() < tolerance) result.hitting_time = t;
    if (t == 0 || fired || (spec.record_every > 0 && t % spec.record_every == 0)) snapshot(t);

    const std::size_t interval = spec.check_interval > 0 ? spec.check_interval : n;
    if (next_event == spec.events.size() && (!checked_once || fired || t - last_check >= interval)) {
      checked_once = true;
      last_check = t;
      const EquilibriumReport r = classify_state(spec.model, pop.config, spec.tolerance);
      if (r.is_equilibrium) {
        record.stop_reason = r.is_clustered ? StopReason::converged : StopReason::equilibrium_detected;
        break;
      }
    }
    if (t >= spec.max_steps) {
      record.stop_reason = StopReason::max_steps;
      break;
    }

    AgentId updater;
    if (schedule_rng) {
      updater = pop.ids[schedule_rng->uniform_index(n)];
    } else if (const auto* e = std::get_if<ExplicitSchedule>(&spec.schedule)) {
      if (t >= e->agents.size()) {
        record.stop_reason = StopReason::schedule_exhausted;
        break;
      }
      updater = e->agents[t];
    } else {
      if (shrink->length() == 0) {
        record.stop_reason = StopReason::schedule_exhausted;
        break;
      }
      updater = pop.ids[select_agent(pop.config, shrink->steps[t % shrink->length()]).index()];
    }

    const AgentId pos = AgentId::from_index(pop.position_of(updater));
    std::visit(overloaded{[&](const KnnModel& m) {
                            NeighborSet ns = knn_neighbors(pop.config, pos, m.k);
                            S value = mean_over(pop.config, ns.members);
                            if (spec.record_neighbors) {
                              for (AgentId& j : ns.members) j = pop.ids[j.index()];
                              record.neighborhoods.push_back(std::move(ns.members));
                            }
                            pop.config = pop.config.with_opinion(pos, std::move(value));
                          },
                          [&](const AbcModel<S>& m) {
                            NeighborSet ns = abc_neighbors(pop.config, pos, m.d);
                            S value = mean_over(pop.config, ns.members);
                            if (spec.record_neighbors) {
                              for (AgentId& j : ns.members) j = pop.ids[j.index()];
                              record.neighborhoods.push_back(std::move(ns.members));
                            }
                            pop.config = pop.config.with_opinion(pos, std::move(value));
                          }},
               spec.model);
    record.updaters.push_back(updater);
    if (observer) observer({t + 1, pop.ids, pop.config, updater, false});
  }

  record.steps = t;
  snapshot(t);
  const EquilibriumReport final_report = classify_state(spec.model, pop.config, spec.tolerance);
  result.limit = limit_of(final_report);
  result.cluster_sizes = final_cluster_sizes(pop.config, spec.tolerance);
  return result;
}

template void validate(const ScenarioSpec<double>&);
template void validate(const ScenarioSpec<Rational>&);
template Configuration<double> initial_configuration(const ScenarioSpec<double>&);
template Configuration<Rational> initial_configuration(const ScenarioSpec<Rational>&);
template SimulationResult<double> simulate(const ScenarioSpec<double>&, const StepObserver<double>&);
template SimulationResult<Rational> simulate(const ScenarioSpec<Rational>&, const StepObserver<Rational>&);

std::optional<Quantiles> quantiles_of(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  // Nearest-rank quantile.
  const auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::clamp<std::size_t>(r, 1, values.size()) - 1];
  };
  Quantiles q;
  q.min = values.front();
  q.max = values.back();
  q.p50 = rank(0.5);
  q.p90 = rank(0.9);
  q.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  return q;
}

bool ConsensusStats::all_in_hull() const {
  return std::all_of(runs.begin(), runs.end(), [](const ConsensusRun& r) { return r.in_hull; });
}

ConsensusStats monte_carlo_consensus(const ConsensusParams& params) {
  check_neighborhood_size(params.n, params.k);
  if (params.n >= 2 * params.k && !params.allow_large_n) {
    throw ParameterError("consensus is only guaranteed for n < 2k; set allow_large_n to explore n >= 2k");
  }
  ConsensusStats stats;
  stats.n = params.n;
  stats.k = params.k;
  stats.seed = params.seed;
  stats.max_steps = params.max_steps;
  stats.tolerance = params.tolerance;
  stats.runs.resize(params.runs);

  parallel_for(params.runs, params.jobs, [&](std::size_t r) {
    ConsensusRun& run = stats.runs[r];
    run.seed = derive_seed(params.seed, r);
    ScenarioSpec<double> spec;
    spec.model = KnnModel{params.k};
    spec.initial = UniformInitial{0.0, 1.0, params.n, derive_seed(run.seed, 0)};
    spec.schedule = UniformRandomSchedule{derive_seed(run.seed, 1)};
    spec.max_steps = params.max_steps;
    spec.tolerance = params.tolerance;
    spec.record_every = 0;
    const auto result = simulate(spec);
    const auto& x0 = result.trajectory.initial_state().opinions;
    const auto& xt = result.trajectory.final_state().opinions;
    run.initial_min = *std::min_element(x0.begin(), x0.end());
    run.initial_max = *std::max_element(x0.begin(), x0.end());
    run.hitting_time = result.hitting_time;
    run.converged = result.hitting_time.has_value();
    run.steps = result.trajectory.steps;
    run.consensus_value = mean_of(xt);
    run.in_hull = std::all_of(xt.begin(), xt.end(), [&](double v) { return run.initial_min <= v && v <= run.initial_max; }) &&
                  run.initial_min <= run.consensus_value && run.consensus_value <= run.initial_max;
  });

  std::vector<double> times;
  for (const auto& run : stats.runs) {
    if (run.converged) {
      ++stats.converged;
      times.push_back(static_cast<double>(*run.hitting_time));
    }
  }
  stats.hitting_time = quantiles_of(std::move(times));
  return stats;
}

namespace {

ScenarioSpec<double> robustness_spec(const Configuration<double>& base, const RobustnessParams& params) {
  ScenarioSpec<double> spec;
  spec.model = KnnModel{params.k};
  spec.initial = ExplicitInitial<double>{{base.opinions().begin(), base.opinions().end()}};
  spec.schedule = UniformRandomSchedule{params.schedule_seed};
  spec.event_seed = params.event_seed;
  spec.max_steps = params.max_steps;
  spec.tolerance = params.tolerance;
  spec.record_every = params.record_every;
  return spec;
}

}  // namespace

AdditionReport robustness_addition(const Configuration<double>& base, const std::vector<AddAgent<double>>& additions,
                                   const RobustnessParams& params) {
  if (!is_clustered(to_exact(base), params.k)) throw ParameterError("robustness_addition needs a clustered base configuration");

  ScenarioSpec<double> spec = robustness_spec(base, params);
  spec.events.assign(additions.begin(), additions.end());

  AdditionReport report;
  report.original_agents = base.size();
  const auto originals = base.opinions();
  const auto originals_changed = [&](const Configuration<double>& x) {
    for (std::size_t i = 0; i < originals.size(); ++i) {
      if (x.opinions()[i] != originals[i]) return true;
    }
    return false;
  };

  report.knn = simulate(spec, StepObserver<double>([&](const StepView<double>& view) {
                          if (originals_changed(view.config)) report.originals_untouched = false;
                        }));
  const auto& final_ops = report.knn.trajectory.final_state().opinions;
  report.added_final.assign(final_ops.begin() + static_cast<std::ptrdiff_t>(base.size()), final_ops.end());

  if (params.abc_d) {
    spec.model = AbcModel<double>{*params.abc_d};
    bool changed = false;
    report.abc = simulate(spec, StepObserver<double>([&](const StepView<double>& view) {
                            if (originals_changed(view.config)) changed = true;
                          }));
    report.abc_originals_changed = changed;
  }
  return report;
}

RemovalReport robustness_removal(const Configuration<double>& base, AgentId victim, const RobustnessParams& params) {
  base.check_agent(victim);
  const Configuration<Rational> exact = to_exact(base);
  if (!is_clustered(exact, params.k)) throw ParameterError("robustness_removal needs a clustered base configuration");

  RemovalReport report;
  report.removed = victim;
  const Rational& victim_opinion = exact[victim];
  report.victim_cluster_size = static_cast<std::size_t>(
      std::count(exact.opinions().begin(), exact.opinions().end(), victim_opinion));
  report.expected_equilibrium = report.victim_cluster_size >= params.k + 1;

  const Configuration<Rational> after = exact.without(victim);
  if (params.k > after.size()) throw ParameterError("removal leaves fewer than k agents");
  report.still_equilibrium = is_equilibrium(after, params.k);

  if (!report.still_equilibrium) {
    ScenarioSpec<double> spec = robustness_spec(base, params);
    spec.events.push_back(RemoveAgent{0, victim});
    report.knn_after = simulate(spec);
  }
  if (params.abc_d) report.abc_remaining_unchanged = is_abc_equilibrium(after, Rational::from_double(*params.abc_d));
  return report;
}

SweepStats batch_sweep(const std::vector<AnyScenario>& grid, std::size_t jobs) {
  SweepStats stats;
  stats.outcomes.resize(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    ScenarioOutcome& out = stats.outcomes[i];
    out.index = i;
    try {
      std::visit(
          [&](const auto& spec) {
            const auto result = simulate(spec);
            out.limit = result.limit;
            out.cluster_sizes = result.cluster_sizes;
            out.hitting_time = result.hitting_time;
            out.steps = result.trajectory.steps;
            out.stop_reason = result.trajectory.stop_reason;
          },
          grid[i]);
      out.ok = true;
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
  });

  std::vector<double> hitting;
  std::vector<double> stops;
  for (const auto& out : stats.outcomes) {
    if (!out.ok) {
      ++stats.errors;
      continue;
    }
    ++stats.limit_counts[out.limit];
    stops.push_back(static_cast<double>(out.steps));
    if (out.hitting_time) hitting.push_back(static_cast<double>(*out.hitting_time));
    if (out.limit == LimitClass::consensus || out.limit == LimitClass::clustered) {
      ++stats.cluster_count_histogram[out.cluster_sizes.size()];
      auto sizes = out.cluster_sizes;
      std::sort(sizes.begin(), sizes.end());
      std::string pattern;
      for (std::size_t s : sizes) pattern += (pattern.empty() ? "" : "/") + std::to_string(s);
      ++stats.cluster_size_patterns[pattern];
    }
  }
  stats.hitting_time = quantiles_of(std::move(hitting));
  stats.stop_step = quantiles_of(std::move(stops));
  return stats;
}

void reseed(AnyScenario& spec, std::uint64_t seed) {
  std::visit(
      [&](auto& s) {
        if (auto* u = std::get_if<UniformInitial>(&s.initial)) u->seed = derive_seed(seed, 0);
        if (auto* r = std::get_if<UniformRandomSchedule>(&s.schedule)) r->seed = derive_seed(seed, 1);
        s.event_seed = derive_seed(seed, 2);
      },
      spec);
}

std::vector<AnyScenario> replicate(const AnyScenario& base, std::size_t runs, std::uint64_t seed) {
  std::vector<AnyScenario> out;
  out.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    AnyScenario copy = base;
    reseed(copy, derive_seed(seed, r));
    out.push_back(std::move(copy));
  }
  return out;
}

}  // namespace knnod
