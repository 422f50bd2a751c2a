// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "knnod/commands.hpp"
#include "knnod/convergence.hpp"
#include "knnod/equilibria.hpp"
#include "knnod/harness.hpp"
#include "knnod/random.hpp"

using knnod::AgentId;
using knnod::Configuration;
using knnod::Rational;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = true;
  std::string detail;
};

Rational random_rational(knnod::Rng& rng) { return Rational(rng.uniform_int(-1000, 1000), rng.uniform_int(1, 97)); }

// Independent oracle: x is fixed under every single-agent k-NN update.
bool fixed_point(const Configuration<Rational>& x, std::size_t k) {
  for (std::size_t i = 1; i <= x.size(); ++i) {
    if (knnod::knn_updated_opinion(x, AgentId{i}, k) != x[AgentId{i}]) return false;
  }
  return true;
}

// Independent oracle: every opinion is held by at least k agents.
bool every_opinion_held_by_k(const Configuration<Rational>& x, std::size_t k) {
  const auto ops = x.opinions();
  return std::all_of(ops.begin(), ops.end(), [&](const Rational& v) {
    return static_cast<std::size_t>(std::count(ops.begin(), ops.end(), v)) >= k;
  });
}

Outcome exact_equilibrium_certification() {
  knnod::Rng rng(2024);
  std::size_t pairs = 0;
  std::size_t failures = 0;
  while (pairs < 20) {
    Rational a = random_rational(rng);
    Rational b = random_rational(rng);
    if (a == b) continue;
    if (b < a) std::swap(a, b);
    ++pairs;
    const auto tie = knnod::build_tie_counterexample(a, b);
    const auto ex = knnod::build_example1(a, b);
    const bool ok = knnod::is_equilibrium(tie, 3) && !knnod::is_clustered(tie, 3) && fixed_point(tie, 3) &&
                    !every_opinion_held_by_k(tie, 3) && knnod::is_equilibrium(ex, 5) && !knnod::is_clustered(ex, 5) &&
                    fixed_point(ex, 5) && !every_opinion_held_by_k(ex, 5);
    if (!ok) ++failures;
  }
  return {failures == 0, fmt::format("{} random (alpha, beta) pairs, {} failures", pairs, failures)};
}

Outcome cluster_size_equivalence() {
  knnod::Rng rng(77);
  std::size_t mismatches = 0;
  std::size_t clustered = 0;
  const std::size_t trials = 10000;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.uniform_index(30);
    const auto layout = knnod::random_cluster_layout(rng, n);
    const std::size_t k = 1 + rng.uniform_index(n);
    const bool expected = *std::min_element(layout.sizes.begin(), layout.sizes.end()) >= k;
    const bool got = knnod::is_clustered(layout.config, k);
    if (got != expected) ++mismatches;
    if (expected) ++clustered;
  }
  return {mismatches == 0, fmt::format("{} layouts (n <= 30), {} clustered, {} mismatches", trials, clustered, mismatches)};
}

Outcome z_le_y_dichotomy() {
  std::size_t below = 0;
  std::size_t witnesses = 0;
  std::size_t failures = 0;
  for (std::size_t n = 2; n <= 12; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const auto r = knnod::check_z_le_y(n, k, 10000, knnod::derive_seed(4, n * 100 + k));
      if (n < 2 * k) {
        ++below;
        if (!r.passed || r.trials < 10000) ++failures;
      } else {
        ++witnesses;
        // Rebuild the sorted witness independently of the checker.
        std::vector<Rational> ops;
        for (std::size_t i = 0; i < n; ++i) ops.emplace_back(static_cast<long>(i));
        const auto sel = knnod::extremal_selection(Configuration<Rational>(ops), k);
        if (!r.passed || !(sel.z > sel.y) || !r.z || !r.y || !(*r.z > *r.y)) ++failures;
      }
    }
  }
  return {failures == 0, fmt::format("{} (n,k) with n<2k x 10000 configs without z>y; {} witnesses with z>y; {} failures",
                                     below, witnesses, failures)};
}

Outcome shrink_contraction() {
  knnod::Rng rng(55);
  std::size_t pairs = 0;
  std::size_t failures = 0;
  Rational worst(0);
  for (std::size_t n = 1; n <= 15; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      if (n >= 2 * k) continue;
      ++pairs;
      for (int t = 0; t < 1000; ++t) {
        const auto x = knnod::random_exact_configuration(rng, n);
        const auto record = knnod::run_shrink_schedule(x, k);
        const Rational before = knnod::diameter(x);
        const Rational after = knnod::diameter(record.final_state().configuration());
        const Rational bound = (Rational(1) - Rational(1, static_cast<long>(k))) * before;
        if (!(after <= bound)) ++failures;
        if (before > Rational(0)) worst = std::max(worst, after / before);
      }
    }
  }
  const Configuration<Rational> tight{Rational(0), Rational(1, 2), Rational(1)};
  const auto record = knnod::run_shrink_schedule(tight, 2);
  const bool equality =
      knnod::diameter(record.final_state().configuration()) == Rational(1, 2) * knnod::diameter(tight);
  return {failures == 0 && equality,
          fmt::format("{} (n,k) pairs x 1000 configs, {} violations, largest ratio {:.6f}; [0,1/2,1], k=2 equality: {}", pairs,
                      failures, worst.to_double(), equality ? "yes" : "no")};
}

Outcome consensus_finite_horizon() {
  bool ok = true;
  std::string detail;
  const std::pair<std::size_t, std::size_t> cases[] = {{9, 5}, {7, 4}, {3, 2}};
  for (const auto& [n, k] : cases) {
    knnod::ConsensusParams params;
    params.n = n;
    params.k = k;
    params.runs = 100;
    params.seed = 1000 + n;
    params.max_steps = 1'000'000;
    params.tolerance = 1e-9;
    const auto stats = knnod::monte_carlo_consensus(params);
    // Hull check recomputed from the per-run record.
    std::size_t in_hull = 0;
    for (const auto& run : stats.runs) {
      if (run.converged && *run.hitting_time <= params.max_steps && run.initial_min <= run.consensus_value &&
          run.consensus_value <= run.initial_max) {
        ++in_hull;
      }
    }
    ok = ok && stats.converged == 100 && in_hull == 100;
    detail += fmt::format("(n={}, k={}): {}/100 converged, {}/100 in hull, max hitting time {}; ", n, k, stats.converged,
                          in_hull, stats.hitting_time ? stats.hitting_time->max : -1.0);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome robustness_addition() {
  const Configuration<double> base(std::vector<double>(10, 0.4));
  std::vector<knnod::AddAgent<double>> additions;
  for (std::size_t step = 2; step <= 5; ++step) additions.push_back({step, knnod::UniformOpinion{0.0, 1.0}});
  std::size_t untouched = 0;
  std::size_t converged = 0;
  std::size_t converged_to_base = 0;
  std::size_t non_clustered = 0;
  std::size_t other = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    knnod::RobustnessParams params;
    params.k = 5;
    params.schedule_seed = knnod::derive_seed(seed, 1);
    params.event_seed = knnod::derive_seed(seed, 2);
    params.record_every = 0;
    const auto r = knnod::robustness_addition(base, additions, params);
    // Recheck the originals on the recorded final state as well as through the observer.
    const auto& final_ops = r.knn.trajectory.final_state().opinions;
    const bool originals_same = std::all_of(final_ops.begin(), final_ops.begin() + 10, [](double v) { return v == 0.4; });
    if (r.originals_untouched && originals_same) ++untouched;
    if (r.knn.limit == knnod::LimitClass::consensus) {
      ++converged;
      if (std::all_of(r.added_final.begin(), r.added_final.end(), [](double v) { return std::abs(v - 0.4) <= 1e-9; })) {
        ++converged_to_base;
      }
    } else if (r.knn.limit == knnod::LimitClass::non_clustered) {
      ++non_clustered;
    } else {
      ++other;
    }
  }
  return {untouched == 100 && converged == converged_to_base,
          fmt::format("originals bit-identical in {}/100; {} converged runs, {} with added agents within 1e-9 of 0.4; "
                      "{} non-clustered limits, {} other",
                      untouched, converged, converged_to_base, non_clustered, other)};
}

Outcome robustness_removal() {
  const std::size_t k = 5;
  const std::vector<Rational> ops{Rational(0), Rational(1)};
  const std::vector<std::size_t> equal_sizes{k, k};
  const std::vector<std::size_t> uneven_sizes{k + 1, k};
  const auto equal = knnod::build_clustered(equal_sizes, ops);
  const auto uneven = knnod::build_clustered(uneven_sizes, ops);
  std::size_t broke = 0;
  for (std::size_t i = 1; i <= equal.size(); ++i) {
    const auto after = equal.without(AgentId{i});
    if (!knnod::is_equilibrium(after, k) && !fixed_point(after, k)) ++broke;
  }
  std::size_t kept = 0;
  for (std::size_t i = 1; i <= k + 1; ++i) {
    const auto after = uneven.without(AgentId{i});
    if (knnod::is_equilibrium(after, k) && fixed_point(after, k)) ++kept;
  }
  return {broke == 2 * k && kept == k + 1,
          fmt::format("[5,5]: {}/10 removals leave a non-equilibrium; [6,5]: {}/6 removals from the larger cluster keep it",
                      broke, kept)};
}

Outcome cluster_count_bound() {
  knnod::ScenarioSpec<double> base;
  base.model = knnod::KnnModel{5};
  base.initial = knnod::UniformInitial{0.0, 1.0, 20, 0};
  base.record_every = 0;
  const auto grid = knnod::replicate(knnod::AnyScenario{base}, 500, 2025);
  const auto stats = knnod::batch_sweep(grid, 1);
  std::size_t clustered = 0;
  std::size_t violations = 0;
  for (const auto& o : stats.outcomes) {
    if (!o.ok) {
      ++violations;
      continue;
    }
    if (o.limit != knnod::LimitClass::clustered && o.limit != knnod::LimitClass::consensus) continue;
    ++clustered;
    std::size_t total = 0;
    for (std::size_t s : o.cluster_sizes) total += s;
    const bool bad = o.cluster_sizes.size() > 4 || total != 20 ||
                     std::any_of(o.cluster_sizes.begin(), o.cluster_sizes.end(), [](std::size_t s) { return s < 5; });
    if (bad) ++violations;
  }
  const auto it = stats.cluster_size_patterns.find("10/10");
  const std::size_t ten_ten = it == stats.cluster_size_patterns.end() ? 0 : it->second;
  std::string histogram;
  for (const auto& [count, runs] : stats.cluster_count_histogram) histogram += fmt::format("{}:{} ", count, runs);
  const auto count_of = [&](knnod::LimitClass c) {
    const auto f = stats.limit_counts.find(c);
    return f == stats.limit_counts.end() ? std::size_t{0} : f->second;
  };
  return {violations == 0 && ten_ten > 0,
          fmt::format("500 runs: {} clustered limits, {} violations, 10/10 splits {}; cluster counts {}; "
                      "{} non-clustered, {} not converged",
                      clustered, violations, ten_ten, histogram, count_of(knnod::LimitClass::non_clustered),
                      count_of(knnod::LimitClass::not_converged))};
}

Outcome monotone_envelope() {
  knnod::Rng rng(909);
  std::size_t runs = 0;
  std::size_t steps = 0;
  std::size_t violations = 0;
  for (; runs < 1000; ++runs) {
    const std::size_t n = 2 + rng.uniform_index(19);
    const std::size_t k = 1 + rng.uniform_index(n);
    const std::uint64_t seed = rng.next();
    const std::size_t kind = rng.uniform_index(3);
    if (kind == 2) {
      // Exact backend under the shrink schedule.
      knnod::ScenarioSpec<Rational> spec;
      spec.model = knnod::KnnModel{k};
      const auto x = knnod::random_exact_configuration(rng, n);
      spec.initial = knnod::ExplicitInitial<Rational>{{x.opinions().begin(), x.opinions().end()}};
      spec.schedule = knnod::ShrinkCycleSchedule{};
      spec.max_steps = 60;
      spec.record_every = 0;
      std::optional<Rational> lo;
      std::optional<Rational> hi;
      knnod::simulate(spec, knnod::StepObserver<Rational>([&](const knnod::StepView<Rational>& v) {
                        if (lo && !v.after_event) {
                          ++steps;
                          if (v.config.min() < *lo || v.config.max() > *hi) ++violations;
                        }
                        lo = v.config.min();
                        hi = v.config.max();
                      }));
      continue;
    }
    knnod::ScenarioSpec<double> spec;
    spec.model = knnod::KnnModel{k};
    if (rng.coin()) spec.model = knnod::AbcModel<double>{rng.uniform(0.0, 0.4)};
    spec.initial = knnod::UniformInitial{rng.uniform(-1.0, 0.0), rng.uniform(0.0, 1.0), n, knnod::derive_seed(seed, 0)};
    if (kind == 0) {
      spec.schedule = knnod::UniformRandomSchedule{knnod::derive_seed(seed, 1)};
    } else {
      knnod::ExplicitSchedule list;
      for (int t = 0; t < 500; ++t) list.agents.push_back(AgentId::from_index(rng.uniform_index(n)));
      spec.schedule = std::move(list);
    }
    // One addition with an opinion possibly outside the hull, so the envelope resets.
    if (rng.coin()) spec.events.push_back(knnod::AddAgent<double>{1 + rng.uniform_index(300), knnod::UniformOpinion{-2.0, 2.0}});
    spec.event_seed = knnod::derive_seed(seed, 2);
    spec.max_steps = 2000;
    spec.record_every = 0;
    std::optional<double> lo;
    std::optional<double> hi;
    knnod::simulate(spec, knnod::StepObserver<double>([&](const knnod::StepView<double>& v) {
                      if (lo && !v.after_event) {
                        ++steps;
                        if (v.config.min() < *lo || v.config.max() > *hi) ++violations;
                      }
                      lo = v.config.min();
                      hi = v.config.max();
                    }));
  }
  return {violations == 0, fmt::format("{} runs, {} update steps checked, {} violations", runs, steps, violations)};
}

Outcome reproducibility() {
  knnod::ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{4};
  spec.initial = knnod::UniformInitial{0.0, 1.0, 15, 31};
  spec.schedule = knnod::UniformRandomSchedule{32};
  spec.events = {knnod::AddAgent<double>{5, knnod::UniformOpinion{0.0, 1.0}}, knnod::RemoveAgent{9, AgentId{3}}};
  spec.event_seed = 33;
  const auto dir = std::filesystem::temp_directory_path() / "knnod_acceptance_repro";
  std::filesystem::create_directories(dir);
  knnod::cli::write_artifacts(knnod::cli::run_scenario(spec, "repro"), dir / "a");
  knnod::cli::write_artifacts(knnod::cli::run_scenario(spec, "repro"), dir / "b");
  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "a.csv");
  const std::string b = slurp(dir / "b.csv");
  std::filesystem::remove_all(dir);
  return {!a.empty() && a == b, fmt::format("two runs, CSV {} bytes each, identical: {}", a.size(), a == b ? "yes" : "no")};
}

struct Criterion {
  const char* id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "exact equilibrium certification", 1.0, exact_equilibrium_certification},
      {"AC2", "clustered iff every cluster has >= k agents", 60.0, cluster_size_equivalence},
      {"AC3", "z <= y iff n < 2k", 60.0, z_le_y_dichotomy},
      {"AC4", "shrink schedule contraction (exact)", 60.0, shrink_contraction},
      {"AC5", "consensus for n < 2k at finite horizon", 120.0, consensus_finite_horizon},
      {"AC6", "agent addition leaves a k-NN cluster untouched", 60.0, robustness_addition},
      {"AC7", "agent removal and cluster size", 1.0, robustness_removal},
      {"AC8", "cluster-count bound at n=20, k=5", 600.0, cluster_count_bound},
      {"AC9", "monotone envelope", 60.0, monotone_envelope},
      {"AC10", "reproducible CSV", 1.0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_budget = seconds < c.budget_seconds;
    const bool pass = outcome.passed && in_budget;
    if (!pass) ++failed;
    std::printf("%s %s: %s (%.2fs of %.0fs budget%s) -- %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                c.budget_seconds, in_budget ? "" : ", over budget", outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
