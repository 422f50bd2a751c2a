#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "knnod/convergence.hpp"
#include "knnod/harness.hpp"
#include "knnod/random.hpp"

using knnod::AgentId;
using knnod::Configuration;
using knnod::Rational;
using knnod::ScenarioSpec;

namespace {

Rational q(long p, long d = 1) { return Rational(p, d); }

ScenarioSpec<double> uniform_knn(std::size_t n, std::size_t k, std::uint64_t seed) {
  ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{k};
  spec.initial = knnod::UniformInitial{0.0, 1.0, n, knnod::derive_seed(seed, 0)};
  spec.schedule = knnod::UniformRandomSchedule{knnod::derive_seed(seed, 1)};
  spec.event_seed = knnod::derive_seed(seed, 2);
  return spec;
}

std::string field_of(const auto& spec) {
  try {
    knnod::validate(spec);
  } catch (const knnod::ScenarioError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Simulate, ConsensusStopsImmediately) {
  ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{2};
  spec.initial = knnod::ClustersInitial<double>{{{0.3, 4}}};
  const auto r = knnod::simulate(spec);
  EXPECT_EQ(r.trajectory.steps, 0u);
  EXPECT_EQ(r.trajectory.stop_reason, knnod::StopReason::converged);
  EXPECT_EQ(r.limit, knnod::LimitClass::consensus);
  EXPECT_EQ(r.hitting_time, 0u);
  EXPECT_EQ(r.trajectory.final_state().opinions, std::vector<double>(4, 0.3));
}

TEST(Simulate, ShrinkScheduleMatchesDirectRun) {
  knnod::Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(4);
    const std::size_t n = k + rng.uniform_index(k);
    const auto x = knnod::random_exact_configuration(rng, n);
    const auto direct = knnod::run_shrink_schedule(x, k);

    ScenarioSpec<Rational> spec;
    spec.model = knnod::KnnModel{k};
    spec.initial = knnod::ExplicitInitial<Rational>{{x.opinions().begin(), x.opinions().end()}};
    spec.schedule = knnod::ShrinkCycleSchedule{};
    spec.max_steps = direct.steps;
    spec.check_interval = 1'000'000;
    const auto r = knnod::simulate(spec);
    if (r.trajectory.stop_reason != knnod::StopReason::max_steps) continue;  // started at an equilibrium
    EXPECT_EQ(r.trajectory.updaters, direct.updaters);
    EXPECT_EQ(r.trajectory.diameters, direct.diameters);
    EXPECT_EQ(r.trajectory.final_state().opinions, direct.final_state().opinions);
  }
}

TEST(Simulate, ExplicitScheduleFollowsTheList) {
  ScenarioSpec<Rational> spec;
  spec.model = knnod::KnnModel{2};
  spec.initial = knnod::ExplicitInitial<Rational>{{q(0), q(1, 2), q(1)}};
  spec.schedule = knnod::ExplicitSchedule{{AgentId{2}}};
  const auto r = knnod::simulate(spec);
  EXPECT_EQ(r.trajectory.stop_reason, knnod::StopReason::schedule_exhausted);
  EXPECT_EQ(r.trajectory.final_state().opinions, (std::vector<Rational>{q(0), q(1, 4), q(1)}));
}

TEST(Simulate, ExactClusteredStartIsImmune) {
  ScenarioSpec<Rational> spec;
  spec.model = knnod::KnnModel{3};
  spec.initial = knnod::ClustersInitial<Rational>{{{q(0), 3}, {q(1), 4}}};
  const auto r = knnod::simulate(spec);
  EXPECT_EQ(r.trajectory.steps, 0u);
  EXPECT_EQ(r.limit, knnod::LimitClass::clustered);
  EXPECT_EQ(r.cluster_sizes, (std::vector<std::size_t>{3, 4}));
}

TEST(Simulate, ExactNonClusteredEquilibriumDetected) {
  const auto x = knnod::build_example1(q(0), q(1));
  ScenarioSpec<Rational> spec;
  spec.model = knnod::KnnModel{5};
  spec.initial = knnod::ExplicitInitial<Rational>{{x.opinions().begin(), x.opinions().end()}};
  const auto r = knnod::simulate(spec);
  EXPECT_EQ(r.trajectory.stop_reason, knnod::StopReason::equilibrium_detected);
  EXPECT_EQ(r.limit, knnod::LimitClass::non_clustered);
}

TEST(Simulate, TwoAgentsReachConsensus) {
  const auto stats = knnod::monte_carlo_consensus({.n = 2, .k = 2, .runs = 20, .seed = 4});
  EXPECT_EQ(stats.converged, 20u);
  EXPECT_TRUE(stats.all_in_hull());
}

TEST(Simulate, SingleAgentHitsAtZero) {
  const auto stats = knnod::monte_carlo_consensus({.n = 1, .k = 1, .runs = 3, .seed = 4});
  EXPECT_EQ(stats.converged, 3u);
  for (const auto& run : stats.runs) EXPECT_EQ(run.hitting_time, 0u);
}

TEST(Simulate, ConsensusNeedsSmallN) {
  EXPECT_THROW(knnod::monte_carlo_consensus({.n = 10, .k = 5, .runs = 1}), knnod::ParameterError);
  EXPECT_NO_THROW(knnod::monte_carlo_consensus({.n = 10, .k = 5, .runs = 1, .max_steps = 1000, .allow_large_n = true}));
}

TEST(Simulate, ConsensusBelowTwoK) {
  const auto stats = knnod::monte_carlo_consensus({.n = 5, .k = 3, .runs = 20, .seed = 9});
  EXPECT_EQ(stats.converged, 20u);
  EXPECT_TRUE(stats.all_in_hull());
  ASSERT_TRUE(stats.hitting_time);
  EXPECT_LE(stats.hitting_time->min, stats.hitting_time->max);
}

TEST(Simulate, SameSeedSameTrajectory) {
  const auto spec = uniform_knn(12, 4, 5);
  const auto a = knnod::simulate(spec);
  const auto b = knnod::simulate(spec);
  EXPECT_EQ(a.trajectory.updaters, b.trajectory.updaters);
  ASSERT_EQ(a.trajectory.snapshots.size(), b.trajectory.snapshots.size());
  for (std::size_t s = 0; s < a.trajectory.snapshots.size(); ++s) {
    EXPECT_EQ(a.trajectory.snapshots[s].opinions, b.trajectory.snapshots[s].opinions);
  }
}

TEST(Simulate, HullEnvelopeAndDiameter) {
  knnod::Rng rng(88);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(15);
    const std::size_t k = 1 + rng.uniform_index(n);
    auto spec = uniform_knn(n, k, rng.next());
    spec.max_steps = 3000;
    if (rng.coin()) spec.model = knnod::AbcModel<double>{rng.uniform(0.0, 0.5)};
    double lo = 0;
    double hi = 0;
    bool first = true;
    const auto r = knnod::simulate(spec, knnod::StepObserver<double>([&](const knnod::StepView<double>& v) {
                                     if (first) {
                                       lo = v.config.min();
                                       hi = v.config.max();
                                       first = false;
                                       return;
                                     }
                                     EXPECT_GE(v.config.min(), lo);
                                     EXPECT_LE(v.config.max(), hi);
                                     lo = v.config.min();
                                     hi = v.config.max();
                                   }));
    for (std::size_t t = 1; t < r.trajectory.diameters.size(); ++t) {
      EXPECT_LE(r.trajectory.diameters[t], r.trajectory.diameters[t - 1]);
    }
    EXPECT_EQ(r.trajectory.diameters.size(), r.trajectory.steps + 1);
    EXPECT_EQ(r.trajectory.updaters.size(), r.trajectory.steps);
  }
}

TEST(Events, AddedAgentsGetFreshIdsAndFireBeforeTheUpdate) {
  ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{2};
  spec.initial = knnod::ExplicitInitial<double>{{0.0, 1.0, 2.0}};
  spec.events = {knnod::RemoveAgent{1, AgentId{2}}, knnod::AddAgent<double>{2, 5.0}};
  spec.schedule = knnod::ExplicitSchedule{{AgentId{1}, AgentId{3}, AgentId{4}}};
  std::vector<std::vector<AgentId>> seen;
  const auto r = knnod::simulate(spec, knnod::StepObserver<double>([&](const knnod::StepView<double>& v) {
                                   seen.emplace_back(v.ids.begin(), v.ids.end());
                                 }));
  EXPECT_EQ(r.trajectory.updaters, (std::vector<AgentId>{AgentId{1}, AgentId{3}, AgentId{4}}));
  EXPECT_EQ(r.trajectory.final_state().ids, (std::vector<AgentId>{AgentId{1}, AgentId{3}, AgentId{4}}));
  // [0,1,2] -> agent 1: 0.5; remove 2; agent 3: 1.25; add 4 at 5.0, which updates at once: 3.125.
  EXPECT_DOUBLE_EQ(r.trajectory.final_state().opinions.back(), 3.125);
}

TEST(Events, UniformOpinionDrawnFromEventStream) {
  ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{2};
  spec.initial = knnod::ClustersInitial<double>{{{0.4, 3}}};
  spec.events = {knnod::AddAgent<double>{0, knnod::UniformOpinion{0.9, 1.0}}};
  spec.event_seed = 5;
  spec.max_steps = 0;
  const auto r = knnod::simulate(spec);
  knnod::Rng rng(5);
  EXPECT_EQ(r.trajectory.final_state().opinions.back(), rng.uniform(0.9, 1.0));
}

TEST(Validate, NamesTheOffendingField) {
  ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{6};
  spec.initial = knnod::UniformInitial{0, 1, 5, 0};
  EXPECT_EQ(field_of(spec), "model.k");

  spec.model = knnod::KnnModel{2};
  spec.events = {knnod::RemoveAgent{3, AgentId{9}}};
  EXPECT_EQ(field_of(spec), "events[0].agent");

  spec.events = {knnod::AddAgent<double>{3, 0.5}, knnod::AddAgent<double>{3, 0.5}};
  EXPECT_EQ(field_of(spec), "events[1].step");

  spec.events = {knnod::RemoveAgent{1, AgentId{2}}, knnod::RemoveAgent{2, AgentId{2}}};
  EXPECT_EQ(field_of(spec), "events[1].agent");

  spec.events.clear();
  spec.schedule = knnod::ExplicitSchedule{{AgentId{1}, AgentId{6}}};
  EXPECT_EQ(field_of(spec), "schedule.agents[1]");

  spec.schedule = knnod::UniformRandomSchedule{};
  spec.model = knnod::AbcModel<double>{-0.1};
  EXPECT_EQ(field_of(spec), "model.d");
}

TEST(Robustness, AdditionLeavesOriginalsUntouched) {
  const Configuration<double> base(std::vector<double>(10, 0.4));
  std::vector<knnod::AddAgent<double>> additions;
  for (std::size_t s = 2; s <= 5; ++s) additions.push_back({s, knnod::UniformOpinion{0.0, 1.0}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = knnod::robustness_addition(base, additions,
                                              {.k = 5, .abc_d = 0.25, .schedule_seed = seed, .event_seed = seed + 100});
    EXPECT_TRUE(r.originals_untouched);
    ASSERT_EQ(r.added_final.size(), 4u);
    if (r.knn.limit == knnod::LimitClass::consensus) {
      for (double v : r.added_final) EXPECT_NEAR(v, 0.4, 1e-9);
    }
    EXPECT_TRUE(r.abc.has_value());
  }
}

TEST(Robustness, KDistantAgentsFormANewCluster) {
  const Configuration<double> base(std::vector<double>(10, 0.4));
  std::vector<knnod::AddAgent<double>> additions;
  for (std::size_t s = 0; s < 5; ++s) additions.push_back({s, 3.0});
  const auto r = knnod::robustness_addition(base, additions, {.k = 5});
  EXPECT_TRUE(r.originals_untouched);
  EXPECT_EQ(r.knn.limit, knnod::LimitClass::clustered);
  EXPECT_EQ(r.knn.cluster_sizes, (std::vector<std::size_t>{10, 5}));
}

TEST(Robustness, AdditionRequiresClusteredBase) {
  EXPECT_THROW(knnod::robustness_addition(Configuration<double>{0.0, 1.0, 2.0}, {}, {.k = 2}), knnod::ParameterError);
}

TEST(Robustness, RemovalDependsOnClusterSize) {
  std::vector<double> ops(6, 0.0);
  ops.insert(ops.end(), 5, 1.0);
  const Configuration<double> base(ops);
  const auto big = knnod::robustness_removal(base, AgentId{1}, {.k = 5, .abc_d = 0.25});
  EXPECT_EQ(big.victim_cluster_size, 6u);
  EXPECT_TRUE(big.expected_equilibrium);
  EXPECT_TRUE(big.still_equilibrium);
  EXPECT_FALSE(big.knn_after.has_value());
  EXPECT_EQ(big.abc_remaining_unchanged, true);

  const auto small = knnod::robustness_removal(base, AgentId{11}, {.k = 5, .abc_d = 0.25});
  EXPECT_FALSE(small.expected_equilibrium);
  EXPECT_FALSE(small.still_equilibrium);
  ASSERT_TRUE(small.knn_after.has_value());
  EXPECT_GT(small.knn_after->trajectory.steps, 0u);
  EXPECT_EQ(small.abc_remaining_unchanged, true);
}

TEST(Sweep, TrivialConsensus) {
  ScenarioSpec<double> spec;
  spec.model = knnod::KnnModel{1};
  spec.initial = knnod::ClustersInitial<double>{{{0.5, 3}}};
  const auto s = knnod::batch_sweep({spec}, 1);
  EXPECT_EQ(s.limit_counts.at(knnod::LimitClass::consensus), 1u);
  ASSERT_TRUE(s.hitting_time);
  EXPECT_EQ(s.hitting_time->max, 0.0);
}

TEST(Sweep, DeterministicAcrossJobCounts) {
  const auto grid = knnod::replicate(knnod::AnyScenario{uniform_knn(12, 3, 0)}, 12, 99);
  const auto a = knnod::batch_sweep(grid, 1);
  const auto b = knnod::batch_sweep(grid, 4);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
    EXPECT_EQ(a.outcomes[i].steps, b.outcomes[i].steps);
    EXPECT_EQ(a.outcomes[i].cluster_sizes, b.outcomes[i].cluster_sizes);
  }
  EXPECT_EQ(a.cluster_size_patterns, b.cluster_size_patterns);
}

TEST(Sweep, ErrorsAreCollected) {
  ScenarioSpec<double> bad;
  bad.model = knnod::KnnModel{9};
  bad.initial = knnod::UniformInitial{0, 1, 3, 0};
  ScenarioSpec<double> good;
  good.model = knnod::KnnModel{1};
  good.initial = knnod::ClustersInitial<double>{{{0.5, 2}}};
  const auto s = knnod::batch_sweep({bad, good}, 2);
  EXPECT_EQ(s.errors, 1u);
  EXPECT_FALSE(s.outcomes[0].ok);
  EXPECT_TRUE(s.outcomes[1].ok);
}

TEST(Quantiles, NearestRank) {
  const auto qs = knnod::quantiles_of({5, 1, 4, 2, 3, 6, 7, 8, 9, 10});
  ASSERT_TRUE(qs);
  EXPECT_EQ(qs->min, 1);
  EXPECT_EQ(qs->p50, 5);
  EXPECT_EQ(qs->p90, 9);
  EXPECT_EQ(qs->max, 10);
  EXPECT_DOUBLE_EQ(qs->mean, 5.5);
  EXPECT_FALSE(knnod::quantiles_of({}));
}
