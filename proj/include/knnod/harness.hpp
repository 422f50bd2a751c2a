#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "knnod/configuration.hpp"
#include "knnod/equilibria.hpp"
#include "knnod/trajectory.hpp"

namespace knnod {

// ---------------------------------------------------------------------------
// Scenario description

struct KnnModel {
  std::size_t k = 1;
};

template <OpinionScalar S>
struct AbcModel {
  S d{};
};

template <OpinionScalar S>
using Model = std::variant<KnnModel, AbcModel<S>>;

struct UniformInitial {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

template <OpinionScalar S>
struct ExplicitInitial {
  std::vector<S> opinions;
};

template <OpinionScalar S>
struct ClusterBlock {
  S opinion{};
  std::size_t count = 0;
};

template <OpinionScalar S>
struct ClustersInitial {
  std::vector<ClusterBlock<S>> clusters;
};

template <OpinionScalar S>
using InitialSpec = std::variant<UniformInitial, ExplicitInitial<S>, ClustersInitial<S>>;

/// I(t) i.i.d. uniform over the agents present at step t.
struct UniformRandomSchedule {
  std::uint64_t seed = 0;
};

/// I(t) = agents[t]; the run ends when the list does.
struct ExplicitSchedule {
  std::vector<AgentId> agents;
};

/// The shrink pattern (k-1 lowest-minimizer updates, then k-1 lowest-maximizer
/// updates), repeated. k-NN models only.
struct ShrinkCycleSchedule {};

using ScheduleSpec = std::variant<UniformRandomSchedule, ExplicitSchedule, ShrinkCycleSchedule>;

struct UniformOpinion {
  double lo = 0.0;
  double hi = 1.0;
};

template <OpinionScalar S>
using OpinionSpec = std::variant<S, UniformOpinion>;

/// New agent with the next unused id, appended after everyone present.
template <OpinionScalar S>
struct AddAgent {
  std::size_t step = 0;
  OpinionSpec<S> opinion;
};

/// Ids are never reused after a removal.
struct RemoveAgent {
  std::size_t step = 0;
  AgentId agent;
};

template <OpinionScalar S>
using Event = std::variant<AddAgent<S>, RemoveAgent>;

template <OpinionScalar S>
std::size_t event_step(const Event<S>& e) {
  return std::visit([](const auto& ev) { return ev.step; }, e);
}

/// A complete, self-describing run. Events at step t fire before the update of
/// step t, so an agent added at t can already be selected at t.
template <OpinionScalar S>
struct ScenarioSpec {
  Model<S> model = KnnModel{};
  InitialSpec<S> initial = UniformInitial{};
  ScheduleSpec schedule = UniformRandomSchedule{};
  std::vector<Event<S>> events;
  std::uint64_t event_seed = 0;
  std::size_t max_steps = 1'000'000;
  double tolerance = 1e-9;
  std::size_t record_every = 1;    // 0: first and last state only
  std::size_t check_interval = 0;  // 0: every n steps
  bool record_neighbors = false;
};

using AnyScenario = std::variant<ScenarioSpec<double>, ScenarioSpec<Rational>>;

/// Throws ScenarioError naming the offending field.
template <OpinionScalar S>
void validate(const ScenarioSpec<S>& spec);

template <OpinionScalar S>
Configuration<S> initial_configuration(const ScenarioSpec<S>& spec);

// ---------------------------------------------------------------------------
// Simulation

enum class LimitClass { consensus, clustered, non_clustered, not_converged };

std::string_view to_string(LimitClass limit);

template <OpinionScalar S>
struct SimulationResult {
  TrajectoryRecord<S> trajectory;
  LimitClass limit = LimitClass::not_converged;
  /// Final cluster sizes by ascending opinion: exact partition on the exact
  /// backend, quantize_clusters at the run tolerance on floats.
  std::vector<std::size_t> cluster_sizes;
  /// First t with diameter(x(t)) < tolerance.
  std::optional<std::size_t> hitting_time;
};

/// What an observer sees: the state x(step) with the ids present.
template <OpinionScalar S>
struct StepView {
  std::size_t step;
  std::span<const AgentId> ids;
  const Configuration<S>& config;
  /// Set for the state produced by an update, empty for initial/event states.
  std::optional<AgentId> updater;
  bool after_event;
};

template <OpinionScalar S>
using StepObserver = std::function<void(const StepView<S>&)>;

/// Runs the scenario until convergence, an equilibrium, the end of the
/// schedule or max_steps. Convergence is only tested once every event fired.
template <OpinionScalar S>
SimulationResult<S> simulate(const ScenarioSpec<S>& spec, const StepObserver<S>& observer = {});

// ---------------------------------------------------------------------------
// Experiments

struct Quantiles {
  double min = 0;
  double p50 = 0;
  double p90 = 0;
  double max = 0;
  double mean = 0;
};

std::optional<Quantiles> quantiles_of(std::vector<double> values);

struct ConsensusRun {
  std::uint64_t seed = 0;
  bool converged = false;
  std::optional<std::size_t> hitting_time;
  std::size_t steps = 0;
  double consensus_value = 0;
  double initial_min = 0;
  double initial_max = 0;
  bool in_hull = false;
};

struct ConsensusStats {
  std::size_t n = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t max_steps = 0;
  double tolerance = 0;
  std::size_t converged = 0;
  std::vector<ConsensusRun> runs;
  std::optional<Quantiles> hitting_time;

  double converged_fraction() const { return runs.empty() ? 0.0 : static_cast<double>(converged) / static_cast<double>(runs.size()); }
  bool all_in_hull() const;
};

struct ConsensusParams {
  std::size_t n = 9;
  std::size_t k = 5;
  std::size_t runs = 100;
  std::uint64_t seed = 0;
  std::size_t max_steps = 1'000'000;
  double tolerance = 1e-9;
  bool allow_large_n = false;  // permit exploratory n >= 2k runs
  std::size_t jobs = 1;
};

/// Independent runs from uniform [0, 1] opinions under the uniform random
/// schedule; per run: hitting time of diameter < tolerance and whether the
/// consensus value lies in [min x(0), max x(0)].
ConsensusStats monte_carlo_consensus(const ConsensusParams& params);

struct RobustnessParams {
  std::size_t k = 5;
  std::optional<double> abc_d;  // run the bounded-confidence comparison too
  std::uint64_t schedule_seed = 0;
  std::uint64_t event_seed = 0;
  std::size_t max_steps = 1'000'000;
  double tolerance = 1e-9;
  std::size_t record_every = 1;
};

struct AdditionReport {
  std::size_t original_agents = 0;
  /// k-NN run: no original agent's opinion ever changed, bit for bit.
  bool originals_untouched = true;
  SimulationResult<double> knn;
  std::vector<double> added_final;
  /// Bounded-confidence run with the same additions and update order.
  std::optional<SimulationResult<double>> abc;
  std::optional<bool> abc_originals_changed;
};

/// Adds agents to a clustered equilibrium (checked exactly) and watches the
/// original agents. Throws ParameterError if `base` is not clustered.
AdditionReport robustness_addition(const Configuration<double>& base, const std::vector<AddAgent<double>>& additions,
                                   const RobustnessParams& params);

struct RemovalReport {
  AgentId removed;
  std::size_t victim_cluster_size = 0;
  bool expected_equilibrium = false;  // victim cluster had >= k+1 members
  bool still_equilibrium = false;     // exact check after the removal
  /// k-NN dynamics resumed from the post-removal state (only when it is not an equilibrium).
  std::optional<SimulationResult<double>> knn_after;
  /// Bounded-confidence side: no remaining agent would move after the removal.
  std::optional<bool> abc_remaining_unchanged;
};

RemovalReport robustness_removal(const Configuration<double>& base, AgentId victim, const RobustnessParams& params);

struct ScenarioOutcome {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  LimitClass limit = LimitClass::not_converged;
  std::vector<std::size_t> cluster_sizes;
  std::optional<std::size_t> hitting_time;
  std::size_t steps = 0;
  StopReason stop_reason = StopReason::max_steps;
};

struct SweepStats {
  std::vector<ScenarioOutcome> outcomes;  // by scenario index
  std::map<LimitClass, std::size_t> limit_counts;
  /// Number of clusters in clustered (incl. consensus) limits -> runs.
  std::map<std::size_t, std::size_t> cluster_count_histogram;
  /// Sorted cluster sizes joined by '/', e.g. "10/10" -> runs.
  std::map<std::string, std::size_t> cluster_size_patterns;
  std::optional<Quantiles> hitting_time;
  std::optional<Quantiles> stop_step;
  std::size_t errors = 0;
};

/// Runs every scenario (up to `jobs` at a time); results merged by index.
/// A failing scenario is recorded in its outcome, not rethrown.
SweepStats batch_sweep(const std::vector<AnyScenario>& grid, std::size_t jobs);

/// Initial, schedule and event seeds become streams 0, 1, 2 of `seed`.
void reseed(AnyScenario& spec, std::uint64_t seed);

/// `runs` copies of `base` with the initial/schedule/event seeds re-derived
/// from (seed, replicate index) via reseed.
std::vector<AnyScenario> replicate(const AnyScenario& base, std::size_t runs, std::uint64_t seed);

}  // namespace knnod
