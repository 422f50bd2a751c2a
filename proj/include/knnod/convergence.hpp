#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "knnod/dynamics.hpp"
#include "knnod/trajectory.hpp"

namespace knnod {

/// mu(x) = min(argmin x)
template <OpinionScalar S>
AgentId lowest_minimizer(const Configuration<S>& config) {
  const auto ops = config.opinions();
  return AgentId::from_index(static_cast<std::size_t>(std::min_element(ops.begin(), ops.end()) - ops.begin()));
}

/// M(x) = min(argmax x)
template <OpinionScalar S>
AgentId lowest_maximizer(const Configuration<S>& config) {
  const auto ops = config.opinions();
  // max_element returns the first largest element.
  return AgentId::from_index(static_cast<std::size_t>(std::max_element(ops.begin(), ops.end()) - ops.begin()));
}

/// mu, M and the extremes y = max over N_mu, z = min over N_M.
template <OpinionScalar S>
struct ExtremalSelection {
  AgentId mu;
  AgentId big_m;
  S y;
  S z;
  NeighborSet mu_neighbors;
  NeighborSet big_m_neighbors;
};

template <OpinionScalar S>
ExtremalSelection<S> extremal_selection(const Configuration<S>& config, std::size_t k) {
  check_neighborhood_size(config.size(), k);
  const AgentId mu = lowest_minimizer(config);
  const AgentId big_m = lowest_maximizer(config);
  NeighborSet n_mu = knn_neighbors(config, mu, k);
  NeighborSet n_big_m = knn_neighbors(config, big_m, k);
  S y = config[n_mu.members.front()];
  for (AgentId j : n_mu.members) y = std::max(y, config[j]);
  S z = config[n_big_m.members.front()];
  for (AgentId j : n_big_m.members) z = std::min(z, config[j]);
  return {mu, big_m, std::move(y), std::move(z), std::move(n_mu), std::move(n_big_m)};
}

enum class Selector { mu, big_m };

/// k-1 updates of the lowest minimizer followed by k-1 updates of the lowest
/// maximizer: 2k-2 steps in total.
struct ShrinkSchedule {
  std::size_t k = 1;
  std::vector<Selector> steps;

  static ShrinkSchedule for_k(std::size_t k) {
    if (k < 1) throw ParameterError("shrink schedule needs k >= 1");
    ShrinkSchedule s{k, {}};
    s.steps.assign(k - 1, Selector::mu);
    s.steps.insert(s.steps.end(), k - 1, Selector::big_m);
    return s;
  }

  std::size_t length() const noexcept { return steps.size(); }
};

template <OpinionScalar S>
AgentId select_agent(const Configuration<S>& config, Selector selector) {
  return selector == Selector::mu ? lowest_minimizer(config) : lowest_maximizer(config);
}

/// Applies the shrink schedule, recording every intermediate configuration.
/// The (1 - 1/k) diameter contraction is only guaranteed for n < 2k; larger n
/// runs anyway and is flagged in the record notes.
template <OpinionScalar S>
TrajectoryRecord<S> run_shrink_schedule(const Configuration<S>& initial, std::size_t k,
                                        const UpdateRule<S>& rule = knn_rule<S>()) {
  check_neighborhood_size(initial.size(), k);
  const ShrinkSchedule schedule = ShrinkSchedule::for_k(k);

  std::vector<AgentId> ids;
  for (std::size_t i = 0; i < initial.size(); ++i) ids.push_back(AgentId::from_index(i));

  TrajectoryRecord<S> record;
  if (initial.size() >= 2 * k) record.notes.push_back("n >= 2k: contraction not guaranteed");
  Configuration<S> x = initial;
  record.snapshots.push_back({0, ids, std::vector<S>(x.opinions().begin(), x.opinions().end())});
  record.diameters.push_back(diameter(x));
  for (std::size_t t = 0; t < schedule.length(); ++t) {
    const AgentId i = select_agent(x, schedule.steps[t]);
    record.updaters.push_back(i);
    record.neighborhoods.push_back(knn_neighbors(x, i, k).members);
    x = rule(x, i, k);
    record.snapshots.push_back({t + 1, ids, std::vector<S>(x.opinions().begin(), x.opinions().end())});
    record.diameters.push_back(diameter(x));
  }
  record.steps = schedule.length();
  record.stop_reason = StopReason::schedule_exhausted;
  return record;
}

/// A failing input, kept so the failure can be replayed.
struct Counterexample {
  std::vector<Rational> initial;
  std::size_t k = 0;
  std::size_t step = 0;
  std::string message;
};

struct LemmaReport {
  std::string name;
  bool passed = true;
  std::size_t checked = 0;
  std::optional<Counterexample> counterexample;
  /// Largest observed lhs / rhs for contraction checks (<= 1 when they hold).
  std::optional<Rational> worst_ratio;
  std::string note;

  /// Accumulates another report of the same check; keeps the first failure.
  void absorb(const LemmaReport& other);
};

/// Under I(t) = mu(x(t)): N_mu and y stay constant, members of N_mu(x(0)) are
/// nondecreasing and bounded by y(0), everyone else is frozen.
LemmaReport verify_min_update_monotonicity(const Configuration<Rational>& initial, std::size_t k, std::size_t steps,
                                           const UpdateRule<Rational>& rule = knn_rule<Rational>());

/// After k-1 mu-updates: y - min_i x_i shrinks by at least the factor (1 - 1/k).
LemmaReport verify_min_update_contraction(const Configuration<Rational>& initial, std::size_t k,
                                          const UpdateRule<Rational>& rule = knn_rule<Rational>());

/// Mirror statements for I(t) = M(x(t)) with z and max_i x_i. Checked through
/// the reflection x -> -x (M(x) = mu(-x)) and again by direct computation; the
/// two trajectories must agree componentwise.
LemmaReport verify_max_update_mirror(const Configuration<Rational>& initial, std::size_t k, std::size_t steps,
                                     const UpdateRule<Rational>& rule = knn_rule<Rational>());

/// Diameter after the shrink schedule <= (1 - 1/k) * initial diameter. Asserted
/// only when n < 2k; otherwise the ratio is reported without a verdict.
LemmaReport verify_shrink_contraction(const Configuration<Rational>& initial, std::size_t k,
                                      const UpdateRule<Rational>& rule = knn_rule<Rational>());

struct ZyReport {
  std::size_t n = 0;
  std::size_t k = 0;
  bool expect_z_le_y = false;  // n < 2k
  bool passed = false;
  std::size_t trials = 0;
  /// Violation (n < 2k) or the constructed z > y configuration (n >= 2k).
  std::optional<Configuration<Rational>> witness;
  std::optional<Rational> y;
  std::optional<Rational> z;
};

/// n < 2k: random search for z > y (there must be none). n >= 2k: sorted
/// distinct opinions 0, 1, ..., n-1, for which y = k-1 < n-k = z.
ZyReport check_z_le_y(std::size_t n, std::size_t k, std::size_t trials, std::uint64_t seed);

/// Clustered by neighbor homogeneity iff every cluster has >= k members, on
/// random cluster layouts with n <= max_n.
LemmaReport verify_cluster_size_characterization(std::size_t trials, std::uint64_t seed, std::size_t max_n = 30);

struct SuiteReport {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::vector<LemmaReport> checks;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

/// Every check above on random exact inputs drawn from `seed`, `trials` each.
SuiteReport run_lemma_suite(std::uint64_t seed, std::size_t trials,
                            const UpdateRule<Rational>& rule = knn_rule<Rational>());

}  // namespace knnod
