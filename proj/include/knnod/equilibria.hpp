#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "knnod/configuration.hpp"
#include "knnod/dynamics.hpp"

namespace knnod {

/// V_i: agents sharing one opinion.
template <OpinionScalar S>
struct Cluster {
  S opinion;
  std::vector<AgentId> members;  // ascending
};

/// Groups partition V; opinions strictly ascending.
template <OpinionScalar S>
struct ClusterPartition {
  std::vector<Cluster<S>> groups;

  std::size_t count() const noexcept { return groups.size(); }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> out;
    out.reserve(groups.size());
    for (const auto& g : groups) out.push_back(g.members.size());
    return out;
  }

  std::size_t min_size() const {
    std::size_t m = groups.empty() ? 0 : groups.front().members.size();
    for (const auto& g : groups) m = std::min(m, g.members.size());
    return m;
  }
};

/// Partition by exact opinion equality. Float configurations must go through
/// quantize_clusters instead.
ClusterPartition<Rational> partition_clusters(const Configuration<Rational>& config);
ClusterPartition<Rational> partition_clusters(const AnyConfiguration& config);

/// Names the first agent that breaks a property, with its neighbor set.
struct Witness {
  std::string property;  // "equilibrium", "clustered" or "consensus"
  AgentId agent;
  std::vector<AgentId> neighbors;
};

struct EquilibriumReport {
  bool is_equilibrium = false;
  bool is_clustered = false;
  bool is_consensus = false;
  /// Float input classified up to a tolerance rather than certified.
  bool numerical = false;
  std::vector<Witness> witnesses;
};

/// Exact classification: equilibrium iff f(x, i) == x for every i.
EquilibriumReport classify(const Configuration<Rational>& config, std::size_t k);

/// Exact configurations are certified; float ones get classify_numerical.
EquilibriumReport classify(const AnyConfiguration& config, std::size_t k, double tolerance);

bool is_equilibrium(const Configuration<Rational>& config, std::size_t k);

/// Clustered by definition: every N_i is homogeneous at x_i.
bool clustered_by_neighbors(const Configuration<Rational>& config, std::size_t k);

/// Clustered by cluster sizes: |V_i| >= k for every i.
bool clustered_by_cluster_sizes(const Configuration<Rational>& config, std::size_t k);

/// Computes both characterizations and throws std::logic_error if they disagree.
bool is_clustered(const Configuration<Rational>& config, std::size_t k);

/// floor(n / k): the most clusters a clustered configuration can have.
std::size_t max_cluster_count(std::size_t n, std::size_t k);

/// n = 7, k = 3: x_{1,3,5} = alpha, x_{2,4,6} = beta, x_7 = (alpha + beta) / 2.
/// An equilibrium only because of the lower-index tie rule.
Configuration<Rational> build_tie_counterexample(const Rational& alpha, const Rational& beta);

/// n = 20, k = 5: eleven agents at alpha, two at (3 alpha + 2 beta) / 5, two at
/// (2 alpha + 3 beta) / 5, five at beta. A non-clustered equilibrium with no
/// tie-rule dependence.
Configuration<Rational> build_example1(const Rational& alpha, const Rational& beta);

/// Contiguous groups: the first sizes[0] agents at opinions[0], and so on.
Configuration<Rational> build_clustered(std::span<const std::size_t> sizes, std::span<const Rational> opinions);

/// floor(n/k) clusters at opinions 0, 1, 2, ...; all of size k except the last,
/// which absorbs the remainder.
Configuration<Rational> build_max_clustered(std::size_t n, std::size_t k);

/// Single-linkage grouping on the sorted opinion line: neighbours with gap <=
/// tolerance join one group. Representative opinion is the group mean.
ClusterPartition<double> quantize_clusters(const Configuration<double>& config, double tolerance);

/// Minimum gap, in tolerances, between quantized groups for a non-clustered
/// float verdict.
inline constexpr double kGroupSeparation = 1000.0;

/// Classification of a float configuration up to `tolerance`.
///
/// equilibrium: every probe move |probe(i) - x_i| is below tolerance, every
///              quantized group spans less than tolerance and, when some group
///              is undersized, adjacent groups are at least
///              kGroupSeparation * tolerance apart.
/// clustered:   equilibrium, each quantized group spans less than tolerance
///              and has at least `min_cluster` members.
/// consensus:   clustered with a single group.
template <class Probe>
EquilibriumReport classify_numerical_with(const Configuration<double>& config, std::size_t min_cluster,
                                          double tolerance, Probe&& probe) {
  EquilibriumReport report;
  report.numerical = true;
  report.is_equilibrium = true;
  for (std::size_t i = 0; i < config.size(); ++i) {
    const AgentId id = AgentId::from_index(i);
    if (!(abs_diff(probe(id), config[id]) < tolerance)) {
      report.is_equilibrium = false;
      report.witnesses.push_back({"equilibrium", id, {}});
      break;
    }
  }
  const auto partition = quantize_clusters(config, tolerance);
  bool groups_ok = true;
  for (const auto& g : partition.groups) {
    double lo = config[g.members.front()];
    double hi = lo;
    for (AgentId m : g.members) {
      lo = std::min(lo, config[m]);
      hi = std::max(hi, config[m]);
    }
    if (!(hi - lo < tolerance) && report.is_equilibrium) {
      // A group wider than the tolerance is still contracting.
      report.is_equilibrium = false;
      report.witnesses.insert(report.witnesses.begin(), {"equilibrium", g.members.front(), g.members});
    }
    if (groups_ok && (!(hi - lo < tolerance) || g.members.size() < min_cluster)) {
      groups_ok = false;
      report.witnesses.push_back({"clustered", g.members.front(), g.members});
    }
  }
  if (report.is_equilibrium && !groups_ok) {
    // Undersized groups only count as a limit when they are far apart;
    // groups a few tolerances apart are still merging.
    for (std::size_t g = 0; g + 1 < partition.groups.size(); ++g) {
      double hi = config[partition.groups[g].members.front()];
      for (AgentId m : partition.groups[g].members) hi = std::max(hi, config[m]);
      double lo = config[partition.groups[g + 1].members.front()];
      for (AgentId m : partition.groups[g + 1].members) lo = std::min(lo, config[m]);
      if (lo - hi < kGroupSeparation * tolerance) {
        report.is_equilibrium = false;
        report.witnesses.insert(report.witnesses.begin(), {"equilibrium", partition.groups[g + 1].members.front(), {}});
        break;
      }
    }
  }
  report.is_clustered = report.is_equilibrium && groups_ok;
  report.is_consensus = report.is_clustered && partition.count() == 1;
  if (report.is_clustered && !report.is_consensus) {
    report.witnesses.push_back({"consensus", partition.groups[1].members.front(), {}});
  }
  return report;
}

EquilibriumReport classify_numerical(const Configuration<double>& config, std::size_t k, double tolerance);

/// Every agent is a fixed point of the bounded-confidence update.
bool is_abc_equilibrium(const Configuration<Rational>& config, const Rational& d);

}  // namespace knnod
