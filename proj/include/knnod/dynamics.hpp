#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "knnod/configuration.hpp"

namespace knnod {

/// N_i: the agents agent `agent` listens to when it updates.
///
/// For the k-NN rule `members` is ordered by (distance to the agent, id), so
/// members.front() is the closest. For the bounded-confidence rule it is in
/// ascending id order.
struct NeighborSet {
  AgentId agent;
  std::vector<AgentId> members;

  bool contains(AgentId id) const { return std::find(members.begin(), members.end(), id) != members.end(); }

  std::vector<AgentId> sorted_members() const {
    std::vector<AgentId> out = members;
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Set equality, ignoring order.
  bool same_members(const NeighborSet& other) const { return sorted_members() == other.sorted_members(); }
};

inline void check_neighborhood_size(std::size_t n, std::size_t k) {
  if (k < 1 || k > n) {
    throw ParameterError("k=" + std::to_string(k) + " must satisfy 1 <= k <= n=" + std::to_string(n));
  }
}

/// The first k agents in the order (|x_j - x_i|, j). Agent i is not forced in:
/// with k zero-distance agents of lower index it is left out.
template <OpinionScalar S>
NeighborSet knn_neighbors(const Configuration<S>& config, AgentId i, std::size_t k) {
  const std::size_t n = config.size();
  check_neighborhood_size(n, k);
  config.check_agent(i);

  const S& xi = config[i];
  std::vector<S> distance;
  distance.reserve(n);
  for (const S& xj : config.opinions()) distance.push_back(abs_diff(xj, xi));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&distance](std::size_t a, std::size_t b) {
                      if (distance[a] < distance[b]) return true;
                      if (distance[b] < distance[a]) return false;
                      return a < b;
                    });

  NeighborSet out{i, {}};
  out.members.reserve(k);
  for (std::size_t r = 0; r < k; ++r) out.members.push_back(AgentId::from_index(order[r]));
  return out;
}

template <OpinionScalar S>
S mean_over(const Configuration<S>& config, const std::vector<AgentId>& members) {
  std::vector<S> values;
  values.reserve(members.size());
  for (AgentId j : members) values.push_back(config[j]);
  return mean_of(values);
}

/// The opinion agent i would adopt under the k-NN rule.
template <OpinionScalar S>
S knn_updated_opinion(const Configuration<S>& config, AgentId i, std::size_t k) {
  return mean_over(config, knn_neighbors(config, i, k).members);
}

/// f(x, i): agent i moves to the mean of its k nearest opinions, every other
/// entry is copied unchanged.
template <OpinionScalar S>
Configuration<S> knn_update(const Configuration<S>& config, AgentId i, std::size_t k) {
  return config.with_opinion(i, knn_updated_opinion(config, i, k));
}

/// {j : |x_j - x_i| <= d}; always contains i.
template <OpinionScalar S>
NeighborSet abc_neighbors(const Configuration<S>& config, AgentId i, const S& d) {
  config.check_agent(i);
  if (d < S(0)) throw ParameterError("confidence range d must be >= 0");
  NeighborSet out{i, {}};
  const S& xi = config[i];
  for (std::size_t j = 0; j < config.size(); ++j) {
    if (!(d < abs_diff(config.opinions()[j], xi))) out.members.push_back(AgentId::from_index(j));
  }
  return out;
}

template <OpinionScalar S>
S abc_updated_opinion(const Configuration<S>& config, AgentId i, const S& d) {
  return mean_over(config, abc_neighbors(config, i, d).members);
}

/// f_ABC(x, i): agent i moves to the mean of all opinions within distance d.
template <OpinionScalar S>
Configuration<S> abc_update(const Configuration<S>& config, AgentId i, const S& d) {
  return config.with_opinion(i, abc_updated_opinion(config, i, d));
}

/// Pluggable update map x -> f(x, i). The property verifiers take one so that
/// they can be run against a deliberately broken rule.
template <OpinionScalar S>
using UpdateRule = std::function<Configuration<S>(const Configuration<S>&, AgentId, std::size_t)>;

template <OpinionScalar S>
UpdateRule<S> knn_rule() {
  return [](const Configuration<S>& x, AgentId i, std::size_t k) { return knn_update(x, i, k); };
}

/// G(x): out-neighborhood of each agent is its k-NN set.
struct InteractionGraph {
  std::size_t n = 0;
  std::vector<NeighborSet> out;  // out[i-1] = N_i

  bool has_edge(AgentId from, AgentId to) const { return out.at(from.index()).contains(to); }

  /// Directed edges (i, j), sorted.
  std::vector<std::pair<AgentId, AgentId>> edges() const {
    std::vector<std::pair<AgentId, AgentId>> e;
    for (const NeighborSet& ns : out) {
      for (AgentId j : ns.sorted_members()) e.emplace_back(ns.agent, j);
    }
    return e;
  }

  /// "i j" per line, 1-based.
  std::string to_edge_list() const {
    std::string text;
    for (const auto& [i, j] : edges()) text += std::to_string(i.value) + " " + std::to_string(j.value) + "\n";
    return text;
  }
};

template <OpinionScalar S>
InteractionGraph interaction_graph(const Configuration<S>& config, std::size_t k) {
  check_neighborhood_size(config.size(), k);
  InteractionGraph g;
  g.n = config.size();
  g.out.reserve(g.n);
  for (std::size_t i = 0; i < g.n; ++i) g.out.push_back(knn_neighbors(config, AgentId::from_index(i), k));
  return g;
}

}  // namespace knnod
