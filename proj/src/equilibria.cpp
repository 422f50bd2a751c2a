#include "knnod/equilibria.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace knnod {

ClusterPartition<Rational> partition_clusters(const Configuration<Rational>& config) {
  std::map<Rational, std::vector<AgentId>> by_opinion;
  for (std::size_t i = 0; i < config.size(); ++i) {
    by_opinion[config.opinions()[i]].push_back(AgentId::from_index(i));
  }
  ClusterPartition<Rational> out;
  out.groups.reserve(by_opinion.size());
  for (auto& [opinion, members] : by_opinion) out.groups.push_back({opinion, std::move(members)});
  return out;
}

ClusterPartition<Rational> partition_clusters(const AnyConfiguration& config) {
  if (const auto* exact = std::get_if<Configuration<Rational>>(&config)) return partition_clusters(*exact);
  throw BackendError("partition_clusters needs exact opinions; use quantize_clusters for float configurations");
}

EquilibriumReport classify(const Configuration<Rational>& config, std::size_t k) {
  check_neighborhood_size(config.size(), k);
  EquilibriumReport report;
  report.is_equilibrium = true;
  bool homogeneous = true;

  for (std::size_t i = 0; i < config.size(); ++i) {
    const AgentId id = AgentId::from_index(i);
    const NeighborSet ns = knn_neighbors(config, id, k);
    if (report.is_equilibrium && mean_over(config, ns.members) != config[id]) {
      report.is_equilibrium = false;
      report.witnesses.push_back({"equilibrium", id, ns.members});
    }
    if (homogeneous) {
      const bool same = std::all_of(ns.members.begin(), ns.members.end(),
                                    [&](AgentId j) { return config[j] == config[id]; });
      if (!same) {
        homogeneous = false;
        report.witnesses.push_back({"clustered", id, ns.members});
      }
    }
  }

  report.is_clustered = homogeneous;
  if (homogeneous != clustered_by_cluster_sizes(config, k)) {
    throw std::logic_error("cluster-size characterization disagrees with neighbor homogeneity");
  }
  report.is_consensus = report.is_clustered && is_consensus(config);
  if (!is_consensus(config)) {
    for (std::size_t i = 1; i < config.size(); ++i) {
      if (config.opinions()[i] != config.opinions()[0]) {
        report.witnesses.push_back({"consensus", AgentId::from_index(i), {}});
        break;
      }
    }
  }
  return report;
}

EquilibriumReport classify(const AnyConfiguration& config, std::size_t k, double tolerance) {
  if (const auto* exact = std::get_if<Configuration<Rational>>(&config)) return classify(*exact, k);
  return classify_numerical(std::get<Configuration<double>>(config), k, tolerance);
}

bool is_equilibrium(const Configuration<Rational>& config, std::size_t k) {
  check_neighborhood_size(config.size(), k);
  for (std::size_t i = 0; i < config.size(); ++i) {
    const AgentId id = AgentId::from_index(i);
    if (knn_update(config, id, k) != config) return false;
  }
  return true;
}

bool clustered_by_neighbors(const Configuration<Rational>& config, std::size_t k) {
  check_neighborhood_size(config.size(), k);
  for (std::size_t i = 0; i < config.size(); ++i) {
    const AgentId id = AgentId::from_index(i);
    for (AgentId j : knn_neighbors(config, id, k).members) {
      if (config[j] != config[id]) return false;
    }
  }
  return true;
}

bool clustered_by_cluster_sizes(const Configuration<Rational>& config, std::size_t k) {
  return partition_clusters(config).min_size() >= k;
}

bool is_clustered(const Configuration<Rational>& config, std::size_t k) {
  const bool by_neighbors = clustered_by_neighbors(config, k);
  if (by_neighbors != clustered_by_cluster_sizes(config, k)) {
    throw std::logic_error("cluster-size characterization disagrees with neighbor homogeneity");
  }
  return by_neighbors;
}

std::size_t max_cluster_count(std::size_t n, std::size_t k) {
  check_neighborhood_size(n, k);
  return n / k;
}

namespace {

void require_ordered(const Rational& alpha, const Rational& beta) {
  if (!(alpha < beta)) throw ParameterError("construction requires alpha < beta");
}

void require_nonclustered_equilibrium(const Configuration<Rational>& x, std::size_t k, const char* what) {
  if (!is_equilibrium(x, k) || is_clustered(x, k)) {
    throw std::logic_error(std::string(what) + ": construction is not a non-clustered equilibrium");
  }
}

}  // namespace

Configuration<Rational> build_tie_counterexample(const Rational& alpha, const Rational& beta) {
  require_ordered(alpha, beta);
  Configuration<Rational> x{alpha, beta, alpha, beta, alpha, beta, (alpha + beta) / Rational(2)};
  require_nonclustered_equilibrium(x, 3, "tie counterexample");
  return x;
}

Configuration<Rational> build_example1(const Rational& alpha, const Rational& beta) {
  require_ordered(alpha, beta);
  const Rational low_mid = (Rational(3) * alpha + Rational(2) * beta) / Rational(5);
  const Rational high_mid = (Rational(2) * alpha + Rational(3) * beta) / Rational(5);
  const std::vector<std::size_t> sizes{11, 2, 2, 5};
  const std::vector<Rational> opinions{alpha, low_mid, high_mid, beta};
  Configuration<Rational> x = build_clustered(sizes, opinions);
  require_nonclustered_equilibrium(x, 5, "example 1");
  return x;
}

Configuration<Rational> build_clustered(std::span<const std::size_t> sizes, std::span<const Rational> opinions) {
  if (sizes.size() != opinions.size()) throw ParameterError("one opinion per cluster size required");
  std::vector<Rational> values;
  for (std::size_t g = 0; g < sizes.size(); ++g) values.insert(values.end(), sizes[g], opinions[g]);
  return Configuration<Rational>(std::move(values));
}

Configuration<Rational> build_max_clustered(std::size_t n, std::size_t k) {
  const std::size_t groups = max_cluster_count(n, k);
  std::vector<std::size_t> sizes(groups, k);
  sizes.back() += n - groups * k;
  std::vector<Rational> opinions;
  for (std::size_t g = 0; g < groups; ++g) opinions.emplace_back(g);
  return build_clustered(sizes, opinions);
}

ClusterPartition<double> quantize_clusters(const Configuration<double>& config, double tolerance) {
  if (!(tolerance > 0)) throw ParameterError("quantize_clusters tolerance must be > 0");
  std::vector<std::size_t> order(config.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto ops = config.opinions();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ops[a] < ops[b]; });

  ClusterPartition<double> out;
  std::vector<std::vector<AgentId>> members;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (r == 0 || ops[order[r]] - ops[order[r - 1]] > tolerance) members.emplace_back();
    members.back().push_back(AgentId::from_index(order[r]));
  }
  for (auto& group : members) {
    std::sort(group.begin(), group.end());
    std::vector<double> values;
    for (AgentId m : group) values.push_back(config[m]);
    out.groups.push_back({mean_of(values), std::move(group)});
  }
  return out;
}

EquilibriumReport classify_numerical(const Configuration<double>& config, std::size_t k, double tolerance) {
  check_neighborhood_size(config.size(), k);
  return classify_numerical_with(config, k, tolerance,
                                 [&](AgentId i) { return knn_updated_opinion(config, i, k); });
}

bool is_abc_equilibrium(const Configuration<Rational>& config, const Rational& d) {
  for (std::size_t i = 0; i < config.size(); ++i) {
    const AgentId id = AgentId::from_index(i);
    if (abc_updated_opinion(config, id, d) != config[id]) return false;
  }
  return true;
}

}  // namespace knnod
