#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "knnod/configuration.hpp"

namespace knnod {

/// Seeded generator with a fixed, documented output mapping.
///
/// Bits come from std::mt19937_64, whose sequence is pinned by the C++
/// standard. The mappings to agents and to [0, 1) are done here rather than
/// with std::uniform_*_distribution (implementation-defined), so a seed gives
/// the same run on every platform:
///   uniform_index(n): draw w; reject while w >= 2^64 - (2^64 mod n); return w mod n.
///   uniform01():      (w >> 11) * 2^-53.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+rejection/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on {0, ..., n-1}; n >= 1.
  std::size_t uniform_index(std::size_t n);

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on [lo, hi].
  long uniform_int(long lo, long hi) { return lo + static_cast<long>(uniform_index(static_cast<std::size_t>(hi - lo) + 1)); }

  bool coin() { return (next() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 mix of (base, stream): independent child seeds for sub-streams
/// (initial opinions, update schedule, event opinions, replicate runs).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Random exact configuration of size n. Half of the draws use a coarse grid
/// so that distance ties (and the lower-index rule) are exercised often.
Configuration<Rational> random_exact_configuration(Rng& rng, std::size_t n);

/// A configuration together with the same-opinion layout it was built from.
struct ClusterLayout {
  Configuration<Rational> config;
  std::vector<std::size_t> sizes;  // one entry per distinct opinion
};

/// Random partition of n agents into groups with distinct exact opinions,
/// agents shuffled across groups.
ClusterLayout random_cluster_layout(Rng& rng, std::size_t n);

}  // namespace knnod
