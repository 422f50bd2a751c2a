#include "knnod/random.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace knnod {

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw ParameterError("uniform_index over an empty range");
  const std::uint64_t range = n;
  // 2^64 mod n, computed without 128-bit arithmetic.
  const std::uint64_t excess = (std::numeric_limits<std::uint64_t>::max() % range + 1) % range;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - excess;  // accept w <= limit
  std::uint64_t w = next();
  while (w > limit) w = next();
  return static_cast<std::size_t>(w % range);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Configuration<Rational> random_exact_configuration(Rng& rng, std::size_t n) {
  std::vector<Rational> values;
  values.reserve(n);
  if (rng.coin()) {
    const long top = rng.uniform_int(1, static_cast<long>(std::max<std::size_t>(n, 2)));
    const long den = rng.uniform_int(1, 4);
    for (std::size_t i = 0; i < n; ++i) values.emplace_back(rng.uniform_int(0, top), den);
  } else {
    for (std::size_t i = 0; i < n; ++i) values.emplace_back(rng.uniform_int(-1000, 1000), rng.uniform_int(1, 64));
  }
  return Configuration<Rational>(std::move(values));
}

ClusterLayout random_cluster_layout(Rng& rng, std::size_t n) {
  // Skewed toward few groups so that both outcomes of "all sizes >= k" are common.
  const std::size_t groups = 1 + rng.uniform_index(1 + rng.uniform_index(n));
  // Composition of n into `groups` positive parts via sorted cut points.
  std::set<std::size_t> cuts;
  while (cuts.size() < groups - 1) cuts.insert(1 + rng.uniform_index(n - 1));
  std::vector<std::size_t> sizes;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    sizes.push_back(c - prev);
    prev = c;
  }
  sizes.push_back(n - prev);

  std::set<Rational> used;
  std::vector<Rational> opinions;
  while (opinions.size() < groups) {
    Rational v(rng.uniform_int(-200, 200), rng.uniform_int(1, 8));
    if (used.insert(v).second) opinions.push_back(v);
  }

  std::vector<Rational> values;
  values.reserve(n);
  for (std::size_t g = 0; g < groups; ++g) values.insert(values.end(), sizes[g], opinions[g]);
  // Fisher-Yates with the documented index mapping.
  for (std::size_t i = n; i > 1; --i) std::swap(values[i - 1], values[rng.uniform_index(i)]);
  return {Configuration<Rational>(std::move(values)), std::move(sizes)};
}

}  // namespace knnod
