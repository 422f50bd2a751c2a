#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "knnod/error.hpp"
#include "knnod/numerics.hpp"

namespace knnod {

/// 1-based agent identifier, matching the indexing used in every file format.
struct AgentId {
  std::size_t value = 0;

  constexpr std::size_t index() const noexcept { return value - 1; }
  static constexpr AgentId from_index(std::size_t index) noexcept { return AgentId{index + 1}; }

  constexpr auto operator<=>(const AgentId&) const = default;
};

/// Opinion vector x = (x_1, ..., x_n), all entries on one backend.
template <OpinionScalar S>
class Configuration {
 public:
  using scalar_type = S;

  Configuration() = default;
  explicit Configuration(std::vector<S> opinions) : opinions_(std::move(opinions)) {}
  Configuration(std::initializer_list<S> opinions) : opinions_(opinions) {}

  std::size_t size() const noexcept { return opinions_.size(); }
  bool empty() const noexcept { return opinions_.empty(); }

  const S& operator[](AgentId id) const { return opinions_[id.index()]; }

  const S& at(AgentId id) const {
    check_agent(id);
    return opinions_[id.index()];
  }

  std::span<const S> opinions() const noexcept { return opinions_; }

  void check_agent(AgentId id) const {
    if (id.value < 1 || id.value > opinions_.size()) {
      throw ParameterError("agent id " + std::to_string(id.value) + " outside 1.." +
                           std::to_string(opinions_.size()));
    }
  }

  Configuration with_opinion(AgentId id, S value) const {
    check_agent(id);
    Configuration out = *this;
    out.opinions_[id.index()] = std::move(value);
    return out;
  }

  /// [x; value]: the new agent gets id n+1.
  Configuration appended(S value) const {
    Configuration out = *this;
    out.opinions_.push_back(std::move(value));
    return out;
  }

  Configuration without(AgentId id) const {
    check_agent(id);
    Configuration out = *this;
    out.opinions_.erase(out.opinions_.begin() + static_cast<std::ptrdiff_t>(id.index()));
    return out;
  }

  Configuration negated() const {
    Configuration out = *this;
    for (S& v : out.opinions_) v = S(0) - v;
    return out;
  }

  const S& min() const { return *std::min_element(opinions_.begin(), opinions_.end()); }
  const S& max() const { return *std::max_element(opinions_.begin(), opinions_.end()); }

  bool operator==(const Configuration&) const = default;

 private:
  std::vector<S> opinions_;
};

/// max_i x_i - min_i x_i; zero iff consensus.
template <OpinionScalar S>
S diameter(const Configuration<S>& config) {
  if (config.empty()) throw ParameterError("diameter of an empty configuration");
  const auto [lo, hi] = std::minmax_element(config.opinions().begin(), config.opinions().end());
  return *hi - *lo;
}

template <OpinionScalar S>
bool is_consensus(const Configuration<S>& config) {
  const auto ops = config.opinions();
  return std::all_of(ops.begin(), ops.end(), [&](const S& v) { return v == ops.front(); });
}

/// Lossless: every double is a dyadic rational.
inline Configuration<Rational> to_exact(const Configuration<double>& config) {
  std::vector<Rational> out;
  out.reserve(config.size());
  for (double v : config.opinions()) out.push_back(Rational::from_double(v));
  return Configuration<Rational>(std::move(out));
}

inline Configuration<double> to_float(const Configuration<Rational>& config) {
  std::vector<double> out;
  out.reserve(config.size());
  for (const Rational& v : config.opinions()) out.push_back(v.to_double());
  return Configuration<double>(std::move(out));
}

using AnyConfiguration = std::variant<Configuration<Rational>, Configuration<double>>;

}  // namespace knnod
