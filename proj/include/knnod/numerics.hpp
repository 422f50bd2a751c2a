#pragma once

#include <algorithm>
#include <concepts>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "knnod/error.hpp"
#include "knnod/rational.hpp"

namespace knnod {

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr std::string_view name = "float";
  /// 17 significant digits: enough to round-trip any double.
  static std::string to_text(double v) { return fmt::format("{:.17g}", v); }
  static double from_double(double v) { return v; }
  static double to_double(double v) { return v; }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr std::string_view name = "exact";
  static std::string to_text(const Rational& v) { return v.to_string(); }
  static Rational from_double(double v) { return Rational::from_double(v); }
  static double to_double(const Rational& v) { return v.to_double(); }
};

/// An opinion value: one of the two numeric backends.
template <class S>
concept OpinionScalar = std::totally_ordered<S> && std::copyable<S> && requires(const S& a, const S& b) {
  { a + b } -> std::convertible_to<S>;
  { a - b } -> std::convertible_to<S>;
  { a / b } -> std::convertible_to<S>;
  { ScalarTraits<S>::exact } -> std::convertible_to<bool>;
};

template <class S>
concept ExactScalar = OpinionScalar<S> && ScalarTraits<S>::exact;

template <OpinionScalar S>
S abs_diff(const S& a, const S& b) {
  return a < b ? S(b - a) : S(a - b);
}

/// Arithmetic mean.
///
/// Exact backend: the exact rational mean. Float backend: ref + sum(v - ref)/n,
/// clamped to [min, max] of the inputs. Equal inputs therefore return that
/// value bit-for-bit and the result never leaves the convex hull of the inputs.
template <OpinionScalar S>
S mean_of(std::span<const S> values) {
  if (values.empty()) throw AggregationError();
  if constexpr (ScalarTraits<S>::exact) {
    S sum = values.front();
    for (std::size_t j = 1; j < values.size(); ++j) sum += values[j];
    return sum / S(values.size());
  } else {
    const S ref = values.front();
    S lo = ref;
    S hi = ref;
    S acc = 0;
    for (const S& v : values) {
      acc += v - ref;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return std::clamp(ref + acc / static_cast<S>(values.size()), lo, hi);
  }
}

template <OpinionScalar S>
S mean_of(const std::vector<S>& values) {
  return mean_of(std::span<const S>(values));
}

// Runtime-tagged scalar, used where the backend is only known at run time
// (parsed files, CLI input). Operations reject mixed backends.
using Scalar = std::variant<Rational, double>;

Scalar mean_of(std::span<const Scalar> values);
Scalar abs_diff(const Scalar& a, const Scalar& b);
bool is_exact(const Scalar& v);
std::string to_text(const Scalar& v);

}  // namespace knnod
