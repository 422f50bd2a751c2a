#include "knnod/numerics.hpp"

namespace knnod {

namespace {

template <class S>
std::vector<S> unwrap_all(std::span<const Scalar> values) {
  std::vector<S> out;
  out.reserve(values.size());
  for (const Scalar& v : values) {
    const S* p = std::get_if<S>(&v);
    if (p == nullptr) throw BackendError("mixed backends in aggregation");
    out.push_back(*p);
  }
  return out;
}

}  // namespace

Scalar mean_of(std::span<const Scalar> values) {
  if (values.empty()) throw AggregationError();
  if (is_exact(values.front())) return mean_of(unwrap_all<Rational>(values));
  return mean_of(unwrap_all<double>(values));
}

Scalar abs_diff(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index()) throw BackendError("abs_diff on mixed backends");
  return std::visit(
      [&b](const auto& lhs) -> Scalar {
        using S = std::decay_t<decltype(lhs)>;
        return abs_diff(lhs, std::get<S>(b));
      },
      a);
}

bool is_exact(const Scalar& v) { return std::holds_alternative<Rational>(v); }

std::string to_text(const Scalar& v) {
  return std::visit([](const auto& x) { return ScalarTraits<std::decay_t<decltype(x)>>::to_text(x); }, v);
}

}  // namespace knnod
