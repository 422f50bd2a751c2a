#pragma once

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>

namespace knnod {

/// Arbitrary-precision rational number.
///
/// Always held in canonical form: numerator and denominator coprime, denominator
/// positive. Two values compare equal iff they denote the same rational, no
/// matter how they were computed.
class Rational {
 public:
  Rational() = default;

  template <std::integral I>
  Rational(I value) {  // NOLINT(google-explicit-constructor)
    if constexpr (std::is_signed_v<I>) {
      q_ = static_cast<long>(value);
    } else {
      q_ = static_cast<unsigned long>(value);
    }
  }

  Rational(long numerator, long denominator);

  explicit Rational(mpq_class q);

  /// Exact conversion: every finite double is a dyadic rational.
  static Rational from_double(double value);

  /// Accepts "p/q", "p", and plain decimals such as "-0.125" (converted exactly).
  static Rational parse(std::string_view text);

  /// "p/q", or "p" when the denominator is 1.
  std::string to_string() const;
  double to_double() const;

  const mpq_class& value() const noexcept { return q_; }
  std::string numerator() const { return q_.get_num().get_str(); }
  std::string denominator() const { return q_.get_den().get_str(); }
  /// Bit length of the denominator; tracks growth under repeated averaging.
  std::size_t denominator_bits() const;

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  Rational operator-() const;

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

 private:
  mpq_class q_;
};

Rational abs(const Rational& r);

}  // namespace knnod
