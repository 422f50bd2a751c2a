#include "knnod/rational.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "knnod/error.hpp"

namespace knnod {

namespace {

bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s, std::string_view whole) {
  if (!is_integer_text(s)) {
    throw ParseError("invalid rational literal '" + std::string(whole) + "'");
  }
  std::string digits(s[0] == '+' ? s.substr(1) : s);
  return mpz_class(digits, 10);
}

}  // namespace

Rational::Rational(long numerator, long denominator) {
  if (denominator == 0) throw ParseError("rational with zero denominator");
  q_ = mpq_class(numerator, denominator);
  q_.canonicalize();
}

Rational::Rational(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw ParseError("non-finite value cannot be made exact");
  return Rational(mpq_class(value));
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(text.substr(0, slash), text);
    mpz_class den = parse_integer(text.substr(slash + 1), text);
    if (den == 0) throw ParseError("rational with zero denominator: '" + std::string(text) + "'");
    mpq_class q(num, den);
    q.canonicalize();
    return Rational(std::move(q));
  }

  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    bool negative = !int_part.empty() && int_part[0] == '-';
    if (!int_part.empty() && (int_part[0] == '-' || int_part[0] == '+')) int_part.remove_prefix(1);
    if ((int_part.empty() && frac_part.empty()) ||
        (!int_part.empty() && !is_integer_text(int_part)) ||
        (!frac_part.empty() && !is_integer_text(frac_part)) ||
        (!frac_part.empty() && !std::isdigit(static_cast<unsigned char>(frac_part[0])))) {
      throw ParseError("invalid rational literal '" + std::string(text) + "'");
    }
    mpz_class whole = int_part.empty() ? mpz_class(0) : mpz_class(std::string(int_part), 10);
    mpz_class frac = frac_part.empty() ? mpz_class(0) : mpz_class(std::string(frac_part), 10);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_part.size());
    mpq_class q(whole * scale + frac, scale);
    q.canonicalize();
    if (negative) q = -q;
    return Rational(std::move(q));
  }

  return Rational(mpq_class(parse_integer(text, text)));
}

std::string Rational::to_string() const {
  if (q_.get_den() == 1) return q_.get_num().get_str();
  return q_.get_num().get_str() + "/" + q_.get_den().get_str();
}

double Rational::to_double() const { return q_.get_d(); }

std::size_t Rational::denominator_bits() const { return mpz_sizeinbase(q_.get_den_mpz_t(), 2); }

Rational& Rational::operator+=(const Rational& rhs) {
  q_ += rhs.q_;
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
  q_ -= rhs.q_;
  return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
  q_ *= rhs.q_;
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (sgn(rhs.q_) == 0) throw std::domain_error("rational division by zero");
  q_ /= rhs.q_;
  return *this;
}

Rational Rational::operator-() const { return Rational(mpq_class(-q_)); }

Rational abs(const Rational& r) { return Rational(mpq_class(::abs(r.value()))); }

}  // namespace knnod
