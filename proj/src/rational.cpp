#include "unitask/rational.hpp"

#include <charconv>

#include "unitask/error.hpp"

namespace unitask {

namespace {

__extension__ typedef __int128 Wide;

Rational make(Wide num, Wide den) {
  if (den == 0) throw Error(ErrorCode::ConfigError, "division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide a = num < 0 ? -num : num;
  Wide b = den;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  constexpr Wide kMax = INT64_MAX;
  if (num > kMax || num < -kMax || den > kMax) {
    throw Error(ErrorCode::TooLarge, "rational overflow");
  }
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

Rational parse_decimal(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty number");
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.' && !seen_dot) {
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9') throw Error(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
    if (num > (INT64_MAX - 9) / 10 || den > INT64_MAX / 10) {
      throw Error(ErrorCode::TooLarge, "number too long '" + std::string(text) + "'");
    }
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
    seen_digit = true;
  }
  if (!seen_digit) throw Error(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
  return Rational(negative ? -num : num, den);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::ConfigError, "zero denominator");
  Wide n = num;
  Wide d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = static_cast<std::int64_t>(n / g);
  den_ = static_cast<std::int64_t>(d / g);
}

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  return parse_decimal(text.substr(0, slash)) / parse_decimal(text.substr(slash + 1));
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.den_ + Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.den_ - Wide(b.num_) * a.den_, Wide(a.den_) * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.num_, Wide(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  return make(Wide(a.num_) * b.den_, Wide(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const Wide lhs = Wide(a.num_) * b.den_;
  const Wide rhs = Wide(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::int64_t floor_of(const Rational& value) {
  std::int64_t q = value.num() / value.den();
  if (value.num() % value.den() != 0 && value.num() < 0) --q;
  return q;
}

}  // namespace unitask
