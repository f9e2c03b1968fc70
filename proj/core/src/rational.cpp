#include "pulsal/rational.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "pulsal/error.hpp"

namespace pulsal {

namespace {

Rational pow10(long exponent) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  if (exponent >= 0) {
    return Rational(p);
  }
  Rational r(mpz_class(1), p);
  r.canonicalize();
  return r;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw ParseError("empty rational literal");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_rational(text.substr(0, slash));
    Rational den = parse_rational(text.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_part = text.substr(e + 1);
    auto [ptr, ec] = std::from_chars(exp_part.data() + (exp_part.starts_with('+') ? 1 : 0),
                                     exp_part.data() + exp_part.size(), exponent);
    if (ec != std::errc{} || ptr != exp_part.data() + exp_part.size()) {
      throw ParseError("bad exponent in '" + std::string(text) + "'");
    }
    text = text.substr(0, e);
  }

  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty())) {
      throw ParseError("bad decimal literal '" + std::string(text) + "'");
    }
    digits = std::string(whole) + std::string(frac);
    exponent -= static_cast<long>(frac.size());
  } else {
    if (!all_digits(text)) throw ParseError("bad rational literal '" + std::string(text) + "'");
    digits = std::string(text);
  }

  Rational value(mpz_class(digits, 10));
  value *= pow10(exponent);
  value.canonicalize();
  return negative ? Rational(-value) : value;
}

Rational rational_from_decimal(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // %.17g round-trips but may print 1.0000000000000001e-06; trim to the
  // shortest representation that still round-trips.
  for (int precision = 1; precision <= 17; ++precision) {
    char shorter[64];
    std::snprintf(shorter, sizeof shorter, "%.*g", precision, x);
    if (std::strtod(shorter, nullptr) == x) {
      return parse_rational(shorter);
    }
  }
  return parse_rational(buf);
}

std::string to_string(const Rational& x) { return x.get_str(); }

}  // namespace pulsal
