#pragma once

#include <concepts>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace pulsal {

// Exact time arithmetic. Used by the exact-time algebra paths so identities
// such as 120/43 ms can be asserted with zero tolerance.
using Rational = mpq_class;

template <class T>
concept TimeScalar = std::same_as<T, double> || std::same_as<T, Rational>;

inline double to_double(double x) noexcept { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

/// Parses "8/3", "-2", "0.001", "1e-6" or "2.5E+3" exactly.
Rational parse_rational(std::string_view text);

/// Exact rational holding the decimal value of `x` as printed with 17
/// significant digits; 1e-6 becomes 1/1000000 rather than the binary double.
Rational rational_from_decimal(double x);

std::string to_string(const Rational& x);

}  // namespace pulsal
