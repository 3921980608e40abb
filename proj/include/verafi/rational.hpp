#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace verafi {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Parses an integer or decimal literal ("42", "-3.75") as an exact rational.
// Returns nullopt for anything else (no exponents, no fractions).
std::optional<Rational> parse_number_literal(const std::string& text);

// Renders a rational as a decimal string: exact when the expansion
// terminates, otherwise rounded to `sig_digits` significant digits.
std::string to_decimal_string(const Rational& value, int sig_digits = 12);

}  // namespace verafi
