#include "verafi/rational.hpp"

#include <algorithm>
#include <cctype>

namespace verafi {

std::optional<Rational> parse_number_literal(const std::string& text) {
    if (text.empty()) return std::nullopt;
    size_t pos = 0;
    bool negative = false;
    if (text[pos] == '-' || text[pos] == '+') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string int_part, frac_part;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        int_part.push_back(text[pos++]);
    }
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
            frac_part.push_back(text[pos++]);
        }
    }
    if (pos != text.size()) return std::nullopt;
    if (int_part.empty() && frac_part.empty()) return std::nullopt;

    BigInt numer = int_part.empty() ? BigInt(0) : BigInt(int_part);
    BigInt denom = 1;
    for (char c : frac_part) {
        numer = numer * 10 + (c - '0');
        denom *= 10;
    }
    Rational r(numer, denom);
    if (negative) r = -r;
    return r;
}

namespace {

// True iff p/q has a terminating decimal expansion (q reduced has only 2/5 factors).
bool terminating(const Rational& value) {
    BigInt d = boost::multiprecision::denominator(value);
    while (d % 2 == 0) d /= 2;
    while (d % 5 == 0) d /= 5;
    return d == 1;
}

}  // namespace

std::string to_decimal_string(const Rational& value, int sig_digits) {
    if (value == 0) return "0";
    bool negative = value < 0;
    BigInt n = boost::multiprecision::abs(boost::multiprecision::numerator(value));
    BigInt d = boost::multiprecision::denominator(value);

    BigInt ipart = n / d;
    BigInt rem = n % d;
    std::string prefix = negative ? "-" : "";

    if (rem == 0) return prefix + ipart.str();

    if (terminating(value)) {
        std::string frac;
        while (rem != 0) {
            rem *= 10;
            frac.push_back(static_cast<char>('0' + static_cast<int>(rem / d)));
            rem %= d;
        }
        return prefix + ipart.str() + "." + frac;
    }

    // Non-terminating: round to sig_digits significant digits.
    std::string int_str = ipart == 0 ? "" : ipart.str();
    std::string digits = int_str;
    int leading_zeros = 0;  // zeros between the point and the first significant digit
    bool counting = !int_str.empty();
    int significant = static_cast<int>(int_str.size());
    int frac_len = 0;
    int round_digit = 0;
    while (true) {
        rem *= 10;
        int digit = static_cast<int>(rem / d);
        rem %= d;
        if (!counting && digit == 0 && significant == 0) {
            ++leading_zeros;
            ++frac_len;
            continue;
        }
        counting = true;
        if (significant == sig_digits) {
            round_digit = digit;
            break;
        }
        digits.push_back(static_cast<char>('0' + digit));
        ++significant;
        ++frac_len;
        if (rem == 0 && significant == sig_digits) {
            round_digit = 0;
            break;
        }
    }
    if (round_digit >= 5) {
        int i = static_cast<int>(digits.size()) - 1;
        for (; i >= 0; --i) {
            if (digits[i] == '9') {
                digits[i] = '0';
            } else {
                ++digits[i];
                break;
            }
        }
        if (i < 0) {
            // Carry rippled past the most significant digit (e.g. 0.0999 -> 0.100,
            // 99.97 -> 100.0). The new leading '1' either consumes one of the
            // zeros after the point or extends the integer part by one digit.
            digits.insert(digits.begin(), '1');
            if (leading_zeros > 0) {
                --leading_zeros;
                ++frac_len;
            }
        }
    }
    int int_len = static_cast<int>(digits.size()) - frac_len;
    std::string result = prefix;
    if (int_len <= 0) {
        result += "0.";
        result.append(static_cast<size_t>(leading_zeros), '0');
        result += digits;
    } else {
        result += digits.substr(0, static_cast<size_t>(int_len));
        if (frac_len > 0) {
            result += ".";
            result += digits.substr(static_cast<size_t>(int_len));
        }
    }
    return result;
}

}  // namespace verafi
