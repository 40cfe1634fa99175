#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

#include "permfree/errors.hpp"

namespace permfree {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt big_pow(const BigInt& base, unsigned exp) {
    BigInt acc = 1;
    BigInt b = base;
    while (exp) {
        if (exp & 1u) acc *= b;
        b *= b;
        exp >>= 1u;
    }
    return acc;
}

inline Rational rat_pow(const Rational& base, unsigned exp) {
    return Rational(big_pow(numerator(base), exp), big_pow(denominator(base), exp));
}

inline BigInt factorial(unsigned n) {
    BigInt acc = 1;
    for (unsigned k = 2; k <= n; ++k) acc *= k;
    return acc;
}

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }

/// "num/den" with the denominator always spelled out ("2/1", "-3/4").
inline std::string to_fraction_string(const Rational& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

/// Exact rational from a decimal literal such as "2", "-0.5" or "1.25".
inline Rational rational_from_decimal(const std::string& text) {
    if (text.empty()) throw ValidationError("empty decimal literal");
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    BigInt num = 0;
    BigInt den = 1;
    bool any_digit = false;
    bool seen_dot = false;
    for (; pos < text.size(); ++pos) {
        char ch = text[pos];
        if (ch == '.') {
            if (seen_dot) throw ValidationError("malformed decimal literal '" + text + "'");
            seen_dot = true;
        } else if (ch >= '0' && ch <= '9') {
            num = num * 10 + (ch - '0');
            if (seen_dot) den *= 10;
            any_digit = true;
        } else {
            throw ValidationError("malformed decimal literal '" + text + "'");
        }
    }
    if (!any_digit) throw ValidationError("malformed decimal literal '" + text + "'");
    if (negative) num = -num;
    return Rational(num, den);
}

}  // namespace permfree
