#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairdiv {

/// Arbitrary-precision exact rational. Always stored in lowest terms with a
/// positive denominator; every quantity in the engine is one of these (floats
/// appear only in Monte-Carlo summary statistics).
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses "p" or "p/q" with optional sign on p and q > 0.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&](const char* why) {
        throw ParseError("bad rational '" + std::string(text) + "': " + why);
    };
    if (text.empty()) fail("empty");
    std::size_t i = 0;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
        negative = text[i] == '-';
        ++i;
    }
    if (i == text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
        fail("expected digits");
    Integer num = 0;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i)
        num = num * 10 + (text[i] - '0');
    Integer den = 1;
    if (i < text.size()) {
        if (text[i] != '/') fail("unexpected character");
        ++i;
        if (i == text.size() || !std::isdigit(static_cast<unsigned char>(text[i])))
            fail("expected denominator digits");
        den = 0;
        for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i)
            den = den * 10 + (text[i] - '0');
        if (den == 0) fail("zero denominator");
    }
    if (i != text.size()) fail("trailing characters");
    if (negative) num = -num;
    return Rational(num, den);
}

/// Formats as "p" for integers and "p/q" otherwise; inverse of parse_rational.
inline std::string to_string(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) {
        s += '/';
        s += denominator(r).str();
    }
    return s;
}

/// n-th harmonic number, exactly. harmonic(0) == 0.
inline Rational harmonic(int n) {
    Rational h = 0;
    for (int k = 1; k <= n; ++k) h += Rational(1, k);
    return h;
}

}  // namespace fairdiv
