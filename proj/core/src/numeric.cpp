// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#include "relassess/numeric.hpp"

#include <cctype>

#include "relassess/errors.hpp"

namespace relassess {

namespace mp = boost::multiprecision;

namespace {

mp::cpp_int pow10(int exponent) {
    mp::cpp_int result = 1;
    for (int i = 0; i < exponent; ++i) result *= 10;
    return result;
}

std::string trim_zeros(std::string text) {
    if (text.find('.') == std::string::npos) return text;
    while (!text.empty() && text.back() == '0') text.pop_back();
    if (!text.empty() && text.back() == '.') text.pop_back();
    return text;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
    const std::string original(text);
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
    std::string digits;
    int fraction_digits = 0;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            if (seen_point) ++fraction_digits;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else {
            break;
        }
    }
    if (digits.empty()) throw InvalidInput("not a decimal number: '" + original + "'");
    int exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool exp_negative = false;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) exp_negative = text[i++] == '-';
        std::string exp_digits;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) exp_digits.push_back(text[i++]);
        if (exp_digits.empty() || exp_digits.size() > 4) throw InvalidInput("bad exponent in '" + original + "'");
        exponent = std::stoi(exp_digits) * (exp_negative ? -1 : 1);
    }
    if (i != text.size()) throw InvalidInput("not a decimal number: '" + original + "'");

    // cpp_int reads a leading zero as an octal prefix.
    const auto first = digits.find_first_not_of('0');
    mp::cpp_int mantissa(first == std::string::npos ? std::string("0") : digits.substr(first));
    if (negative) mantissa = -mantissa;
    const int scale = fraction_digits - exponent;
    Rational value = scale >= 0 ? Rational(mantissa, pow10(scale)) : Rational(mantissa * pow10(-scale));
    return Decimal(std::move(value));
}

Decimal Decimal::ratio(std::int64_t numerator, std::int64_t denominator) {
    if (denominator == 0) throw InvalidInput("Decimal::ratio with zero denominator");
    return Decimal(Rational(mp::cpp_int(numerator), mp::cpp_int(denominator)));
}

Decimal operator/(Decimal a, const Decimal& b) {
    if (b.value_ == 0) throw InvalidInput("division by zero");
    a.value_ /= b.value_;
    return a;
}

double Decimal::to_double() const { return value_.convert_to<double>(); }

std::string Decimal::to_fixed(int digits) const {
    const Rational scaled = value_ * Rational(pow10(digits));
    mp::cpp_int n = mp::numerator(scaled);
    const mp::cpp_int d = mp::denominator(scaled);
    const bool negative = n < 0;
    if (negative) n = -n;
    const mp::cpp_int rounded = (2 * n + d) / (2 * d);
    std::string body = rounded.str();
    if (digits > 0) {
        if (body.size() <= static_cast<std::size_t>(digits)) body.insert(0, static_cast<std::size_t>(digits) - body.size() + 1, '0');
        body.insert(body.size() - static_cast<std::size_t>(digits), ".");
    }
    return (negative && rounded != 0 ? "-" : "") + body;
}

std::string Decimal::to_string(int max_digits) const {
    for (int k = 0; k <= max_digits; ++k) {
        if (mp::denominator(value_ * Rational(pow10(k))) == 1) return to_fixed(k);
    }
    return trim_zeros(to_fixed(max_digits));
}

std::string Fraction::percent(int digits) const {
    if (denominator == 0) return "n/a";
    return (Decimal::ratio(numerator, denominator) * Decimal(100)).to_fixed(digits);
}

}  // namespace relassess
