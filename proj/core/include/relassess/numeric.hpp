// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace relassess {

// Exact decimal quantity (currency amounts, prices, multipliers). Backed by
// an arbitrary-precision rational so sums over any number of calls never
// accumulate rounding error; rounding happens only when rendering.
class Decimal {
  public:
    using Rational = boost::multiprecision::cpp_rational;

    Decimal() = default;
    explicit Decimal(std::int64_t integer) : value_(integer) {}

    // Accepts "12", "-0.005", "1.5e-3". Throws InvalidInput otherwise.
    static Decimal parse(std::string_view text);
    static Decimal ratio(std::int64_t numerator, std::int64_t denominator);

    Decimal& operator+=(const Decimal& other) {
        value_ += other.value_;
        return *this;
    }
    friend Decimal operator+(Decimal a, const Decimal& b) { return a += b; }
    friend Decimal operator-(Decimal a, const Decimal& b) {
        a.value_ -= b.value_;
        return a;
    }
    friend Decimal operator*(Decimal a, const Decimal& b) {
        a.value_ *= b.value_;
        return a;
    }
    friend Decimal operator/(Decimal a, const Decimal& b);

    friend bool operator==(const Decimal& a, const Decimal& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
        if (a.value_ < b.value_) return std::strong_ordering::less;
        if (a.value_ > b.value_) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    [[nodiscard]] bool is_zero() const { return value_ == 0; }
    [[nodiscard]] bool is_negative() const { return value_ < 0; }
    [[nodiscard]] double to_double() const;

    // Exact plain-decimal rendering when the value terminates within
    // `max_digits` fractional digits; otherwise rounded half away from zero.
    // Trailing zeros are trimmed ("0.02", "3").
    [[nodiscard]] std::string to_string(int max_digits = 18) const;
    // Always exactly `digits` fractional digits, rounded half away from zero.
    [[nodiscard]] std::string to_fixed(int digits) const;

    [[nodiscard]] const Rational& rational() const { return value_; }

  private:
    explicit Decimal(Rational value) : value_(std::move(value)) {}
    Rational value_{0};
};

// Exact fraction of counts (agreement rates, fault shares). Denominator zero
// is representable but meaningless; producers never hand one out.
struct Fraction {
    std::int64_t numerator = 0;
    std::int64_t denominator = 1;

    [[nodiscard]] double value() const {
        return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
    }
    [[nodiscard]] Decimal exact() const { return Decimal::ratio(numerator, denominator); }
    // Percentage with one decimal, e.g. "65.6".
    [[nodiscard]] std::string percent(int digits = 1) const;

    // Value equality (2/4 == 1/2).
    friend bool operator==(const Fraction& a, const Fraction& b) {
        return static_cast<__int128>(a.numerator) * b.denominator == static_cast<__int128>(b.numerator) * a.denominator;
    }
    friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
        const __int128 lhs = static_cast<__int128>(a.numerator) * b.denominator;
        const __int128 rhs = static_cast<__int128>(b.numerator) * a.denominator;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
};

}  // namespace relassess
