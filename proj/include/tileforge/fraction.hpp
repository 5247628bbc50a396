#pragma once

#include <cstdint>
#include <compare>
#include <iosfwd>
#include <string>

namespace tileforge {

/// Exact rational with 64-bit numerator and positive denominator, always in
/// lowest terms. Arithmetic goes through 128-bit intermediates and throws
/// Error(overflow) when the reduced result does not fit.
class Fraction {
public:
    constexpr Fraction() = default;
    Fraction(std::int64_t num, std::int64_t den = 1);

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }

    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::int64_t floor() const noexcept;
    bool is_integer() const noexcept { return den_ == 1; }

    Fraction operator-() const;
    friend Fraction operator+(const Fraction& a, const Fraction& b);
    friend Fraction operator-(const Fraction& a, const Fraction& b);
    friend Fraction operator*(const Fraction& a, const Fraction& b);
    friend Fraction operator/(const Fraction& a, const Fraction& b);
    Fraction& operator+=(const Fraction& o) { return *this = *this + o; }
    Fraction& operator*=(const Fraction& o) { return *this = *this * o; }

    friend bool operator==(const Fraction&, const Fraction&) = default;
    friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b);

    std::string str() const;

private:
    static Fraction from_wide(__int128 num, __int128 den);

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Fraction& f);

/// Exact value of the form factor * sqrt(radicand) with rational factor and
/// nonnegative rational radicand. Used for inner products of functions whose
/// coefficients are square roots of rationals.
struct QuadraticSurd {
    Fraction factor{0};
    Fraction radicand{1};

    /// Rewrites the value as a pure rational when the radicand is a perfect
    /// square (or the factor is zero).
    QuadraticSurd normalized() const;
    bool is_rational() const;
    double to_double() const;
    friend bool operator==(const QuadraticSurd& a, const QuadraticSurd& b);
};

} // namespace tileforge
