#include "tileforge/fraction.hpp"

#include "tileforge/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace tileforge {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::singular: return "singular";
    case ErrorCode::not_expanding: return "not_expanding";
    case ErrorCode::overflow: return "overflow";
    case ErrorCode::resource: return "resource";
    case ErrorCode::collision: return "collision";
    case ErrorCode::no_solution: return "no_solution";
    case ErrorCode::degenerate: return "degenerate";
    }
    return "unknown";
}

namespace {

__int128 gcd128(__int128 a, __int128 b)
{
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        __int128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

bool fits64(__int128 v)
{
    return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

} // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den)
{
    if (den == 0)
        throw Error(ErrorCode::invalid_input, "fraction with zero denominator");
    *this = from_wide(num, den);
}

Fraction Fraction::from_wide(__int128 num, __int128 den)
{
    if (den == 0)
        throw Error(ErrorCode::invalid_input, "fraction with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (!fits64(num) || !fits64(den))
        throw Error(ErrorCode::overflow, "fraction exceeds 64-bit range");
    Fraction f;
    f.num_ = static_cast<std::int64_t>(num);
    f.den_ = static_cast<std::int64_t>(den);
    return f;
}

std::int64_t Fraction::floor() const noexcept
{
    std::int64_t q = num_ / den_;
    if ((num_ % den_ != 0) && (num_ < 0))
        --q;
    return q;
}

Fraction Fraction::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Fraction operator+(const Fraction& a, const Fraction& b)
{
    return Fraction::from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                               static_cast<__int128>(a.den_) * b.den_);
}

Fraction operator-(const Fraction& a, const Fraction& b) { return a + (-b); }

Fraction operator*(const Fraction& a, const Fraction& b)
{
    return Fraction::from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

Fraction operator/(const Fraction& a, const Fraction& b)
{
    if (b.num_ == 0)
        throw Error(ErrorCode::invalid_input, "division by zero fraction");
    return Fraction::from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Fraction& a, const Fraction& b)
{
    __int128 l = static_cast<__int128>(a.num_) * b.den_;
    __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l <=> r;
}

std::string Fraction::str() const
{
    if (den_ == 1)
        return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
}

std::ostream& operator<<(std::ostream& os, const Fraction& f) { return os << f.str(); }

namespace {

// Exact integer square root, or -1 when v is not a perfect square.
std::int64_t exact_isqrt(std::int64_t v)
{
    if (v < 0)
        return -1;
    auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<long double>(v))));
    for (std::int64_t c = std::max<std::int64_t>(0, r - 2); c <= r + 2; ++c)
        if (static_cast<__int128>(c) * c == v)
            return c;
    return -1;
}

} // namespace

QuadraticSurd QuadraticSurd::normalized() const
{
    if (factor.num() == 0 || radicand.num() == 0)
        return {Fraction(0), Fraction(1)};
    std::int64_t rn = exact_isqrt(radicand.num());
    std::int64_t rd = exact_isqrt(radicand.den());
    if (rn >= 0 && rd >= 0)
        return {factor * Fraction(rn, rd), Fraction(1)};
    return *this;
}

bool QuadraticSurd::is_rational() const { return normalized().radicand == Fraction(1); }

double QuadraticSurd::to_double() const { return factor.to_double() * std::sqrt(radicand.to_double()); }

bool operator==(const QuadraticSurd& a, const QuadraticSurd& b)
{
    QuadraticSurd x = a.normalized();
    QuadraticSurd y = b.normalized();
    // factor^2 * radicand decides the magnitude; signs must agree.
    if ((x.factor.num() > 0) != (y.factor.num() > 0) || (x.factor.num() == 0) != (y.factor.num() == 0))
        return false;
    return x.factor * x.factor * x.radicand == y.factor * y.factor * y.radicand;
}

} // namespace tileforge
