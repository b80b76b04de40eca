#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

namespace lanczos_lab {

enum class Precision { Low32, Work64, Ext128 };

inline std::string_view to_string(Precision p)
{
    switch (p) {
    case Precision::Low32: return "low32";
    case Precision::Work64: return "work64";
    case Precision::Ext128: return "ext128";
    }
    return "unknown";
}

inline Precision parse_precision(std::string_view s)
{
    if (s == "low32" || s == "single" || s == "float") return Precision::Low32;
    if (s == "work64" || s == "double") return Precision::Work64;
    if (s == "ext128" || s == "quad" || s == "double-double") return Precision::Ext128;
    throw std::invalid_argument("unknown precision '" + std::string(s) + "'");
}

namespace detail {

inline void two_sum(double a, double b, double& s, double& e)
{
    s = a + b;
    double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

// Requires |a| >= |b|.
inline void quick_two_sum(double a, double b, double& s, double& e)
{
    s = a + b;
    e = b - (s - a);
}

inline void two_prod(double a, double b, double& p, double& e)
{
    p = a * b;
#if defined(FP_FAST_FMA)
    e = std::fma(a, b, -p);
#else
    // Dekker split; exact for |a|,|b| well below the overflow threshold.
    constexpr double split = 134217729.0;  // 2^27 + 1
    double t = split * a;
    double ah = t - (t - a), al = a - ah;
    t = split * b;
    double bh = t - (t - b), bl = b - bh;
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
#endif
}

}  // namespace detail

/**
 * Unevaluated sum hi + lo of two binary64 numbers, kept normalized so that
 * |lo| <= ulp(hi)/2. Gives roughly 106 significant bits.
 */
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double x) : hi(x), lo(0.0) {}
    constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

    static DoubleDouble from_sum(double a, double b)
    {
        DoubleDouble r;
        detail::two_sum(a, b, r.hi, r.lo);
        return r;
    }
    static DoubleDouble from_product(double a, double b)
    {
        DoubleDouble r;
        detail::two_prod(a, b, r.hi, r.lo);
        return r;
    }

    explicit operator double() const { return hi; }
    explicit operator float() const;

    DoubleDouble& operator+=(const DoubleDouble& b);
    DoubleDouble& operator-=(const DoubleDouble& b);
    DoubleDouble& operator*=(const DoubleDouble& b);
    DoubleDouble& operator/=(const DoubleDouble& b);
    DoubleDouble& operator+=(double b);
    DoubleDouble& operator-=(double b);
    DoubleDouble& operator*=(double b);
};

using Ext = DoubleDouble;

inline DoubleDouble operator-(const DoubleDouble& a) { return {-a.hi, -a.lo}; }

inline DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b)
{
    double s, e, t, f;
    detail::two_sum(a.hi, b.hi, s, e);
    detail::two_sum(a.lo, b.lo, t, f);
    e += t;
    detail::quick_two_sum(s, e, s, e);
    e += f;
    detail::quick_two_sum(s, e, s, e);
    return {s, e};
}

inline DoubleDouble operator+(const DoubleDouble& a, double b)
{
    double s, e;
    detail::two_sum(a.hi, b, s, e);
    e += a.lo;
    detail::quick_two_sum(s, e, s, e);
    return {s, e};
}

inline DoubleDouble operator+(double a, const DoubleDouble& b) { return b + a; }
inline DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) { return a + (-b); }
inline DoubleDouble operator-(const DoubleDouble& a, double b) { return a + (-b); }
inline DoubleDouble operator-(double a, const DoubleDouble& b) { return (-b) + a; }

inline DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b)
{
    double p, e;
    detail::two_prod(a.hi, b.hi, p, e);
    e += a.hi * b.lo + a.lo * b.hi;
    detail::quick_two_sum(p, e, p, e);
    return {p, e};
}

inline DoubleDouble operator*(const DoubleDouble& a, double b)
{
    double p, e;
    detail::two_prod(a.hi, b, p, e);
    e += a.lo * b;
    detail::quick_two_sum(p, e, p, e);
    return {p, e};
}

inline DoubleDouble operator*(double a, const DoubleDouble& b) { return b * a; }

inline DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b)
{
    double q1 = a.hi / b.hi;
    DoubleDouble r = a - b * q1;
    double q2 = r.hi / b.hi;
    r -= b * q2;
    double q3 = r.hi / b.hi;
    double s, e;
    detail::quick_two_sum(q1, q2, s, e);
    return DoubleDouble{s, e} + q3;
}

inline DoubleDouble operator/(const DoubleDouble& a, double b) { return a / DoubleDouble(b); }
inline DoubleDouble operator/(double a, const DoubleDouble& b) { return DoubleDouble(a) / b; }

inline DoubleDouble& DoubleDouble::operator+=(const DoubleDouble& b) { return *this = *this + b; }
inline DoubleDouble& DoubleDouble::operator-=(const DoubleDouble& b) { return *this = *this - b; }
inline DoubleDouble& DoubleDouble::operator*=(const DoubleDouble& b) { return *this = *this * b; }
inline DoubleDouble& DoubleDouble::operator/=(const DoubleDouble& b) { return *this = *this / b; }
inline DoubleDouble& DoubleDouble::operator+=(double b) { return *this = *this + b; }
inline DoubleDouble& DoubleDouble::operator-=(double b) { return *this = *this - b; }
inline DoubleDouble& DoubleDouble::operator*=(double b) { return *this = *this * b; }

inline bool operator==(const DoubleDouble& a, const DoubleDouble& b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(const DoubleDouble& a, const DoubleDouble& b) { return !(a == b); }
inline bool operator<(const DoubleDouble& a, const DoubleDouble& b)
{
    return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(const DoubleDouble& a, const DoubleDouble& b) { return b < a; }
inline bool operator<=(const DoubleDouble& a, const DoubleDouble& b) { return !(b < a); }
inline bool operator>=(const DoubleDouble& a, const DoubleDouble& b) { return !(a < b); }

inline DoubleDouble abs(const DoubleDouble& a) { return a.hi < 0.0 ? -a : a; }
inline DoubleDouble fabs(const DoubleDouble& a) { return abs(a); }
inline bool isfinite(const DoubleDouble& a) { return std::isfinite(a.hi) && std::isfinite(a.lo); }
inline bool isnan(const DoubleDouble& a) { return std::isnan(a.hi) || std::isnan(a.lo); }
inline DoubleDouble ldexp(const DoubleDouble& a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }
inline DoubleDouble sqr(const DoubleDouble& a) { return a * a; }

inline DoubleDouble sqrt(const DoubleDouble& a)
{
    if (a.hi == 0.0) return {0.0, 0.0};
    if (a.hi < 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    if (!std::isfinite(a.hi)) return a;
    // Karp's trick: one Newton step on 1/sqrt, folded into the final product.
    double x = 1.0 / std::sqrt(a.hi);
    double ax = a.hi * x;
    DoubleDouble err = a - DoubleDouble::from_product(ax, ax);
    return DoubleDouble::from_sum(ax, err.hi * (x * 0.5));
}

inline DoubleDouble hypot(const DoubleDouble& a, const DoubleDouble& b)
{
    DoubleDouble x = abs(a), y = abs(b);
    if (x < y) std::swap(x, y);
    if (x.hi == 0.0) return {0.0, 0.0};
    DoubleDouble r = y / x;
    return x * sqrt(1.0 + r * r);
}

inline std::ostream& operator<<(std::ostream& os, const DoubleDouble& a)
{
    return os << a.hi << (a.lo < 0 ? " - " : " + ") << std::abs(a.lo);
}

namespace detail {

// Correct round-to-nearest-even of hi + lo to binary32.
inline float round_to_float(const DoubleDouble& x)
{
    float r = static_cast<float>(x.hi);
    if (!std::isfinite(r) || x.lo == 0.0) return r;
    double d = x.hi - static_cast<double>(r);  // exact
    float up = std::nextafter(r, std::numeric_limits<float>::infinity());
    float dn = std::nextafter(r, -std::numeric_limits<float>::infinity());
    double half_up = (static_cast<double>(up) - static_cast<double>(r)) * 0.5;
    double half_dn = (static_cast<double>(r) - static_cast<double>(dn)) * 0.5;
    // hi sat exactly on a binary32 midpoint and the cast picked the even
    // neighbour; lo decides which side the true value lies on.
    if (d == half_up && x.lo > 0.0) return up;
    if (d == -half_dn && x.lo < 0.0) return dn;
    return r;
}

}  // namespace detail

inline DoubleDouble::operator float() const { return detail::round_to_float(*this); }

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<float> {
    static constexpr Precision precision = Precision::Low32;
    static constexpr double unit_roundoff = 0x1p-24;
};

template <>
struct ScalarTraits<double> {
    static constexpr Precision precision = Precision::Work64;
    static constexpr double unit_roundoff = 0x1p-53;
};

template <>
struct ScalarTraits<DoubleDouble> {
    static constexpr Precision precision = Precision::Ext128;
    static constexpr double unit_roundoff = 0x1p-104;
};

inline double unit_roundoff(Precision p)
{
    switch (p) {
    case Precision::Low32: return ScalarTraits<float>::unit_roundoff;
    case Precision::Work64: return ScalarTraits<double>::unit_roundoff;
    case Precision::Ext128: return ScalarTraits<DoubleDouble>::unit_roundoff;
    }
    return 0.0;
}

/** Round an extended value to the native scalar type T (nearest-even). */
template <class T>
T round_to(const DoubleDouble& x)
{
    if constexpr (std::is_same_v<T, float>) return detail::round_to_float(x);
    else if constexpr (std::is_same_v<T, double>) return x.hi;
    else return x;
}

/**
 * Runtime-tagged rounding. The result is held exactly in a DoubleDouble.
 * Overflow at Low32 yields an infinity; callers treat that as divergence.
 */
inline DoubleDouble round_to(Precision p, const DoubleDouble& x)
{
    switch (p) {
    case Precision::Low32: return static_cast<double>(detail::round_to_float(x));
    case Precision::Work64: return x.hi;
    case Precision::Ext128: return x;
    }
    return x;
}

template <class T>
DoubleDouble to_ext(T x)
{
    if constexpr (std::is_same_v<T, DoubleDouble>) return x;
    else return DoubleDouble(static_cast<double>(x));
}

template <class T>
double to_double(const T& x)
{
    if constexpr (std::is_same_v<T, DoubleDouble>) return x.hi;
    else return static_cast<double>(x);
}

}  // namespace lanczos_lab
