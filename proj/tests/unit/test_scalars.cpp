#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include <lanczos_lab/scalars.hpp>

using namespace lanczos_lab;

namespace {

// 50-digit references split into hi + lo (computed offline with mpmath).
constexpr Ext kSqrt2{1.4142135623730951, -9.667293313452913e-17};
constexpr Ext kThird{0.3333333333333333, 1.850371707708594e-17};
constexpr Ext kPi{3.141592653589793, 1.2246467991473532e-16};

double dd_diff(const Ext& a, const Ext& b) { return std::abs(((a - b).hi)); }

}  // namespace

TEST(Scalars, UnitRoundoffs)
{
    EXPECT_NEAR(unit_roundoff(Precision::Low32), 5.96e-8, 1e-10);
    EXPECT_NEAR(unit_roundoff(Precision::Work64), 1.11e-16, 1e-18);
    EXPECT_LE(unit_roundoff(Precision::Ext128), 1e-30);
}

TEST(Scalars, AddKeepsTinyTail)
{
    const double tiny = std::ldexp(1.0, -60);
    Ext s = Ext(1.0) + Ext(tiny);
    EXPECT_EQ((s - 1.0).hi, tiny);
    EXPECT_EQ((s - 1.0).lo, 0.0);
}

TEST(Scalars, MultiplyByOneIsIdentity)
{
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 200; ++i) {
        Ext x = Ext(u(g)) / Ext(u(g));
        Ext y = x * Ext(1.0);
        EXPECT_EQ(y.hi, x.hi);
        EXPECT_EQ(y.lo, x.lo);
    }
}

TEST(Scalars, SqrtTwoAgainstBigNumberReference)
{
    Ext r = sqrt(Ext(2.0));
    EXPECT_LT(dd_diff(r, kSqrt2), 1e-31);
    EXPECT_LT(std::abs((r * r - 2.0).hi), 1e-30);
}

TEST(Scalars, DivisionAgainstReference)
{
    EXPECT_LT(dd_diff(Ext(1.0) / Ext(3.0), kThird), 1e-32);
    Ext p = Ext(355.0) / Ext(113.0);
    EXPECT_GT(dd_diff(p, kPi), 1e-7);  // distinct value, sanity of comparison
}

TEST(Scalars, TwoSumIsExactForBinary64Inputs)
{
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(g), b = std::ldexp(u(g), -30);
        Ext s = Ext(a) + Ext(b);
        // hi + lo == a + b exactly: reconstruct a from the sum.
        Ext back = s - b;
        EXPECT_EQ(back.hi, a);
        EXPECT_EQ(back.lo, 0.0);
        EXPECT_EQ(s.hi, a + b);  // agrees with binary64 rounding
    }
}

TEST(Scalars, Normalization)
{
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Ext acc(0.0);
    for (int i = 0; i < 500; ++i) {
        acc = acc * Ext(u(g)) + Ext(u(g)) / Ext(3.0);
        if (acc.hi == 0.0) continue;
        const double ulp = std::nextafter(std::abs(acc.hi), std::numeric_limits<double>::infinity()) - std::abs(acc.hi);
        EXPECT_LE(std::abs(acc.lo), ulp / 2 + 0.0);
        acc = acc / Ext(1e3);
    }
}

TEST(Scalars, RoundToLow32)
{
    EXPECT_EQ(round_to(Precision::Low32, Ext(1.0) + std::ldexp(1.0, -30)).hi, 1.0);
    const double r = round_to(Precision::Low32, Ext(0.1)).hi;
    EXPECT_EQ(r, 0.10000000149011612);
    EXPECT_LT(std::abs(r - 0.1) / 0.1, 6e-8);
    EXPECT_EQ(round_to<double>(kPi), 3.141592653589793);
}

TEST(Scalars, RoundToUsesDoubleDoubleTail)
{
    // hi alone is a float tie; the sign of lo decides the direction.
    const double tie = 1.0 + std::ldexp(1.0, -24);
    const float up = round_to<float>(Ext(tie, 1e-30));
    const float down = round_to<float>(Ext(tie, -1e-30));
    EXPECT_EQ(static_cast<double>(up), 1.0 + std::ldexp(1.0, -23));
    EXPECT_EQ(static_cast<double>(down), 1.0);
    EXPECT_EQ(static_cast<double>(round_to<float>(Ext(tie))), 1.0);  // ties to even
}

TEST(Scalars, RoundToIsMonotoneAndIdempotent)
{
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (Precision p : {Precision::Low32, Precision::Work64, Precision::Ext128}) {
        for (int i = 0; i < 300; ++i) {
            Ext a = Ext(u(g)) / Ext(7.0), b = a + Ext(std::abs(u(g))) * 1e-9;
            Ext ra = round_to(p, a), rb = round_to(p, b);
            EXPECT_LE(ra, rb);
            Ext rr = round_to(p, ra);
            EXPECT_EQ(rr.hi, ra.hi);
            EXPECT_EQ(rr.lo, ra.lo);
        }
    }
}

TEST(Scalars, Low32OverflowIsInfinite)
{
    EXPECT_TRUE(std::isinf(round_to(Precision::Low32, Ext(1e39)).hi));
}

TEST(Scalars, NonFinitePropagates)
{
    Ext x = Ext(std::numeric_limits<double>::infinity()) + Ext(1.0);
    EXPECT_FALSE(isfinite(x));
    EXPECT_TRUE(isnan(Ext(std::nan("")) * Ext(2.0)));
}

TEST(Scalars, ParsePrecision)
{
    EXPECT_EQ(parse_precision("low32"), Precision::Low32);
    EXPECT_EQ(parse_precision("work64"), Precision::Work64);
    EXPECT_EQ(parse_precision("ext128"), Precision::Ext128);
    EXPECT_THROW(parse_precision("fp8"), std::invalid_argument);
}
