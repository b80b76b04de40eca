#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <lanczos_lab/measures.hpp>
#include <lanczos_lab/orthopoly.hpp>
#include <lanczos_lab/stability.hpp>

using namespace lanczos_lab;

namespace {

Measure random_discrete(std::mt19937_64& g, std::size_t m)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.01, 1.0);
    std::vector<Ext> atoms(m), weights(m);
    Ext s(0.0);
    for (std::size_t i = 0; i < m; ++i) {
        atoms[i] = Ext(u(g));
        s += (weights[i] = Ext(w(g)));
    }
    for (auto& x : weights) x = x / s;
    return Measure::discrete(atoms, weights);
}

// Midpoint-in-θ discretization of the MP law: x(θ) = 1 + d + 2√d cos θ, weight ∝ sin²θ / x.
Measure mp_discretized(double d, std::size_t m)
{
    std::vector<Ext> atoms(m), weights(m);
    Ext s(0.0);
    const Ext sd = sqrt(Ext(d));
    for (std::size_t j = 0; j < m; ++j) {
        const double th = (static_cast<double>(j) + 0.5) * std::numbers::pi / static_cast<double>(m);
        const Ext c(std::cos(th)), sn(std::sin(th));
        atoms[j] = Ext(1.0) + d + 2.0 * sd * c;
        weights[j] = sn * sn / atoms[j];
        s += weights[j];
    }
    for (auto& w : weights) w = w / s;
    return Measure::discrete(atoms, weights);
}

}  // namespace

TEST(Chebyshev, SmallValues)
{
    EXPECT_DOUBLE_EQ(chebyshev_T(2, 0.5), -0.5);
    EXPECT_EQ(chebyshev_U(3, 0.0), 0.0);
    EXPECT_EQ(chebyshev_U(4, 0.0), 1.0);
    EXPECT_EQ(chebyshev_U_signed(-1, 0.3), 0.0);
}

TEST(Chebyshev, DoubleAngleIdentity)
{
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(g);
        const double t3 = chebyshev_T(3, x);
        EXPECT_NEAR(chebyshev_T(6, x), 2.0 * t3 * t3 - 1.0, 1e-14);
    }
}

TEST(StieltjesJacobi, Semicircle)
{
    auto b = stieltjes_jacobi(Measure::semicircle(), 61);
    for (std::size_t n = 0; n <= 60; ++n) {
        EXPECT_EQ(b.alphas[n].hi, 0.0);
        EXPECT_EQ(b.betas[n].hi, 0.5);
        EXPECT_EQ(b.betas[n].lo, 0.0);
    }
}

TEST(StieltjesJacobi, MarchenkoPasturClosedForm)
{
    const double d = 0.2;
    auto b = stieltjes_jacobi(Measure::marchenko_pastur(d), 30);
    EXPECT_EQ(b.alphas[0].hi, 1.0);
    for (std::size_t n = 1; n < 30; ++n) EXPECT_NEAR(b.alphas[n].hi, 1.2, 1e-16);
    for (std::size_t n = 0; n < 30; ++n) EXPECT_NEAR(b.betas[n].hi, std::sqrt(0.2), 1e-16);
}

TEST(StieltjesJacobi, MarchenkoPasturAgainstDiscretizedLaw)
{
    const double d = 0.2;
    auto exact = stieltjes_jacobi(Measure::marchenko_pastur(d), 20);
    auto disc = stieltjes_jacobi(mp_discretized(d, 2000), 20);
    for (std::size_t n = 0; n < 20; ++n) {
        EXPECT_NEAR(exact.alphas[n].hi, disc.alphas[n].hi, 1e-12) << n;
        EXPECT_NEAR(exact.betas[n].hi, disc.betas[n].hi, 1e-12) << n;
    }
}

TEST(StieltjesJacobi, TwoPointMeasureTerminates)
{
    auto mu = Measure::discrete({Ext(-1.0), Ext(1.0)}, {Ext(0.5), Ext(0.5)});
    auto b = stieltjes_jacobi(mu, 5);
    ASSERT_TRUE(b.terminated_at.has_value());
    EXPECT_EQ(*b.terminated_at, 2u);
    ASSERT_EQ(b.alphas.size(), 2u);
    EXPECT_EQ(b.alphas[0].hi, 0.0);
    EXPECT_NEAR(b.alphas[1].hi, 0.0, 1e-30);
    EXPECT_NEAR(b.betas[0].hi, 1.0, 1e-30);
}

TEST(StieltjesJacobi, RejectsSignedAndUnnormalized)
{
    EXPECT_THROW(stieltjes_jacobi(Measure::discrete({Ext(0.0)}, {Ext(2.0)}), 1), std::invalid_argument);
    EXPECT_THROW(stieltjes_jacobi(Measure::discrete({Ext(0.0), Ext(1.0)}, {Ext(1.5), Ext(-0.5)}, true), 1),
                 std::invalid_argument);
}

TEST(EvalOrthonormal, SemicircleGivesU)
{
    auto b = stieltjes_jacobi(Measure::semicircle(), 31);
    std::mt19937_64 g(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Ext x(u(g));
        for (std::size_t n = 0; n <= 30; ++n)
            EXPECT_LT(std::abs((eval_orthonormal(b, n, x) - chebyshev_U(n, x)).hi), 1e-20);
    }
}

TEST(EvalOrthonormal, MarchenkoPasturIdentity)
{
    for (double d : {0.1, 0.2, 0.5}) {
        auto b = stieltjes_jacobi(Measure::marchenko_pastur(d), 31);
        const double lo = std::pow(1 - std::sqrt(d), 2), hi = std::pow(1 + std::sqrt(d), 2);
        for (int i = 0; i < 100; ++i) {
            const double x = lo + (hi - lo) * (i + 0.5) / 100.0;
            const double y = (x - 1 - d) / (2 * std::sqrt(d));
            for (std::size_t n = 0; n <= 30; ++n) {
                const double want = chebyshev_U(n, y) + std::sqrt(d) * chebyshev_U_signed(static_cast<long>(n) - 1, y);
                EXPECT_NEAR(eval_orthonormal(b, n, Ext(x)).hi, want, 1e-12);
            }
        }
    }
}

TEST(EvalOrthonormal, MonicFromNorms)
{
    // π_n for μ_U is 2^{-n} U_n.
    auto b = stieltjes_jacobi(Measure::semicircle(), 12);
    for (std::size_t n = 0; n <= 10; ++n)
        EXPECT_NEAR(eval_monic(b, n, 0.3), std::ldexp(chebyshev_U(n, 0.3), -static_cast<int>(n)), 1e-15);
    EXPECT_EQ(eval_orthonormal(b, 0, 0.7), 1.0);
}

TEST(EvalOrthonormal, OrthonormalityDiscrete)
{
    std::mt19937_64 g(9);
    auto mu = random_discrete(g, 40);
    auto b = stieltjes_jacobi(mu, 20);
    const auto& d = mu.as_discrete();
    for (std::size_t n = 0; n < 20; ++n)
        for (std::size_t m = 0; m <= n; ++m) {
            Ext s(0.0);
            for (std::size_t i = 0; i < d.atoms.size(); ++i)
                s += d.weights[i] * eval_orthonormal(b, n, d.atoms[i]) * eval_orthonormal(b, m, d.atoms[i]);
            EXPECT_NEAR(s.hi, n == m ? 1.0 : 0.0, 1e-15) << n << ',' << m;
        }
}

TEST(EvalOrthonormal, OrthonormalityContinuousByQuadrature)
{
    for (const auto& mu : {Measure::semicircle(), Measure::arcsine(), Measure::marchenko_pastur(0.3)}) {
        auto b = stieltjes_jacobi(mu, 21);
        auto rule = gauss_rule(b, 21);
        const auto& r = rule.as_discrete();
        for (std::size_t n = 0; n < 20; ++n)
            for (std::size_t m = 0; m <= n; ++m) {
                Ext s(0.0);
                for (std::size_t i = 0; i < r.atoms.size(); ++i)
                    s += r.weights[i] * eval_orthonormal(b, n, r.atoms[i]) * eval_orthonormal(b, m, r.atoms[i]);
                EXPECT_NEAR(s.hi, n == m ? 1.0 : 0.0, 1e-15);
            }
    }
}

TEST(ModifiedMoments, SelfMomentsAreDelta)
{
    std::mt19937_64 g(3);
    for (const auto& mu : {Measure::semicircle(), Measure::marchenko_pastur(0.2), random_discrete(g, 30)}) {
        auto b = stieltjes_jacobi(mu, 20);
        auto m = modified_moments(mu, b, 20).values;
        EXPECT_NEAR(m[0].hi, 1.0, 1e-18);
        for (std::size_t n = 1; n < 20; ++n) EXPECT_LT(std::abs(m[n].hi), 1e-15) << n;
    }
}

TEST(ModifiedMoments, ZerothMomentIsOne)
{
    std::mt19937_64 g(4);
    auto basis = stieltjes_jacobi(Measure::semicircle(), 10);
    for (int t = 0; t < 10; ++t) {
        auto nu = random_discrete(g, 7);
        EXPECT_NEAR(modified_moments(nu, basis, 10).values[0].hi, 1.0, 1e-30);
    }
}

TEST(ModifiedMoments, TwoPointAgainstArcsine)
{
    auto basis = stieltjes_jacobi(Measure::arcsine(), 4);
    auto nu = Measure::discrete({Ext(-0.5), Ext(0.5)}, {Ext(0.5), Ext(0.5)});
    auto m = modified_moments(nu, basis, 3).values;
    EXPECT_NEAR(m[1].hi, 0.0, 1e-30);
    EXPECT_NEAR(m[2].hi, -std::numbers::sqrt2 / 2.0, 1e-16);
    EXPECT_THROW(modified_moments(nu, basis, 10), std::invalid_argument);
}

TEST(ModifiedMoments, GaussianExactnessGap)
{
    std::mt19937_64 g(6);
    auto mu = random_discrete(g, 60);
    auto basis = stieltjes_jacobi(mu, 24);
    for (std::size_t k : {1u, 5u, 12u}) {
        auto muk = gauss_rule(basis, k);
        EXPECT_LT(moment_gap(mu, muk, basis, 2 * k), 1e-16) << k;
        EXPECT_EQ(moment_gap(mu, mu, basis, 2 * k), 0.0);
    }
}

TEST(Connection, ArcsineBasisIsScaledT)
{
    auto b = stieltjes_jacobi(Measure::arcsine(), 12);
    for (std::size_t n = 1; n <= 10; ++n) {
        auto c = chebyshev_connection(b, n);
        for (std::size_t i = 0; i <= n; ++i)
            EXPECT_NEAR(c[i].hi, i == n ? std::numbers::sqrt2 : 0.0, 1e-28) << n << ',' << i;
    }
}

TEST(Connection, ReconstructsSemicircleBasis)
{
    auto b = stieltjes_jacobi(Measure::semicircle(), 21);
    std::mt19937_64 g(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t n : {2u, 7u, 20u}) {
        auto c = chebyshev_connection(b, n);
        if (n == 2) {
            // U_2 = 2T_2 + 1
            EXPECT_NEAR(c[0].hi, 1.0, 1e-28);
            EXPECT_NEAR(c[1].hi, 0.0, 1e-28);
            EXPECT_NEAR(c[2].hi, 2.0, 1e-28);
        }
        for (int t = 0; t < 50; ++t) {
            const Ext x(u(g));
            Ext s(0.0);
            for (std::size_t i = 0; i <= n; ++i) s += c[i] * chebyshev_T(i, x);
            EXPECT_NEAR(s.hi, chebyshev_U(n, x).hi, 1e-15);
        }
    }
}

TEST(Connection, CoefficientBound)
{
    std::mt19937_64 g(10);
    for (int t = 0; t < 50; ++t) {
        auto mu = random_discrete(g, 30);
        auto b = stieltjes_jacobi(mu, 16);
        for (std::size_t n = 0; n <= b.max_degree(); n += 3) {
            auto c = chebyshev_connection(b, n);
            const double P = sup_norm(b, n, -1.0, 1.0);
            for (const auto& ci : c) EXPECT_LE(std::abs(ci.hi), 2.0 * P * (1 + 1e-12));
        }
    }
}

TEST(Connection, RejectsSupportOutsideUnitInterval)
{
    auto b = stieltjes_jacobi(Measure::marchenko_pastur(0.2), 5);
    EXPECT_THROW(chebyshev_connection(b, 3), std::invalid_argument);
    auto pushed = affine_pushforward(b, std::pow(1 - std::sqrt(0.2), 2), std::pow(1 + std::sqrt(0.2), 2));
    EXPECT_NO_THROW(chebyshev_connection(pushed, 3));
}

TEST(SupNorm, ChebyshevFamilies)
{
    auto t = stieltjes_jacobi(Measure::arcsine(), 31);
    auto u = stieltjes_jacobi(Measure::semicircle(), 31);
    EXPECT_NEAR(sup_norm(t, 0, -1, 1), 1.0, 1e-15);
    for (std::size_t n = 1; n <= 30; ++n) {
        EXPECT_NEAR(sup_norm(t, n, -1, 1), std::numbers::sqrt2, 1e-14) << n;
        EXPECT_NEAR(sup_norm(u, n, -1, 1), static_cast<double>(n + 1), 1e-12) << n;
    }
}

TEST(SupNorm, FactorTwoExtension)
{
    // ‖p‖ on [−1−η, 1+η] against ‖p‖ on [−1,1], η = 1/(2n²), random Chebyshev coefficients.
    auto basis = stieltjes_jacobi(Measure::arcsine(), 40);
    std::mt19937_64 g(12);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<std::size_t> deg(1, 30);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = deg(g);
        std::vector<Ext> c(n + 1);
        for (auto& x : c) x = Ext(nd(g));
        auto p = basis.expansion(c);
        const double eta = 1.0 / (2.0 * static_cast<double>(n * n));
        double inner = 0.0, outer = 0.0;
        for (int i = 0; i <= 20000; ++i) {
            const double s = -1.0 + 2.0 * i / 20000.0;
            inner = std::max(inner, std::abs(p(Ext(s)).hi));
            outer = std::max(outer, std::abs(p(Ext(s * (1 + eta))).hi));
        }
        EXPECT_LE(outer, 2.0 * inner) << "degree " << n;
    }
}

TEST(SupNorm, RegularityBound)
{
    std::mt19937_64 g(14);
    std::uniform_real_distribution<double> w(0.2, 1.0), jitter(-0.4, 0.4);
    for (int t = 0; t < 50; ++t) {
        const std::size_t k = 2 + t % 3;
        const double a = -1.0, b = 1.0;
        const std::size_t m = 64 * k * k;
        std::vector<Ext> atoms(m), weights(m);
        Ext s(0.0);
        for (std::size_t i = 0; i < m; ++i) {
            atoms[i] = Ext(a + (b - a) * (static_cast<double>(i) + 0.5 + jitter(g)) / static_cast<double>(m));
            s += (weights[i] = Ext(w(g)));
        }
        for (auto& x : weights) x = x / s;
        auto mu = Measure::discrete(atoms, weights);
        const double K = window_mass_infimum(mu, a, b, (b - a) / (16.0 * static_cast<double>(k * k)));
        ASSERT_GT(K, 0.0);
        auto basis = stieltjes_jacobi(mu, 2 * k);
        EXPECT_LE(max_sup_norm(basis, 2 * k - 1, a, b), 2.0 / std::sqrt(K));
    }
}

TEST(AssociatedPoly, ZeroAndUnitForcing)
{
    for (std::size_t n = 1; n < 10; ++n) {
        std::vector<Ext> zero(n, Ext(0.0)), unit(n, Ext(0.0));
        unit[0] = Ext(1.0);
        for (double x : {-0.9, 0.1, 0.75}) {
            EXPECT_EQ(associated_poly_sum(zero, Ext(x)).hi, 0.0);
            EXPECT_NEAR(associated_poly_sum(unit, Ext(x)).hi, chebyshev_U(n - 1, Ext(x)).hi, 1e-15);
        }
    }
}

TEST(AssociatedPoly, ClosedFormMatchesRecurrence)
{
    std::mt19937_64 g(16);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Ext> f(7);
    for (auto& x : f) x = Ext(u(g));
    for (int i = 0; i < 100; ++i) {
        const Ext x(u(g));
        EXPECT_NEAR(associated_poly_sum(f, x).hi, associated_poly_recurrence(f, x).hi, 1e-13);
    }
}

TEST(Pushforward, MapsSupportAndCoefficients)
{
    auto b = stieltjes_jacobi(Measure::semicircle(-2.0, 4.0), 5);
    auto p = affine_pushforward(b, -2.0, 4.0);
    EXPECT_DOUBLE_EQ(p.support_lo, -1.0);
    EXPECT_DOUBLE_EQ(p.support_hi, 1.0);
    for (std::size_t n = 0; n < 5; ++n) {
        EXPECT_NEAR(p.alphas[n].hi, 0.0, 1e-30);
        EXPECT_NEAR(p.betas[n].hi, 0.5, 1e-30);
    }
    EXPECT_THROW(affine_pushforward(b, 1.0, 1.0), std::invalid_argument);
}
