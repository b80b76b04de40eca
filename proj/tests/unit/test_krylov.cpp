#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <lanczos_lab/ensembles.hpp>
#include <lanczos_lab/krylov.hpp>
#include <lanczos_lab/lanczos.hpp>

using namespace lanczos_lab;

namespace {

using LD = long double;

// Gaussian elimination with partial pivoting in long double.
std::vector<LD> dense_solve(std::vector<std::vector<LD>> A, std::vector<LD> b)
{
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[p][c])) p = r;
        std::swap(A[c], A[p]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const LD f = A[r][c] / A[c][c];
            for (std::size_t j = c; j < n; ++j) A[r][j] -= f * A[c][j];
            b[r] -= f * b[c];
        }
    }
    std::vector<LD> x(n);
    for (std::size_t i = n; i-- > 0;) {
        LD s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
        x[i] = s / A[i][i];
    }
    return x;
}

ProblemInstance random_spd(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd;
    Matrix<double> M(n, n), A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M(i, j) = nd(g);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = i == j ? 1.0 : 0.0;
            for (std::size_t p = 0; p < n; ++p) s += M(p, i) * M(p, j) / static_cast<double>(n);
            A(i, j) = A(j, i) = s;
        }
    std::vector<double> b(n);
    for (auto& v : b) v = nd(g);
    return make_problem(A, b);
}

std::vector<std::vector<LD>> as_ld(const Matrix<double>& A)
{
    std::vector<std::vector<LD>> r(A.rows(), std::vector<LD>(A.cols()));
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) r[i][j] = A(i, j);
    return r;
}

std::vector<LD> as_ld(const std::vector<Ext>& v)
{
    std::vector<LD> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = static_cast<LD>(v[i].hi) + static_cast<LD>(v[i].lo);
    return r;
}

}  // namespace

TEST(LanczosSolve, IdentityConvergesInOneStep)
{
    Matrix<double> I(6, 6);
    for (std::size_t i = 0; i < 6; ++i) I(i, i) = 1.0;
    auto p = make_problem(I, {1, 2, 3, 4, 5, 6});
    LanczosOptions o;
    o.k = 1;
    auto run = run_lanczos(p, o);
    auto x = lanczos_solve(p, run, 1);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(x[i].hi, p.vector[i].hi, 1e-16);
    EXPECT_LT(a_norm_error(p, x), 1e-15);
    std::vector<Ext> zero(6, Ext(0.0));
    EXPECT_NEAR(a_norm_error(p, zero), 1.0, 1e-15);
}

TEST(LanczosSolve, SaturatedKrylovSpaceMatchesDenseSolve)
{
    auto p = random_spd(5, 3);
    auto run = run_exact_lanczos(p, 5);
    auto x = lanczos_solve(p, run, 5);
    auto ref = dense_solve(as_ld(p.matrix), as_ld(p.vector));
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(x[i].hi, static_cast<double>(ref[i]), 1e-12);
}

TEST(ANorm, MatchesIndependentQuadraticForm)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto p = random_spd(20, 100 + seed);
        auto xhat = dense_solve(as_ld(p.matrix), as_ld(p.vector));
        std::mt19937_64 g(seed);
        std::normal_distribution<double> nd;
        std::vector<Ext> x(20);
        for (auto& v : x) v = Ext(nd(g));
        std::vector<LD> e(20);
        for (std::size_t i = 0; i < 20; ++i) e[i] = xhat[i] - static_cast<LD>(x[i].hi);
        LD q = 0;
        for (std::size_t i = 0; i < 20; ++i)
            for (std::size_t j = 0; j < 20; ++j) q += e[i] * static_cast<LD>(p.matrix(i, j)) * e[j];
        const double want = static_cast<double>(std::sqrt(q));
        EXPECT_NEAR(a_norm_error(p, x), want, 1e-12 * want);

        std::vector<Ext> exact(20);
        for (std::size_t i = 0; i < 20; ++i) exact[i] = Ext(static_cast<double>(xhat[i]));
        EXPECT_LT(a_norm_error(p, exact), 1e-14);
    }
}

TEST(ANorm, RejectsIndefiniteMatrix)
{
    auto p = explicit_diagonal({1.0, -1.0, 2.0}, {Ext(1.0), Ext(0.0), Ext(0.0)});
    EXPECT_THROW(a_norm_error(p, p.vector), NotPositiveDefinite);
}

TEST(TridiagonalSolve, NamesFirstNonpositivePivot)
{
    JacobiMatrix T;
    T.alphas = {Ext(1.0), Ext(0.5), Ext(3.0)};
    T.betas = {Ext(1.0), Ext(0.1)};
    try {
        solve_tridiagonal_e0(T, 3);
        FAIL() << "expected NotPositiveDefinite";
    } catch (const NotPositiveDefinite& e) {
        EXPECT_EQ(e.pivot(), 1u);
    }
    T.alphas[0] = Ext(-1.0);
    try {
        solve_tridiagonal_e0(T, 1);
        FAIL() << "expected NotPositiveDefinite";
    } catch (const NotPositiveDefinite& e) {
        EXPECT_EQ(e.pivot(), 0u);
    }
}

TEST(TridiagonalSolve, AgainstDenseSolve)
{
    JacobiMatrix T;
    T.alphas = {Ext(4.0), Ext(5.0), Ext(6.0), Ext(4.5)};
    T.betas = {Ext(1.0), Ext(-2.0), Ext(0.5)};
    auto y = solve_tridiagonal_e0(T, 4);
    auto D = T.dense();
    std::vector<std::vector<LD>> A(4, std::vector<LD>(4));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) A[i][j] = D(i, j).hi;
    auto ref = dense_solve(A, {1, 0, 0, 0});
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(y[i], static_cast<double>(ref[i]), 1e-15);
}

TEST(CgLimit, DecreasingGeometric)
{
    EXPECT_NEAR(cg_limit(0.2, 4), 0.05, 1e-16);
    for (std::size_t k = 1; k < 30; ++k) EXPECT_LT(cg_limit(0.2, k + 1), cg_limit(0.2, k));
    EXPECT_NEAR(cg_limit(0.2, 6) / cg_limit(0.2, 4), 0.2, 1e-15);
}

TEST(Stagnation, FirstFlatRun)
{
    EXPECT_FALSE(stagnation_index({1.0, 0.5, 0.25, 0.125, 0.06}).has_value());
    EXPECT_EQ(stagnation_index({1.0, 0.5, 0.25, 0.249, 0.2485, 0.248, 0.1}, 1), 3u);
    EXPECT_EQ(stagnation_index({1.0, 1.0, 1.0, 1.0}, 5), 5u);
    // a 1% drop breaks the run
    EXPECT_FALSE(stagnation_index({1.0, 0.99, 0.98, 0.97}).has_value());
    EXPECT_FALSE(stagnation_index({}).has_value());
}

TEST(SolveTrace, WishartFollowsLimitAtSmallK)
{
    const double d = 0.2;
    std::vector<double> ratio;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto p = sample_covariance(400, d, seed, EntryDist::Gaussian, true);
        LanczosOptions o;
        o.k = 6;
        o.precision = Precision::Work64;
        auto tr = solve_trace(p, run_lanczos(p, o), d);
        ASSERT_EQ(tr.ks.size(), 6u);
        ratio.push_back(tr.errors[3] / tr.limit_curve[3]);
        for (std::size_t i = 0; i + 1 < tr.errors.size(); ++i) EXPECT_LT(tr.errors[i + 1], tr.errors[i]);
    }
    std::nth_element(ratio.begin(), ratio.begin() + 5, ratio.end());
    EXPECT_NEAR(ratio[5], 1.0, 0.15);
}

TEST(SolveTrace, LowPrecisionStagnates)
{
    auto p = sample_covariance(300, 0.2, 4, EntryDist::Gaussian, true);
    LanczosOptions o;
    o.k = 40;
    o.precision = Precision::Low32;
    auto tr = solve_trace(p, run_lanczos(p, o), 0.2);
    ASSERT_TRUE(tr.stagnation.has_value());
    EXPECT_LE(tr.errors[*tr.stagnation - 1], 1e-5);
    EXPECT_EQ(tr.curve_length(), *tr.stagnation);
}
