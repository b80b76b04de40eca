#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include <lanczos_lab/spectral.hpp>

using namespace lanczos_lab;

namespace {

constexpr Ext kPi{3.141592653589793, 1.2246467991473532e-16};

// Taylor series in double-double; independent of the library's eigen solvers.
Ext dd_cos(const Ext& x)
{
    Ext term(1.0), sum(1.0);
    const Ext x2 = x * x;
    for (int n = 1; n < 40; ++n) {
        term = -term * x2 / Ext(static_cast<double>((2 * n - 1) * (2 * n)));
        sum += term;
    }
    return sum;
}

JacobiMatrix chebyshev_u_jacobi(std::size_t k)
{
    JacobiMatrix J;
    J.alphas.assign(k, Ext(0.0));
    J.betas.assign(k - 1, Ext(0.5));
    return J;
}

Matrix<double> random_symmetric(std::size_t n, unsigned seed)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> N;
    Matrix<double> A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) A(i, j) = A(j, i) = N(g);
    return A;
}

}  // namespace

TEST(TridiagEigen, OneByOne)
{
    JacobiMatrix J;
    J.alphas = {Ext(3.25)};
    auto e = tridiag_eigen(J);
    ASSERT_EQ(e.values.size(), 1u);
    EXPECT_EQ(e.values[0].hi, 3.25);
    EXPECT_EQ(std::abs(e.first_components[0].hi), 1.0);
}

TEST(TridiagEigen, TwoByTwoChebyshevU)
{
    auto e = tridiag_eigen(chebyshev_u_jacobi(2));
    EXPECT_LT(std::abs((e.values[0] + 0.5).hi), 1e-30);
    EXPECT_LT(std::abs((e.values[1] - 0.5).hi), 1e-30);
    auto w = e.weights();
    EXPECT_LT(std::abs((w[0] - 0.5).hi), 1e-30);
    EXPECT_LT(std::abs((w[1] - 0.5).hi), 1e-30);
}

TEST(TridiagEigen, ChebyshevUFiftyMatchesCosines)
{
    const std::size_t k = 50;
    auto e = tridiag_eigen(chebyshev_u_jacobi(k));
    double dev = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
        // ascending order: the j-th smallest is cos((k+1−j)π/(k+1))
        Ext ref = dd_cos(kPi * Ext(static_cast<double>(k + 1 - j)) / Ext(static_cast<double>(k + 1)));
        dev = std::max(dev, std::abs((e.values[j - 1] - ref).hi));
    }
    EXPECT_LT(dev, 1e-25);
}

TEST(TridiagEigen, WeightsNonnegativeAndSumToOne)
{
    std::mt19937_64 g(4);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        JacobiMatrix J;
        for (int i = 0; i < 30; ++i) J.alphas.push_back(Ext(u(g) - 1.0));
        for (int i = 0; i < 29; ++i) J.betas.push_back(Ext(u(g)));
        auto w = tridiag_eigen(J).weights();
        Ext s(0.0);
        for (auto& x : w) {
            EXPECT_GE(x.hi, 0.0);
            s += x;
        }
        EXPECT_LT(std::abs((s - 1.0).hi), 1e-28);
    }
}

TEST(TridiagEigen, GolubWelschRecoversDiscreteMeasure)
{
    // Jacobi matrix of a 6-atom measure, built by Lanczos on diag(atoms) in double-double here.
    const std::vector<double> atoms = {-0.9, -0.3, 0.1, 0.4, 0.75, 1.2};
    const std::vector<double> mass = {0.1, 0.25, 0.05, 0.3, 0.2, 0.1};
    const std::size_t m = atoms.size();
    std::vector<std::vector<Ext>> Q;
    // The literals do not sum to exactly 1 in binary64; normalize in double-double.
    Ext total(0.0);
    for (double x : mass) total += x;
    std::vector<Ext> q(m), unit(m);
    for (std::size_t i = 0; i < m; ++i) {
        unit[i] = Ext(mass[i]) / total;
        q[i] = sqrt(unit[i]);
    }
    JacobiMatrix J;
    std::vector<Ext> prev(m, Ext(0.0));
    Ext beta(0.0);
    for (std::size_t j = 0; j < m; ++j) {
        Q.push_back(q);
        std::vector<Ext> w(m);
        for (std::size_t i = 0; i < m; ++i) w[i] = q[i] * atoms[i] - beta * prev[i];
        Ext a(0.0);
        for (std::size_t i = 0; i < m; ++i) a += w[i] * q[i];
        J.alphas.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& v : Q) {
                Ext c(0.0);
                for (std::size_t i = 0; i < m; ++i) c += w[i] * v[i];
                for (std::size_t i = 0; i < m; ++i) w[i] -= c * v[i];
            }
        if (j + 1 == m) break;
        Ext nb(0.0);
        for (auto& x : w) nb += x * x;
        beta = sqrt(nb);
        J.betas.push_back(beta);
        prev = q;
        for (std::size_t i = 0; i < m; ++i) q[i] = w[i] / beta;
    }
    auto e = tridiag_eigen(J);
    auto w = e.weights();
    for (std::size_t i = 0; i < m; ++i) {
        EXPECT_LT(std::abs((e.values[i] - atoms[i]).hi), 1e-20);
        EXPECT_LT(std::abs((w[i] - unit[i]).hi), 1e-20);
    }
}

TEST(DenseEigen, Diagonal)
{
    Matrix<double> A(3, 3);
    A(0, 0) = 3;
    A(1, 1) = 1;
    A(2, 2) = 2;
    auto E = dense_symmetric_eigen(A);
    EXPECT_DOUBLE_EQ(E.values[0], 1.0);
    EXPECT_DOUBLE_EQ(E.values[1], 2.0);
    EXPECT_DOUBLE_EQ(E.values[2], 3.0);
    EXPECT_NEAR(std::abs(E.vectors(1, 0)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(E.vectors(2, 1)), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(E.vectors(0, 2)), 1.0, 1e-15);
}

TEST(DenseEigen, RankOne)
{
    const std::size_t n = 7;
    std::vector<double> v(n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += (v[i] = 1.0 + static_cast<double>(i));
    double nrm = 0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    Matrix<double> A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = v[i] * v[j] / (nrm * nrm);
    auto E = dense_symmetric_eigen(A);
    EXPECT_NEAR(E.values.back(), 1.0, 1e-14);
    for (std::size_t i = 0; i + 1 < n; ++i) EXPECT_NEAR(E.values[i], 0.0, 1e-14);
}

TEST(DenseEigen, ReconstructionAndOrthogonality)
{
    const std::size_t n = 50;
    auto A = random_symmetric(n, 9);
    for (bool generic : {false, true}) {
        auto E = generic ? dense_symmetric_eigen_generic(A) : dense_symmetric_eigen(A);
        double rec = 0.0, orth = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0, o = 0.0;
                for (std::size_t p = 0; p < n; ++p) {
                    s += E.vectors(i, p) * E.values[p] * E.vectors(j, p);
                    o += E.vectors(p, i) * E.vectors(p, j);
                }
                rec = std::max(rec, std::abs(s - A(i, j)));
                orth = std::max(orth, std::abs(o - (i == j ? 1.0 : 0.0)));
            }
        EXPECT_LT(rec, 1e-12);
        EXPECT_LT(orth, 1e-10);
        for (std::size_t i = 1; i < n; ++i) EXPECT_LE(E.values[i - 1], E.values[i]);
    }
}

TEST(MatrixFunction, IdentityConstantAndSqrt)
{
    auto A = random_symmetric(12, 2);
    auto E = dense_symmetric_eigen(A);
    std::vector<Ext> v(12);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = Ext(std::sin(1.0 + static_cast<double>(i)));
    auto id = apply_matrix_function(E, [](const Ext& x) { return x; }, v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) s += A(i, j) * v[j].hi;
        EXPECT_NEAR(id[i].hi, s, 1e-12);
    }
    auto one = apply_matrix_function(E, [](const Ext&) { return Ext(1.0); }, v);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(one[i].hi, v[i].hi, 1e-14);

    Matrix<double> D(2, 2);
    D(0, 0) = 4;
    D(1, 1) = 9;
    auto r = apply_matrix_function(dense_symmetric_eigen(D), [](const Ext& x) { return sqrt(x); },
                                   {Ext(1.0), Ext(1.0)});
    EXPECT_DOUBLE_EQ(r[0].hi, 2.0);
    EXPECT_DOUBLE_EQ(r[1].hi, 3.0);
}

TEST(MatrixFunction, UndefinedValueNamesEigenvalue)
{
    Matrix<double> D(2, 2);
    D(0, 0) = -1;
    D(1, 1) = 4;
    try {
        apply_matrix_function(dense_symmetric_eigen(D), [](const Ext& x) { return sqrt(x); }, {Ext(1.0), Ext(0.0)});
        FAIL() << "expected domain_error";
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("-1"), std::string::npos);
    }
}

TEST(SpectralProjection, ExtMatchesWork64)
{
    auto A = random_symmetric(40, 5);
    std::vector<Ext> b(40);
    double n2 = 0;
    for (std::size_t i = 0; i < b.size(); ++i) n2 += std::pow(b[i].hi = std::cos(static_cast<double>(i)), 2);
    for (auto& x : b) x = x / std::sqrt(n2);
    auto pe = spectral_projection(A, b, Precision::Ext128);
    auto pw = spectral_projection(A, b, Precision::Work64);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_NEAR(pe.values[i].hi, pw.values[i].hi, 1e-12);
        EXPECT_NEAR(std::abs(pe.projections[i].hi), std::abs(pw.projections[i].hi), 1e-10);
    }
}
