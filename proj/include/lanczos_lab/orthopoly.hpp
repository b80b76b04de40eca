#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "measures.hpp"
#include "scalars.hpp"
#include "spectral.hpp"

namespace lanczos_lab {

template <class X>
X chebyshev_T(std::size_t n, const X& x)
{
    X a(1.0), b = x;
    if (n == 0) return a;
    for (std::size_t j = 1; j < n; ++j) {
        X c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    return b;
}

template <class X>
X chebyshev_U(std::size_t n, const X& x)
{
    X a(1.0), b = 2.0 * x;
    if (n == 0) return a;
    for (std::size_t j = 1; j < n; ++j) {
        X c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    return b;
}

/** U_n with U_{-1} = 0. */
template <class X>
X chebyshev_U_signed(long n, const X& x)
{
    return n < 0 ? X(0.0) : chebyshev_U(static_cast<std::size_t>(n), x);
}

/**
 * Orthonormal polynomials of a measure through their recurrence. p_n is available
 * for n ≤ max_degree(); jacobi(k) for k ≤ alphas.size(). A terminated basis
 * (discrete measure with fewer atoms than requested) carries a final zero β.
 */
struct OrthoBasis {
    std::shared_ptr<const Measure> source;  // null for bases built directly from coefficients
    double support_lo = -1.0, support_hi = 1.0;
    std::vector<Ext> alphas, betas;
    std::optional<std::size_t> terminated_at;

    std::size_t length() const { return alphas.size(); }
    std::size_t max_degree() const { return terminated_at ? alphas.size() - 1 : alphas.size(); }

    JacobiMatrix jacobi(std::size_t k) const
    {
        if (k > alphas.size()) throw std::invalid_argument("OrthoBasis::jacobi: k exceeds basis length");
        JacobiMatrix J;
        J.alphas.assign(alphas.begin(), alphas.begin() + static_cast<std::ptrdiff_t>(k));
        J.betas.assign(betas.begin(), betas.begin() + static_cast<std::ptrdiff_t>(k > 0 ? k - 1 : 0));
        return J;
    }

    /** ‖π_n‖ = β_0⋯β_{n−1} for n ≤ max_degree(). */
    std::vector<Ext> norms() const
    {
        std::vector<Ext> r(max_degree() + 1);
        r[0] = Ext(1.0);
        for (std::size_t n = 1; n < r.size(); ++n) r[n] = r[n - 1] * betas[n - 1];
        return r;
    }

    OrthoExpansion expansion(std::vector<Ext> coeffs) const
    {
        if (coeffs.size() > max_degree() + 1) throw std::invalid_argument("expansion: degree exceeds basis");
        return OrthoExpansion{alphas, betas, std::move(coeffs)};
    }
};

template <class X>
X eval_orthonormal(const OrthoBasis& basis, std::size_t n, const X& x)
{
    if (n > basis.max_degree()) throw std::invalid_argument("eval_orthonormal: n exceeds basis length");
    return eval_recurrence(basis.alphas, basis.betas, n, x);
}

template <class X>
std::vector<X> eval_orthonormal_all(const OrthoBasis& basis, std::size_t n, const X& x)
{
    if (n > basis.max_degree()) throw std::invalid_argument("eval_orthonormal_all: n exceeds basis length");
    return eval_recurrence_all(basis.alphas, basis.betas, n, x);
}

template <class X>
X eval_monic(const OrthoBasis& basis, std::size_t n, const X& x)
{
    X p = eval_orthonormal(basis, n, x);
    Ext norm(1.0);
    for (std::size_t j = 0; j < n; ++j) norm *= basis.betas[j];
    if constexpr (std::is_same_v<X, Ext>) return p * norm;
    else return p * X(norm.hi);
}

namespace detail {

// Lanczos on diag(atoms) with starting vector sqrt(weights), double-double with
// classical Gram–Schmidt applied twice.
inline OrthoBasis discrete_stieltjes(const std::vector<Ext>& atoms, const std::vector<Ext>& weights,
                                     std::size_t count)
{
    const std::size_t m = atoms.size();
    OrthoBasis basis;
    std::vector<std::vector<Ext>> Q;
    std::vector<Ext> q(m);
    Ext nrm(0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (weights[i] < Ext(0.0)) throw std::invalid_argument("stieltjes_jacobi: signed measure");
        q[i] = sqrt(weights[i]);
        nrm += weights[i];
    }
    nrm = sqrt(nrm);
    for (auto& v : q) v /= nrm;
    double scale = 0.0;
    for (const Ext& a : atoms) scale = std::max(scale, std::abs(a.hi));
    const double tol = 16.0 * static_cast<double>(m) * unit_roundoff(Precision::Ext128) * std::max(scale, 1e-300);
    Q.push_back(std::move(q));
    std::vector<Ext> w(m);
    for (std::size_t j = 0; j < count; ++j) {
        const auto& qj = Q[j];
        for (std::size_t i = 0; i < m; ++i) w[i] = atoms[i] * qj[i];
        if (j > 0)
            for (std::size_t i = 0; i < m; ++i) w[i] -= basis.betas[j - 1] * Q[j - 1][i];
        Ext alpha = dot(w, qj);
        for (std::size_t i = 0; i < m; ++i) w[i] -= alpha * qj[i];
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t l = 0; l <= j; ++l) {
                Ext c = dot(Q[l], w);
                for (std::size_t i = 0; i < m; ++i) w[i] -= c * Q[l][i];
            }
        Ext beta = norm2(w);
        basis.alphas.push_back(alpha);
        if (beta.hi <= tol || j + 1 == m) {
            basis.betas.push_back(Ext(0.0));
            basis.terminated_at = j + 1;
            break;
        }
        basis.betas.push_back(beta);
        if (j + 1 < count) {
            std::vector<Ext> qn(m);
            for (std::size_t i = 0; i < m; ++i) qn[i] = w[i] / beta;
            Q.push_back(std::move(qn));
        }
    }
    return basis;
}

inline std::size_t rule_size_for(std::size_t degree) { return degree / 2 + 1; }

}  // namespace detail

/** Gaussian quadrature with m nodes from a Jacobi matrix (Golub–Welsch). */
inline Measure gauss_rule(const OrthoBasis& basis, std::size_t m)
{
    return quadrature_measure(basis.jacobi(m));
}

/**
 * Recurrence coefficients (Jacobi matrix) of μ for `count` steps. Named laws are
 * analytic; discrete measures use the Stieltjes procedure in double-double;
 * perturbed measures reweight a Gauss rule of their base that is exact for every
 * inner product needed.
 */
inline OrthoBasis stieltjes_jacobi(const Measure& mu, std::size_t count)
{
    if (count < 1) throw std::invalid_argument("stieltjes_jacobi: count must be >= 1");
    if (mu.is_signed()) throw std::invalid_argument("stieltjes_jacobi: signed measure");
    if (std::abs((mu.total_mass() - 1.0).hi) > 1e-12)
        throw std::invalid_argument("stieltjes_jacobi: measure must have unit mass");
    OrthoBasis basis;
    auto [lo, hi] = mu.support();
    basis.support_lo = lo;
    basis.support_hi = hi;
    switch (mu.kind()) {
    case MeasureKind::Discrete: {
        const auto& d = mu.as_discrete();
        OrthoBasis b = detail::discrete_stieltjes(d.atoms, d.weights, count);
        b.support_lo = lo;
        b.support_hi = hi;
        basis = std::move(b);
        break;
    }
    case MeasureKind::Semicircle: {
        const auto& s = std::get<Measure::Semicircle>(mu.data());
        const Ext c = (Ext(s.a) + s.b) / 2.0, r = (Ext(s.b) - s.a) / 4.0;
        basis.alphas.assign(count, c);
        basis.betas.assign(count, r);
        break;
    }
    case MeasureKind::Arcsine: {
        const auto& s = std::get<Measure::Arcsine>(mu.data());
        const Ext c = (Ext(s.a) + s.b) / 2.0, r = (Ext(s.b) - s.a) / 2.0;
        basis.alphas.assign(count, c);
        basis.betas.assign(count, r / 2.0);
        basis.betas[0] = r / sqrt(Ext(2.0));
        break;
    }
    case MeasureKind::MarchenkoPastur: {
        const Ext d(std::get<Measure::MarchenkoPastur>(mu.data()).d);
        basis.alphas.assign(count, Ext(1.0) + d);
        basis.alphas[0] = Ext(1.0);
        basis.betas.assign(count, sqrt(d));
        break;
    }
    case MeasureKind::PerturbedContinuous: {
        const auto& p = std::get<Measure::Perturbed>(mu.data());
        const std::size_t m = count + p.h.degree() / 2 + 2;
        OrthoBasis base = stieltjes_jacobi(*p.base, m);
        auto rule = gauss_rule(base, m);
        const auto& r = rule.as_discrete();
        std::vector<Ext> w(m);
        for (std::size_t i = 0; i < m; ++i) {
            w[i] = r.weights[i] * (Ext(1.0) + p.h(r.atoms[i]));
            if (w[i] < Ext(0.0)) throw std::invalid_argument("stieltjes_jacobi: signed measure");
        }
        OrthoBasis b = detail::discrete_stieltjes(r.atoms, w, count);
        if (b.terminated_at) throw std::logic_error("stieltjes_jacobi: quadrature basis terminated early");
        basis.alphas = std::move(b.alphas);
        basis.betas = std::move(b.betas);
        break;
    }
    }
    basis.source = std::make_shared<const Measure>(mu);
    return basis;
}

/** Gauss rule of μ exact for polynomials of degree ≤ `degree`. */
inline Measure gauss_rule(const Measure& mu, std::size_t degree)
{
    const std::size_t m = detail::rule_size_for(degree);
    return gauss_rule(stieltjes_jacobi(mu, m), m);
}

struct ModifiedMoments {
    std::shared_ptr<const Measure> target;
    std::vector<Ext> values;
};

/**
 * m_n(ν; μ) = ∫ p_n(x; μ) ν(dx) for n < count. Discrete ν by atom sums; continuous
 * ν through a Gauss rule exact for the integrand (perturbed ν: base rule weighted by 1 + h).
 */
inline ModifiedMoments modified_moments(const Measure& nu, const OrthoBasis& basis, std::size_t count)
{
    if (count == 0) return {std::make_shared<const Measure>(nu), {}};
    if (count - 1 > basis.max_degree()) throw std::invalid_argument("modified_moments: count exceeds basis");
    std::vector<Ext> atoms, weights;
    switch (nu.kind()) {
    case MeasureKind::Discrete: {
        const auto& d = nu.as_discrete();
        atoms = d.atoms;
        weights = d.weights;
        break;
    }
    case MeasureKind::PerturbedContinuous: {
        const auto& p = std::get<Measure::Perturbed>(nu.data());
        auto rule = gauss_rule(*p.base, count - 1 + p.h.degree());
        const auto& r = rule.as_discrete();
        atoms = r.atoms;
        weights.resize(atoms.size());
        for (std::size_t i = 0; i < atoms.size(); ++i) weights[i] = r.weights[i] * (Ext(1.0) + p.h(atoms[i]));
        break;
    }
    default: {
        auto rule = gauss_rule(nu, count - 1);
        atoms = rule.as_discrete().atoms;
        weights = rule.as_discrete().weights;
    }
    }
    ModifiedMoments mm{std::make_shared<const Measure>(nu), std::vector<Ext>(count, Ext(0.0))};
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        auto p = eval_orthonormal_all(basis, count - 1, atoms[i]);
        for (std::size_t n = 0; n < count; ++n) mm.values[n] += weights[i] * p[n];
    }
    return mm;
}

/** Δ = max_{n < count} |m_n(ν1; μ) − m_n(ν2; μ)|. */
inline double moment_gap(const Measure& nu1, const Measure& nu2, const OrthoBasis& basis, std::size_t count)
{
    auto a = modified_moments(nu1, basis, count);
    auto b = modified_moments(nu2, basis, count);
    double g = 0.0;
    for (std::size_t n = 0; n < count; ++n) g = std::max(g, std::abs((a.values[n] - b.values[n]).hi));
    return g;
}

/** Basis of the pushforward of μ under x ↦ (2x − (a + b))/(b − a). */
inline OrthoBasis affine_pushforward(const OrthoBasis& basis, double a, double b)
{
    if (!(a < b)) throw std::invalid_argument("affine_pushforward: need a < b");
    OrthoBasis r;
    const Ext s = Ext(b) - a, c = Ext(a) + b;
    for (const Ext& al : basis.alphas) r.alphas.push_back((2.0 * al - c) / s);
    for (const Ext& be : basis.betas) r.betas.push_back(2.0 * be / s);
    r.terminated_at = basis.terminated_at;
    r.support_lo = ((2.0 * Ext(basis.support_lo) - c) / s).hi;
    r.support_hi = ((2.0 * Ext(basis.support_hi) - c) / s).hi;
    return r;
}

/**
 * Coefficients c_{n,0..n} with p_n = Σ c_{n,i} T_i, from Gauss–Chebyshev quadrature
 * on n + 1 nodes (exact for degree 2n + 1).
 */
inline std::vector<Ext> chebyshev_connection(const OrthoBasis& basis, std::size_t n)
{
    constexpr double slack = 1e-12;
    if (basis.support_lo < -1.0 - slack || basis.support_hi > 1.0 + slack)
        throw std::invalid_argument("chebyshev_connection: support must lie in [-1,1]; push forward first");
    const std::size_t M = n + 1;
    std::vector<Ext> c(n + 1, Ext(0.0));
    // Chebyshev-T nodes to double-double accuracy as eigenvalues of the arcsine Jacobi matrix.
    JacobiMatrix J;
    J.alphas.assign(M, Ext(0.0));
    for (std::size_t j = 0; j + 1 < M; ++j) J.betas.push_back(j == 0 ? sqrt(Ext(0.5)) : Ext(0.5));
    const std::vector<Ext> nodes = tridiag_eigen(J).values;
    for (std::size_t j = 0; j < M; ++j) {
        const Ext& x = nodes[j];
        const Ext p = eval_orthonormal(basis, n, x);
        Ext t0(1.0), t1 = x;
        for (std::size_t i = 0; i <= n; ++i) {
            const Ext t = i == 0 ? t0 : t1;
            c[i] += p * t;
            if (i >= 1) {
                Ext t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
        }
    }
    for (std::size_t i = 0; i <= n; ++i) c[i] = c[i] * Ext(i == 0 ? 1.0 : 2.0) / Ext(static_cast<double>(M));
    return c;
}

/** Grid for sup-norm estimates: 8n + 9 Chebyshev points on [a, b] plus both endpoints. */
inline std::vector<double> sup_norm_grid(std::size_t n, double a, double b)
{
    const std::size_t M = 8 * n + 9;
    std::vector<double> g;
    g.reserve(M + 2);
    g.push_back(a);
    for (std::size_t j = 0; j < M; ++j) {
        const double t = std::cos((2.0 * static_cast<double>(j) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(M)));
        g.push_back(0.5 * (a + b) + 0.5 * (b - a) * t);
    }
    g.push_back(b);
    return g;
}

/** Lower estimate of ‖p_n‖_{[a,b]} on sup_norm_grid(n, a, b). */
inline double sup_norm(const OrthoBasis& basis, std::size_t n, double a, double b)
{
    if (!(a <= b)) throw std::invalid_argument("sup_norm: need a <= b");
    double s = 0.0;
    for (double x : sup_norm_grid(n, a, b)) s = std::max(s, std::abs(eval_orthonormal(basis, n, Ext(x)).hi));
    return s;
}

/** Estimate of P = max_{n ≤ max_n} ‖p_n‖_{[a,b]} (each degree on its own grid). */
inline double max_sup_norm(const OrthoBasis& basis, std::size_t max_n, double a, double b)
{
    double s = 0.0;
    for (std::size_t n = 0; n <= max_n; ++n) s = std::max(s, sup_norm(basis, n, a, b));
    return s;
}

/** d_n from the perturbed Chebyshev recurrence d_0 = 0, d_1 = f_0, d_j = 2x d_{j−1} − d_{j−2} + 2f_{j−1}. */
inline Ext associated_poly_recurrence(const std::vector<Ext>& f, const Ext& x)
{
    const std::size_t n = f.size();
    if (n == 0) return Ext(0.0);
    Ext d0(0.0), d1 = f[0];
    for (std::size_t j = 2; j <= n; ++j) {
        Ext d2 = 2.0 * x * d1 - d0 + 2.0 * f[j - 1];
        d0 = d1;
        d1 = d2;
    }
    return d1;
}

/** d_n(x) = U_{n−1}(x) f_0 + 2 Σ_{i=2}^{n} U_{n−i}(x) f_{i−1}, with n = f.size(). */
inline Ext associated_poly_sum(const std::vector<Ext>& f, const Ext& x)
{
    const std::size_t n = f.size();
    if (n == 0) return Ext(0.0);
    // U_0..U_{n-1} once
    std::vector<Ext> U(n);
    U[0] = Ext(1.0);
    if (n > 1) U[1] = 2.0 * x;
    for (std::size_t j = 2; j < n; ++j) U[j] = 2.0 * x * U[j - 1] - U[j - 2];
    Ext d = U[n - 1] * f[0];
    for (std::size_t i = 2; i <= n; ++i) d += 2.0 * U[n - i] * f[i - 1];
    return d;
}

}  // namespace lanczos_lab
