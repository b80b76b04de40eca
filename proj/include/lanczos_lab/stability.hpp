#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ensembles.hpp"
#include "lanczos.hpp"
#include "measures.hpp"
#include "orthopoly.hpp"
#include "spectral.hpp"

namespace lanczos_lab {

/** Absolute constants of the moment-stability corollary. */
inline constexpr double kConstC = 20.0;
inline constexpr double kConstD = 6096.0;

/**
 * h(x) = Σ_{n<2k} (m_n(μ̄_k; μ) − m_n(μ; μ)) p_n(x; μ), with the quantities needed
 * for its sup-norm bound on [a, b].
 */
struct PerturbationFunction {
    OrthoBasis reference;
    std::size_t k = 0;
    double a = -1.0, b = 1.0;
    std::vector<Ext> coefficients;     // n = 0..2k−1
    std::vector<Ext> target_moments;   // m_n(μ̄_k; μ)
    double delta_k = 0.0;              // Δ_k(μ̄_k, μ; μ) = max |coefficients|
    double P_k = 0.0;                  // max_{n<2k} |p_n| on the evaluation grid
    double sup_norm_est = 0.0;         // max |h| on the same grid
    bool h_bd_holds = false;           // sup_norm_est ≤ 2k·Δ_k·P_k

    template <class X>
    X operator()(const X& x) const
    {
        return OrthoExpansion{reference.alphas, reference.betas, coefficients}(x);
    }
    OrthoExpansion expansion() const { return OrthoExpansion{reference.alphas, reference.betas, coefficients}; }
};

namespace detail {

inline double max_abs_diff(const std::vector<Ext>& a, const std::vector<Ext>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs((a[i] - b[i]).hi));
    return m;
}

}  // namespace detail

/** Default bounding interval: the support of μ. */
inline PerturbationFunction build_h(const JacobiMatrix& T, const Measure& mu,
                                    std::optional<std::pair<double, double>> interval = std::nullopt)
{
    const std::size_t k = T.size();
    if (k == 0) throw std::invalid_argument("build_h: empty Jacobi matrix");
    PerturbationFunction h;
    h.k = k;
    h.reference = stieltjes_jacobi(mu, 2 * k);
    if (h.reference.max_degree() < 2 * k - 1)
        throw std::invalid_argument("build_h: reference basis terminates before degree 2k-1");
    std::tie(h.a, h.b) = interval ? *interval : mu.support();

    const Measure mu_bar = quadrature_measure(T);
    h.target_moments = modified_moments(mu_bar, h.reference, 2 * k).values;
    const auto self = modified_moments(mu, h.reference, 2 * k).values;
    h.coefficients.resize(2 * k);
    for (std::size_t n = 0; n < 2 * k; ++n) {
        h.coefficients[n] = h.target_moments[n] - self[n];
        h.delta_k = std::max(h.delta_k, std::abs(h.coefficients[n].hi));
    }

    // P_k and ‖h‖ on one common grid so the bound compares like with like.
    for (double x : sup_norm_grid(2 * k - 1, h.a, h.b)) {
        auto p = eval_orthonormal_all(h.reference, 2 * k - 1, Ext(x));
        Ext s(0.0);
        for (std::size_t n = 0; n < 2 * k; ++n) {
            h.P_k = std::max(h.P_k, std::abs(p[n].hi));
            s += h.coefficients[n] * p[n];
        }
        h.sup_norm_est = std::max(h.sup_norm_est, std::abs(s.hi));
    }
    h.h_bd_holds = h.sup_norm_est <= 2.0 * static_cast<double>(k) * h.delta_k * h.P_k;
    return h;
}

inline PerturbationFunction build_h(const LanczosRun& run, const Measure& mu,
                                    std::optional<std::pair<double, double>> interval = std::nullopt)
{
    return build_h(run.T, mu, interval);
}

struct MuStar {
    Measure measure;
    bool is_signed = false;
    double moment_match_error = 0.0;  // max_{n<2k} |m_n(μ*; μ) − m_n(μ̄_k; μ)|
    bool moments_verified = false;    // error ≤ 1e−18
};

/**
 * μ* = (1 + h)μ. Discrete μ gives reweighted atoms; continuous μ a perturbed
 * measure whose signedness is judged on a fine grid of its support.
 */
inline MuStar build_mu_star(const PerturbationFunction& h, const Measure& mu)
{
    MuStar out;
    if (mu.kind() == MeasureKind::Discrete) {
        const auto& d = mu.as_discrete();
        std::vector<Ext> w(d.atoms.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = d.weights[i] * (Ext(1.0) + h(d.atoms[i]));
            if (w[i] < Ext(0.0)) out.is_signed = true;
        }
        out.measure = Measure::discrete(d.atoms, std::move(w), true);
    } else {
        auto [lo, hi] = mu.support();
        const int m = 4000;
        for (int i = 0; i <= m && !out.is_signed; ++i) {
            double x = lo + (hi - lo) * i / m;
            if (1.0 + h(x) < 0.0) out.is_signed = true;
        }
        out.measure = Measure::perturbed(mu, h.expansion(), out.is_signed);
    }
    const auto got = modified_moments(out.measure, h.reference, 2 * h.k).values;
    out.moment_match_error = detail::max_abs_diff(got, h.target_moments);
    out.moments_verified = out.moment_match_error <= 1e-18;
    return out;
}

struct BStar {
    std::vector<Ext> vector;
    double distance = 0.0;            // ‖b − b*‖
    double h_sup_on_spectrum = 0.0;   // max_λ |h(λ)| = ‖h(A)‖
};

/**
 * b* = (I + h(A))^{1/2} b, formed as b + U((1 + h(Λ))^{1/2} − 1)Uᵀb so that a
 * vanishing h reproduces b to the last bit.
 */
inline BStar build_b_star(const ProblemInstance& problem, const PerturbationFunction& h, const DenseEigen& E)
{
    BStar out;
    for (double lam : E.values) {
        Ext hv = h(Ext(lam));
        out.h_sup_on_spectrum = std::max(out.h_sup_on_spectrum, std::abs(hv.hi));
        if (!(Ext(1.0) + hv > Ext(0.0))) throw std::domain_error("construction invalid, ‖h‖_Λ ≥ 1");
    }
    auto f = [&](const Ext& lam) {
        Ext hv = h(lam);
        return hv / (sqrt(Ext(1.0) + hv) + 1.0);
    };
    auto corr = apply_matrix_function(E, f, problem.vector);
    out.vector.resize(corr.size());
    Ext d2(0.0);
    for (std::size_t i = 0; i < corr.size(); ++i) {
        out.vector[i] = problem.vector[i] + corr[i];
        d2 += corr[i] * corr[i];
    }
    out.distance = sqrt(d2).hi;
    return out;
}

inline BStar build_b_star(const ProblemInstance& problem, const PerturbationFunction& h)
{
    return build_b_star(problem, h, dense_symmetric_eigen(problem.matrix));
}

struct CoefficientErrors {
    std::vector<double> alpha;  // n < k
    std::vector<double> beta;   // n < k − 1
    double max() const
    {
        double m = 0.0;
        for (double v : alpha) m = std::max(m, v);
        for (double v : beta) m = std::max(m, v);
        return m;
    }
};

inline CoefficientErrors coefficient_errors(const JacobiMatrix& a, const JacobiMatrix& b)
{
    CoefficientErrors e;
    const std::size_t k = std::min(a.size(), b.size());
    for (std::size_t n = 0; n < k; ++n) e.alpha.push_back(std::abs((a.alphas[n] - b.alphas[n]).hi));
    for (std::size_t n = 0; n + 1 < k; ++n) e.beta.push_back(std::abs((a.betas[n] - b.betas[n]).hi));
    return e;
}

/** Exact-arithmetic stand-in run on (A, b*) compared with the run's coefficients. */
inline CoefficientErrors verify_backward(const ProblemInstance& problem, const LanczosRun& run,
                                         const std::vector<Ext>& b_star, LanczosRun* star_run = nullptr)
{
    ProblemInstance p2{problem.matrix, b_star, problem.spec};
    auto r = run_exact_lanczos(p2, run.steps());
    auto e = coefficient_errors(r.T, run.T);
    if (star_run) *star_run = std::move(r);
    return e;
}

struct ChebMomentRow {
    std::size_t n = 0;
    double lhs = 0.0;  // |∫T_n dμ_N − ∫T_n dμ̄_k| on the rescaled problem
    double rhs = 0.0;  // 381 k² ε̂
};

struct ChebVectorRow {
    std::size_t n = 0;
    double lhs = 0.0;  // ‖T_n(Â)b − Q̄ T_n(T̂) e_0‖
    double rhs = 0.0;  // 9 k² ε̂
};

struct ChebMomentAudit {
    double a = 0.0, b = 0.0;      // affine map [a, b] → [−1, 1]
    double scale = 1.0;           // 2/(b − a)
    double A_hat_norm = 1.0;
    double eps_hat = 0.0;         // ε_lan of the rescaled run
    bool preconditions_hold = false;
    std::vector<ChebMomentRow> moments;
    std::vector<ChebVectorRow> vectors;
    std::size_t moment_violations = 0;
    std::size_t vector_violations = 0;
};

/**
 * Chebyshev-moment audit on Â = (2/(b−a))A − ((b+a)/(b−a))I with [a, b] = [λ_min, λ_max].
 * The rescaled run is the affine image of the original: F, H and η scale by 2/(b−a),
 * D is unchanged, and ‖Â‖ = 1.
 */
inline ChebMomentAudit check_cheb_moment_bound(const ProblemInstance& problem, const LanczosRun& run,
                                               const RoundingDiagnostics& diag, const SpectrumBounds& sb)
{
    ChebMomentAudit out;
    const std::size_t k = run.steps();
    const std::size_t n = problem.dim();
    out.a = sb.lambda_min;
    out.b = sb.lambda_max;
    if (!(out.b > out.a)) throw std::invalid_argument("check_cheb_moment_bound: degenerate spectrum");
    const Ext c = Ext(2.0) / (Ext(out.b) - out.a);
    const Ext s = (Ext(out.b) + out.a) / (Ext(out.b) - out.a);
    out.scale = c.hi;
    out.A_hat_norm = std::max(std::abs((c * sb.lambda_min - s).hi), std::abs((c * sb.lambda_max - s).hi));
    out.eps_hat = std::max({out.scale * diag.F_norm / out.A_hat_norm, diag.DminusI_norm,
                            out.scale * diag.H_norm / out.A_hat_norm, out.scale * diag.eta / out.A_hat_norm});
    const double kk = static_cast<double>(k);
    out.preconditions_hold = k > 1 && out.eps_hat < 1.0 / (5.0 * kk * kk) &&
                             out.A_hat_norm <= 1.0 + 1.0 / (4.0 * kk * kk);

    // t_i = T_i(Â) b, i ≤ k − 1
    std::vector<std::vector<Ext>> t;
    t.push_back(problem.vector);
    std::vector<Ext> av(n);
    auto apply_hat = [&](const std::vector<Ext>& v) {
        matvec<Ext, double>(problem.matrix, std::span<const Ext>(v), std::span<Ext>(av));
        std::vector<Ext> r(n);
        for (std::size_t i = 0; i < n; ++i) r[i] = c * av[i] - s * v[i];
        return r;
    };
    if (k >= 2) t.push_back(apply_hat(t[0]));
    for (std::size_t i = 2; i < k; ++i) {
        auto w = apply_hat(t[i - 1]);
        for (std::size_t j = 0; j < n; ++j) w[j] = 2.0 * w[j] - t[i - 2][j];
        t.push_back(std::move(w));
    }

    // t̄_i = T_i(T̂) e_0 with T̂ = cT̄ − sI
    auto apply_that = [&](const std::vector<Ext>& v) {
        std::vector<Ext> r(k);
        for (std::size_t i = 0; i < k; ++i) {
            Ext acc = run.T.alphas[i] * v[i];
            if (i > 0) acc += run.T.betas[i - 1] * v[i - 1];
            if (i + 1 < k) acc += run.T.betas[i] * v[i + 1];
            r[i] = c * acc - s * v[i];
        }
        return r;
    };
    std::vector<std::vector<Ext>> tb;
    std::vector<Ext> e0(k, Ext(0.0));
    e0[0] = Ext(1.0);
    tb.push_back(e0);
    if (k >= 2) tb.push_back(apply_that(tb[0]));
    for (std::size_t i = 2; i < k; ++i) {
        auto w = apply_that(tb[i - 1]);
        for (std::size_t j = 0; j < k; ++j) w[j] = 2.0 * w[j] - tb[i - 2][j];
        tb.push_back(std::move(w));
    }

    const double vec_rhs = 9.0 * kk * kk * out.eps_hat;
    for (std::size_t i = 0; i < k; ++i) {
        Ext d2(0.0);
        for (std::size_t r = 0; r < n; ++r) {
            Ext qv(0.0);
            for (std::size_t j = 0; j < k; ++j) qv += run.Q[j][r] * tb[i][j];
            Ext diff = t[i][r] - qv;
            d2 += diff * diff;
        }
        ChebVectorRow row{i, sqrt(d2).hi, vec_rhs};
        if (row.lhs > row.rhs) ++out.vector_violations;
        out.vectors.push_back(row);
    }

    const Ext bb = dot(t[0], t[0]);
    const Ext bab = k >= 2 ? dot(t[0], t[1]) : Ext(0.0);
    const Ext eab = k >= 2 ? tb[1][0] : Ext(0.0);
    const double mom_rhs = 381.0 * kk * kk * out.eps_hat;
    for (std::size_t m = 0; m + 2 <= 2 * k; ++m) {
        Ext full, quad;
        if (m % 2 == 0) {
            const std::size_t i = m / 2;
            full = 2.0 * dot(t[i], t[i]) - bb;
            quad = 2.0 * dot(tb[i], tb[i]) - Ext(1.0);
        } else {
            const std::size_t i = m / 2;
            full = 2.0 * dot(t[i], t[i + 1]) - bab;
            quad = 2.0 * dot(tb[i], tb[i + 1]) - eab;
        }
        ChebMomentRow row{m, std::abs((full - quad).hi), mom_rhs};
        if (row.lhs > row.rhs) ++out.moment_violations;
        out.moments.push_back(row);
    }
    return out;
}

/** Largest L with ν([x, y]) ≥ L|x − y|^γ over pairs of an (m+1)-point grid of [a, b]. */
inline double regularity_constant(const Measure& nu, double gamma, std::size_t m = 400)
{
    auto [a, b] = nu.support();
    std::vector<double> x(m + 1), F(m + 1), FL(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(m);
        F[i] = cdf(nu, x[i]);
        FL[i] = cdf_left(nu, x[i]);
    }
    double L = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i + 1; j <= m; ++j) L = std::min(L, (F[j] - FL[i]) / std::pow(x[j] - x[i], gamma));
    return L;
}

/** K = inf over [x, x + δ] ⊆ [a, b] of μ([x, x + δ]) for a discrete μ (exact). */
inline double window_mass_infimum(const Measure& mu, double a, double b, double delta)
{
    const auto& d = mu.as_discrete();
    if (!(delta > 0.0) || delta > b - a) throw std::invalid_argument("window_mass_infimum: bad window");
    // Mass of a window only changes when an endpoint crosses an atom; check windows
    // starting just after each atom and ending just before each atom, plus both ends.
    std::vector<double> pts;
    for (const Ext& x : d.atoms) pts.push_back(x.hi);
    auto mass = [&](double lo, bool lo_open, double hi, bool hi_open) {
        Ext s(0.0);
        for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            const double v = d.atoms[i].hi;
            const bool in_lo = lo_open ? v > lo : v >= lo;
            const bool in_hi = hi_open ? v < hi : v <= hi;
            if (in_lo && in_hi) s += d.weights[i];
        }
        return s.hi;
    };
    double K = std::min(mass(a, false, a + delta, false), mass(b - delta, false, b, false));
    for (double p : pts) {
        if (p >= a && p + delta <= b) K = std::min(K, mass(p, true, p + delta, false));
        if (p - delta >= a && p <= b) K = std::min(K, mass(p - delta, false, p, true));
    }
    return K;
}

struct RegularityParams {
    double L = 0.0;
    double gamma = 1.5;
    double alpha = 1.0 / 3.0;
    double c = 1.0;  // target for Δ_k(μ_N, μ_∞; μ_∞)
};

struct RegularityLedger {
    std::size_t N = 0, k = 0;
    double a = 0.0, b = 0.0;
    double ks = 0.0;
    bool ks_assumption_holds = false;   // d_KS ≤ N^{−α}
    bool support_condition_holds = false;
    bool cor34_eligible = false;
    double cor34_measured = 0.0;        // P_k(μ_N; [a', b'])
    double cor34_rhs = 0.0;
    bool cor34_holds = false;
    bool cor35_eligible = false;
    double cor35_measured = 0.0;        // P_k(μ_∞; [a, b])
    double cor35_rhs = 0.0;
    double cor35_gap = 0.0;             // Δ_k(μ_N, μ_∞; μ_∞)
    bool cor35_holds = false;
};

/**
 * Regularity checks for μ_N against a named continuous μ_∞ with support [a, b].
 * Bound flags are literal comparisons; eligibility is reported separately.
 */
inline RegularityLedger evaluate_regularity(const Measure& mu_N, const Measure& mu_inf, std::size_t N,
                                            std::size_t k, const RegularityParams& prm)
{
    if (mu_N.kind() != MeasureKind::Discrete) throw std::invalid_argument("evaluate_regularity: μ_N must be discrete");
    if (!mu_inf.is_continuous()) throw std::invalid_argument("evaluate_regularity: μ_∞ must be continuous");
    RegularityLedger r;
    r.N = N;
    r.k = k;
    std::tie(r.a, r.b) = mu_inf.support();
    const double w = r.b - r.a, kk = static_cast<double>(k), Nd = static_cast<double>(N);
    r.ks = ks_distance(mu_N, mu_inf);
    r.ks_assumption_holds = r.ks <= std::pow(Nd, -prm.alpha);
    const double pad = w / (32.0 * kk * kk);
    auto [lo, hi] = mu_N.support();
    r.support_condition_holds = lo >= r.a - pad && hi <= r.b + pad;

    r.cor34_eligible = kk <= std::sqrt(w / 32.0) * std::pow(prm.L * std::pow(Nd, prm.alpha) / 3.0, 1.0 / (2.0 * prm.gamma));
    r.cor34_rhs = 4.0 / std::sqrt(prm.L) * std::pow(32.0 / w, prm.gamma / 2.0) * std::pow(kk, prm.gamma);
    auto basis_N = stieltjes_jacobi(mu_N, 2 * k);
    const std::size_t top = std::min(2 * k - 1, basis_N.max_degree());
    r.cor34_measured = max_sup_norm(basis_N, top, r.a - pad, r.b + pad);
    r.cor34_holds = r.cor34_measured <= r.cor34_rhs;

    r.cor35_eligible = kk <= std::pow(w / 16.0, prm.gamma / (4.0 + 2.0 * prm.gamma)) *
                                 std::pow(prm.c * std::sqrt(prm.L) * std::pow(Nd, prm.alpha) / 32.0, 1.0 / (2.0 + prm.gamma));
    r.cor35_rhs = 2.0 / std::sqrt(prm.L) * std::pow(16.0 / w, prm.gamma / 2.0) * std::pow(kk, prm.gamma);
    auto basis_inf = stieltjes_jacobi(mu_inf, 2 * k);
    r.cor35_measured = max_sup_norm(basis_inf, 2 * k - 1, r.a, r.b);
    r.cor35_gap = moment_gap(mu_N, mu_inf, basis_inf, 2 * k);
    r.cor35_holds = r.cor35_measured <= r.cor35_rhs && r.cor35_gap <= prm.c;
    return r;
}

/** M_n (row-major 2×2) for the pushforward of μ_ref to [−1, 1], and its density there. */
struct MnValue {
    std::array<std::complex<double>, 4> M;
    double rho = 0.0;  // ρ̂(y), zero off [−1, 1]
    std::complex<double> y;

    double rho_frobenius() const
    {
        double s = 0.0;
        for (const auto& m : M) s += std::norm(m);
        return rho * std::sqrt(s);
    }
};

namespace detail {

inline double pushforward_density(const Measure& ref, double y)
{
    if (y <= -1.0 || y >= 1.0) return 0.0;
    const double s = std::sqrt(1.0 - y * y);
    switch (ref.kind()) {
    case MeasureKind::Semicircle: return 2.0 / std::numbers::pi * s;
    case MeasureKind::MarchenkoPastur: {
        const double d = std::get<Measure::MarchenkoPastur>(ref.data()).d;
        const double x = 1.0 + d + 2.0 * std::sqrt(d) * y;
        return 2.0 * s / (std::numbers::pi * x);
    }
    default: throw std::invalid_argument("forward diagnostic: reference must be semicircle or Marchenko-Pastur");
    }
}

}  // namespace detail

/**
 * M_n(y; μ̂) = Y̌_n [[0,1],[0,0]] Y̌_n⁻¹ in orthonormal form: with
 * A = 𝔠^{−n}π_n and B = 𝔠^n γ_{n−1} π_{n−1}, γ_{n−1} = −2πi/‖π_{n−1}‖², 𝔠 = 1/2,
 * M = [[−AB, A²], [−B², AB]]. z is in the original coordinates.
 */
inline MnValue forward_diagnostic_Mn(const Measure& ref, std::size_t n, std::complex<double> z)
{
    if (ref.kind() != MeasureKind::Semicircle && ref.kind() != MeasureKind::MarchenkoPastur)
        throw std::invalid_argument("forward diagnostic: reference must be semicircle or Marchenko-Pastur");
    if (n < 1) throw std::invalid_argument("forward diagnostic: n must be >= 1");
    auto [a, b] = ref.support();
    auto basis = affine_pushforward(stieltjes_jacobi(ref, n + 1), a, b);
    const double cc = 0.5;
    const std::complex<double> y = (2.0 * z - (a + b)) / (b - a);
    auto p = eval_recurrence_all(basis.alphas, basis.betas, n, y);
    // N_m = Π_{j<m} β̂_j/𝔠 so that 𝔠^{−m}π_m = N_m p_m.
    std::vector<double> Nm(n + 1, 1.0);
    for (std::size_t j = 1; j <= n; ++j) Nm[j] = Nm[j - 1] * basis.betas[j - 1].hi / cc;
    const std::complex<double> A = Nm[n] * p[n];
    const std::complex<double> B = std::complex<double>(0.0, -2.0 * std::numbers::pi) * cc * p[n - 1] / Nm[n - 1];
    MnValue out;
    out.y = y;
    out.M = {-A * B, A * A, -B * B, A * B};
    out.rho = y.imag() == 0.0 ? detail::pushforward_density(ref, y.real()) : 0.0;
    return out;
}

/** Δ(n) ≈ sup over a grid of [a, b] of |h(x)|·‖ρ̂ M_n‖_F. */
inline double delta_n(const Measure& ref, const std::function<double(double)>& h, std::size_t n,
                      std::size_t grid = 2001)
{
    auto [a, b] = ref.support();
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < grid; ++i) {
        double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid - 1);
        s = std::max(s, std::abs(h(x)) * forward_diagnostic_Mn(ref, n, x).rho_frobenius());
    }
    return s;
}

/** Entrywise majorant of |ρ M_n| for the semicircle as displayed for μ_U. */
inline std::array<double, 4> semicircle_rhoMn_bound(std::size_t n, double z)
{
    const double un = std::abs(chebyshev_U(n, z));
    const double um = std::abs(chebyshev_U_signed(static_cast<long>(n) - 1, z));
    return {2.0 * um, 2.0 / std::numbers::pi * un, std::numbers::pi / 2.0 * um, 2.0 * um};
}

struct StabilityOptions {
    /** Reference μ; empty means μ_N (the VESD of the problem). */
    std::optional<Measure> reference;
    std::optional<std::pair<double, double>> interval;
    bool build_b_star = true;
    bool cheb_audit = true;
};

/** Collected measurements and bound evaluations for one run. */
struct StabilityReport {
    std::size_t k = 0;
    Precision precision = Precision::Work64;
    std::string reference_kind;
    double a = 0.0, b = 0.0;
    double A_norm = 0.0;
    double eps_lan = 0.0;
    double sigma = 1.0;
    double C = kConstC, D = kConstD;
    double P_k = 0.0;
    // moment gaps
    double gap_mubar_mu = 0.0;     // Δ_k(μ̄_k, μ; μ)
    double gap_star_N = 0.0;       // Δ_k(μ*, μ_N; μ)
    double gap_N_mu = 0.0;         // Δ_k(μ_N, μ; μ)
    double gap_mubar_N = 0.0;      // Δ_k(μ̄_k, μ_N; μ)
    double moment_match_error = 0.0;
    bool mu_star_signed = false;
    double h_sup_grid = 0.0;
    double h_sup_on_spectrum = 0.0;
    bool h_exceeds_one = false;
    std::optional<double> b_star_distance;
    std::vector<double> forward_alpha, forward_beta;    // vs exact run on (A, b)
    std::vector<double> backward_alpha, backward_beta;  // exact run on (A, b*) vs run
    // bound evaluations
    bool precondition_eps = false;       // ε_lan < 1/(σCk²)
    bool precondition_support = false;
    double thm_a_rhs = 0.0;              // Dσ P_k k³ ε_lan
    bool thm_a_holds = false;
    double thm_b_rhs = 0.0;              // 2k P_k (Δ(μ*,μ_N;μ) + Δ(μ_N,μ;μ))
    bool thm_b_holds = false;
    double h_bd_rhs = 0.0;               // 2k Δ_k(μ̄_k, μ; μ) P_k
    bool h_bd_holds = false;
    std::optional<double> b_star_rhs;    // 2σDk⁴P_k(μ_N)²ε_lan
    std::optional<bool> b_star_holds;
    std::optional<bool> b_star_remark_holds;  // ‖b − b*‖ ≤ ‖h(A)‖
    std::optional<ChebMomentAudit> cheb;
    std::optional<double> triangle_lhs, triangle_rhs;
    std::optional<bool> triangle_holds;
    bool bounds_satisfied = false;
};

/** Builds h, μ*, b* and every bound check for a run; `exact` is an exact-arithmetic run on (A, b). */
inline StabilityReport stability_report(const ProblemInstance& problem, const LanczosRun& run,
                                        const LanczosRun* exact = nullptr, const StabilityOptions& opt = {})
{
    StabilityReport rep;
    rep.k = run.steps();
    rep.precision = run.options.precision;
    const std::size_t k = rep.k;
    const double kk = static_cast<double>(k);

    auto E = dense_symmetric_eigen(problem.matrix);
    const SpectrumBounds sb{E.values.front(), E.values.back()};
    auto diag = measure_diagnostics(problem, run, sb);
    rep.eps_lan = diag.eps_lan;
    rep.A_norm = diag.A_norm;

    const Measure mu_N = vesd(E, problem.vector);
    const Measure mu = opt.reference ? *opt.reference : mu_N;
    rep.reference_kind = std::string(to_string(mu.kind()));
    auto h = build_h(run, mu, opt.interval);
    rep.a = h.a;
    rep.b = h.b;
    rep.P_k = h.P_k;
    rep.sigma = std::max(1.0, 2.0 * rep.A_norm / (rep.b - rep.a));
    rep.h_sup_grid = h.sup_norm_est;
    rep.gap_mubar_mu = h.delta_k;

    auto star = build_mu_star(h, mu);
    rep.mu_star_signed = star.is_signed;
    rep.moment_match_error = star.moment_match_error;
    rep.gap_star_N = moment_gap(star.measure, mu_N, h.reference, 2 * k);
    rep.gap_N_mu = moment_gap(mu_N, mu, h.reference, 2 * k);
    rep.gap_mubar_N = moment_gap(quadrature_measure(run.T), mu_N, h.reference, 2 * k);

    for (double lam : E.values) rep.h_sup_on_spectrum = std::max(rep.h_sup_on_spectrum, std::abs(h(lam)));
    rep.h_exceeds_one = rep.h_sup_on_spectrum >= 1.0;

    rep.precondition_eps = rep.eps_lan < 1.0 / (rep.sigma * kConstC * kk * kk);
    const double pad = (rep.b - rep.a) / (32.0 * kk * kk);
    rep.precondition_support = sb.lambda_min >= rep.a - pad && sb.lambda_max <= rep.b + pad;
    rep.thm_a_rhs = kConstD * rep.sigma * rep.P_k * kk * kk * kk * rep.eps_lan;
    rep.thm_a_holds = rep.gap_star_N <= rep.thm_a_rhs;
    rep.thm_b_rhs = 2.0 * kk * rep.P_k * (rep.gap_star_N + rep.gap_N_mu);
    rep.thm_b_holds = rep.h_sup_grid <= rep.thm_b_rhs;
    rep.h_bd_rhs = 2.0 * kk * h.delta_k * h.P_k;
    rep.h_bd_holds = h.h_bd_holds;
    bool ok = rep.thm_a_holds && rep.thm_b_holds && rep.h_bd_holds;

    if (exact) {
        auto fe = coefficient_errors(run.T, exact->T);
        rep.forward_alpha = fe.alpha;
        rep.forward_beta = fe.beta;
    }

    if (!opt.reference && opt.build_b_star && !rep.h_exceeds_one) {
        auto bs = build_b_star(problem, h, E);
        rep.b_star_distance = bs.distance;
        rep.b_star_rhs = 2.0 * rep.sigma * kConstD * kk * kk * kk * kk * rep.P_k * rep.P_k * rep.eps_lan;
        rep.b_star_holds = bs.distance <= *rep.b_star_rhs;
        rep.b_star_remark_holds = bs.distance <= bs.h_sup_on_spectrum;
        ok = ok && *rep.b_star_holds && *rep.b_star_remark_holds;
        LanczosRun star_run;
        auto be = verify_backward(problem, run, bs.vector, &star_run);
        rep.backward_alpha = be.alpha;
        rep.backward_beta = be.beta;
        if (exact) {
            // |α − ᾱ| ≤ |α* − ᾱ| + |α − α*| coefficientwise
            auto ee = coefficient_errors(exact->T, star_run.T);
            auto fe = coefficient_errors(run.T, exact->T);
            double lhs = fe.max(), rhs = be.max() + ee.max();
            rep.triangle_lhs = lhs;
            rep.triangle_rhs = rhs;
            rep.triangle_holds = lhs <= rhs;
            ok = ok && lhs <= rhs;
        }
    }
    if (opt.cheb_audit) {
        rep.cheb = check_cheb_moment_bound(problem, run, diag, sb);
        ok = ok && rep.cheb->moment_violations == 0 && rep.cheb->vector_violations == 0;
    }
    rep.bounds_satisfied = ok;
    return rep;
}

}  // namespace lanczos_lab
