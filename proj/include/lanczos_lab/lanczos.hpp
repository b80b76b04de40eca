#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "ensembles.hpp"
#include "linalg.hpp"
#include "scalars.hpp"
#include "spectral.hpp"

namespace lanczos_lab {

struct LanczosOptions {
    std::size_t k = 1;
    Precision precision = Precision::Work64;
    bool reorthogonalize = false;
    std::optional<double> breakdown_tol;  // default 10·n·u·‖A‖-estimate
};

/**
 * Output of Alg. 1. Q holds q̄_0..q̄_{m-1} and q_next holds q̄_m, where m = T.size()
 * is the number of completed steps. All values are stored exactly as they were
 * produced at the run's precision.
 */
struct LanczosRun {
    std::vector<std::vector<Ext>> Q;
    std::vector<Ext> q_next;
    JacobiMatrix T;
    Ext beta_last;  // β̄_{m-1}
    LanczosOptions options;
    std::optional<std::size_t> terminated_at;
    double breakdown_tol = 0.0;

    std::size_t steps() const { return T.size(); }
    std::size_t dim() const { return q_next.size(); }
};

class DivergentRun : public std::runtime_error {
public:
    DivergentRun(const std::string& what, std::size_t step)
        : std::runtime_error("divergent run: " + what), step_(step)
    {
    }
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

/** ‖A‖ estimate from `iterations` power steps at Work64, times (1 + 1e-10). */
inline double power_norm_estimate(const Matrix<double>& A, int iterations = 30)
{
    const std::size_t n = A.rows();
    Rng rng(0x6e6f726dULL);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    double nv = norm2(v);
    for (auto& x : v) x /= nv;
    double est = 0.0;
    for (int it = 0; it < iterations; ++it) {
        auto w = matvec(A, v);
        est = norm2(w);
        if (est == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / est;
    }
    return est * (1.0 + 1e-10);
}

namespace detail {

template <class T>
bool isfinite_value(const T& x)
{
    using std::isfinite;
    return isfinite(x);
}

template <class T>
LanczosRun run_lanczos_impl(const ProblemInstance& problem, const LanczosOptions& opts)
{
    using std::sqrt;
    using S = std::conditional_t<std::is_same_v<T, float>, float, double>;
    const std::size_t n = problem.dim();
    const std::size_t k = opts.k;
    if (k < 1) throw std::invalid_argument("run_lanczos: k must be >= 1");
    if (k > n) throw std::invalid_argument("run_lanczos: k must not exceed the dimension");
    if (problem.vector.size() != n) throw std::invalid_argument("run_lanczos: vector size mismatch");
    {
        Ext nb(0.0);
        for (const Ext& x : problem.vector) nb += x * x;
        if (std::abs((nb - 1.0).hi) > 1e-12) throw std::invalid_argument("run_lanczos: ‖b‖ must be 1");
    }

    Matrix<float> Af;
    if constexpr (std::is_same_v<S, float>) Af = problem.matrix.template cast<float>();
    const Matrix<S>& A = [&]() -> const Matrix<S>& {
        if constexpr (std::is_same_v<S, float>) return Af;
        else return problem.matrix;
    }();

    LanczosRun run;
    run.options = opts;
    run.breakdown_tol = opts.breakdown_tol.has_value()
                            ? *opts.breakdown_tol
                            : 10.0 * static_cast<double>(n) * ScalarTraits<T>::unit_roundoff *
                                  power_norm_estimate(problem.matrix);
    if (run.breakdown_tol < 0.0) throw std::invalid_argument("run_lanczos: breakdown_tol must be >= 0");
    const T tol = T(run.breakdown_tol);

    std::vector<std::vector<T>> Q;
    Q.reserve(k + 1);
    std::vector<T> q0(n);
    for (std::size_t i = 0; i < n; ++i) q0[i] = round_to<T>(problem.vector[i]);
    Q.push_back(std::move(q0));

    std::vector<T> alphas, betas;
    std::vector<T> w(n);
    for (std::size_t j = 0; j < k; ++j) {
        const std::vector<T>& q = Q[j];
        matvec<T, S>(A, std::span<const T>(q), std::span<T>(w));
        if (j > 0) {
            const T b = betas[j - 1];
            const std::vector<T>& qp = Q[j - 1];
            for (std::size_t i = 0; i < n; ++i) w[i] -= b * qp[i];
        }
        T alpha = dot(w, q);
        for (std::size_t i = 0; i < n; ++i) w[i] -= alpha * q[i];
        if (opts.reorthogonalize) {
            std::vector<T> c(j + 1);
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t l = 0; l <= j; ++l) c[l] = dot(Q[l], w);
                for (std::size_t l = 0; l <= j; ++l) {
                    const std::vector<T>& ql = Q[l];
                    for (std::size_t i = 0; i < n; ++i) w[i] -= c[l] * ql[i];
                }
            }
        }
        T beta = norm2(w);
        if (!isfinite_value(alpha) || !isfinite_value(beta))
            throw DivergentRun("non-finite coefficient at step " + std::to_string(j), j);
        alphas.push_back(alpha);
        if (beta <= tol) {
            run.terminated_at = j + 1;
            break;
        }
        betas.push_back(beta);
        std::vector<T> qn(n);
        for (std::size_t i = 0; i < n; ++i) qn[i] = w[i] / beta;
        Q.push_back(std::move(qn));
    }

    const std::size_t m = alphas.size();
    for (std::size_t j = 0; j < m; ++j) run.T.alphas.push_back(to_ext(alphas[j]));
    for (std::size_t j = 0; j + 1 < m; ++j) run.T.betas.push_back(to_ext(betas[j]));
    if (run.terminated_at) {
        run.beta_last = Ext(0.0);
        run.q_next.assign(n, Ext(0.0));
    } else {
        run.beta_last = to_ext(betas[m - 1]);
        run.q_next = to_ext(Q[m]);
    }
    run.Q.reserve(m);
    for (std::size_t j = 0; j < m; ++j) run.Q.push_back(to_ext(Q[j]));
    return run;
}

}  // namespace detail

/** Alg. 1 at opts.precision, optionally with classical Gram–Schmidt reorthogonalization (twice). */
inline LanczosRun run_lanczos(const ProblemInstance& problem, const LanczosOptions& opts)
{
    switch (opts.precision) {
    case Precision::Low32: return detail::run_lanczos_impl<float>(problem, opts);
    case Precision::Work64: return detail::run_lanczos_impl<double>(problem, opts);
    case Precision::Ext128: return detail::run_lanczos_impl<Ext>(problem, opts);
    }
    throw std::invalid_argument("run_lanczos: unknown precision");
}

/** Ext128 with reorthogonalization: the stand-in for exact arithmetic. */
inline LanczosRun run_exact_lanczos(const ProblemInstance& problem, std::size_t k)
{
    LanczosOptions o;
    o.k = k;
    o.precision = Precision::Ext128;
    o.reorthogonalize = true;
    return run_lanczos(problem, o);
}

struct SpectrumBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double norm() const { return std::max(std::abs(lambda_min), std::abs(lambda_max)); }
};

inline SpectrumBounds spectrum_bounds(const Matrix<double>& A)
{
    auto ev = symmetric_eigenvalues(A);
    return {ev.front(), ev.back()};
}

struct RoundingDiagnostics {
    double F_norm = 0.0;
    double DminusI_norm = 0.0;
    double H_norm = 0.0;
    double eta = 0.0;
    double eps_lan = 0.0;
    double A_norm = 0.0;
    Matrix<Ext> R;        // strictly upper part of Q̄ᵀQ̄
    std::vector<Ext> D;   // diagonal of Q̄ᵀQ̄
};

/**
 * F_k, R_k, D_k, H_k, η_k and ε_lan for a run, evaluated in extended precision.
 * ‖A‖ and Λ(A) extremes come from `bounds` when given, otherwise from a full
 * eigensolve of A.
 */
inline RoundingDiagnostics measure_diagnostics(const ProblemInstance& problem, const LanczosRun& run,
                                               std::optional<SpectrumBounds> bounds = std::nullopt)
{
    const std::size_t n = problem.dim();
    const std::size_t m = run.steps();
    if (m == 0) throw std::invalid_argument("measure_diagnostics: empty run");
    const SpectrumBounds sb = bounds ? *bounds : spectrum_bounds(problem.matrix);
    const auto& al = run.T.alphas;
    const auto& be = run.T.betas;
    auto beta_at = [&](std::size_t j) -> Ext { return j + 1 < m ? be[j] : run.beta_last; };
    auto q_at = [&](std::size_t j) -> const std::vector<Ext>& { return j < m ? run.Q[j] : run.q_next; };

    RoundingDiagnostics diag;
    diag.A_norm = sb.norm();

    Matrix<double> F(n, m);
    std::vector<Ext> aq(n);
    for (std::size_t j = 0; j < m; ++j) {
        matvec<Ext, double>(problem.matrix, std::span<const Ext>(run.Q[j]), std::span<Ext>(aq));
        const auto& qj = run.Q[j];
        const auto& qn = q_at(j + 1);
        const Ext bj = beta_at(j);
        for (std::size_t i = 0; i < n; ++i) {
            Ext r = aq[i] - al[j] * qj[i] - bj * qn[i];
            if (j > 0) r -= be[j - 1] * run.Q[j - 1][i];
            F(i, j) = r.hi;
        }
    }
    diag.F_norm = spectral_norm(F);

    Matrix<Ext> G(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) G(a, b) = G(b, a) = dot(run.Q[a], run.Q[b]);
    diag.R = Matrix<Ext>(m, m);
    diag.D.resize(m);
    double dmi = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
        diag.D[a] = G(a, a);
        dmi = std::max(dmi, std::abs((G(a, a) - 1.0).hi));
        for (std::size_t b = a + 1; b < m; ++b) diag.R(a, b) = G(a, b);
    }
    diag.DminusI_norm = dmi;

    // H = T̄R − RT̄ − β̄_{m-1} Q̄ᵀq̄_m e_{m-1}ᵀ
    const Matrix<Ext> Td = run.T.dense();
    Matrix<double> H(m, m);
    std::vector<Ext> qtq(m);
    for (std::size_t a = 0; a < m; ++a) qtq[a] = dot(run.Q[a], run.q_next);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            Ext s(0.0);
            for (std::size_t c = (a > 0 ? a - 1 : 0); c <= std::min(m - 1, a + 1); ++c) s += Td(a, c) * diag.R(c, b);
            for (std::size_t c = (b > 0 ? b - 1 : 0); c <= std::min(m - 1, b + 1); ++c) s -= diag.R(a, c) * Td(c, b);
            if (b == m - 1) s -= run.beta_last * qtq[a];
            H(a, b) = s.hi;
        }
    diag.H_norm = spectral_norm(H);

    std::vector<Ext> d = run.T.alphas, e = run.T.betas;
    auto theta = tridiag_eigenvalues(d, e);
    diag.eta = std::max({0.0, sb.lambda_min - theta.front().hi, theta.back().hi - sb.lambda_max});

    const double an = diag.A_norm > 0.0 ? diag.A_norm : 1.0;
    diag.eps_lan = std::max({diag.F_norm / an, diag.DminusI_norm, diag.H_norm / an, diag.eta / an});
    return diag;
}

}  // namespace lanczos_lab
