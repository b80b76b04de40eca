#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ensembles.hpp"
#include "lanczos.hpp"
#include "linalg.hpp"
#include "scalars.hpp"

namespace lanczos_lab {

class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(const std::string& what, std::size_t pivot)
        : std::runtime_error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot)
    {
    }
    std::size_t pivot() const { return pivot_; }

private:
    std::size_t pivot_;
};

/** Solves T y = e_0 for the leading k×k block by LDLᵀ at Work64. */
inline std::vector<double> solve_tridiagonal_e0(const JacobiMatrix& T, std::size_t k)
{
    if (k < 1 || k > T.size()) throw std::invalid_argument("solve_tridiagonal_e0: bad k");
    std::vector<double> d(k), l(k > 1 ? k - 1 : 0);
    d[0] = T.alphas[0].hi;
    if (!(d[0] > 0.0)) throw NotPositiveDefinite("T_k is not positive definite", 0);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const double b = T.betas[i].hi;
        l[i] = b / d[i];
        d[i + 1] = T.alphas[i + 1].hi - l[i] * b;
        if (!(d[i + 1] > 0.0)) throw NotPositiveDefinite("T_k is not positive definite", i + 1);
    }
    // L z = e_0 gives z_i = (−1)^i Π l; then D w = z and Lᵀ y = w.
    std::vector<double> y(k);
    double z = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (i > 0) z = -l[i - 1] * z;
        y[i] = z / d[i];
    }
    for (std::size_t i = k - 1; i-- > 0;) y[i] -= l[i] * y[i + 1];
    return y;
}

/** x̄_k = Q̄_k T̄_k⁻¹ e_0. */
inline std::vector<Ext> lanczos_solve(const ProblemInstance& problem, const LanczosRun& run, std::size_t k)
{
    if (k > run.steps()) throw std::invalid_argument("lanczos_solve: k exceeds completed steps");
    auto y = solve_tridiagonal_e0(run.T, k);
    std::vector<Ext> x(problem.dim(), Ext(0.0));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += run.Q[j][i] * y[j];
    return x;
}

/**
 * x̂ = A⁻¹b to double-double accuracy: Work64 Cholesky, then iterative refinement
 * with residuals in double-double. Reused for every A-norm error of one problem.
 */
class ANormOracle {
public:
    explicit ANormOracle(const ProblemInstance& problem) : A_(problem.matrix)
    {
        const std::size_t n = A_.rows();
        L_ = A_;
        for (std::size_t j = 0; j < n; ++j) {
            double s = L_(j, j);
            for (std::size_t p = 0; p < j; ++p) s -= L_(j, p) * L_(j, p);
            if (!(s > 0.0)) throw NotPositiveDefinite("A is not SPD", j);
            const double ljj = std::sqrt(s);
            L_(j, j) = ljj;
            for (std::size_t i = j + 1; i < n; ++i) {
                double t = L_(i, j);
                const double* li = L_.data() + i * n;
                const double* lj = L_.data() + j * n;
                for (std::size_t p = 0; p < j; ++p) t -= li[p] * lj[p];
                L_(i, j) = t / ljj;
            }
        }
        xhat_.assign(n, Ext(0.0));
        std::vector<Ext> r = problem.vector;
        for (int it = 0; it < 10; ++it) {
            auto c = cholesky_solve(to_double(r));
            double cmax = 0.0, xmax = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                xhat_[i] += c[i];
                cmax = std::max(cmax, std::abs(c[i]));
                xmax = std::max(xmax, std::abs(xhat_[i].hi));
            }
            auto ax = matvec<Ext, double>(A_, xhat_);
            for (std::size_t i = 0; i < n; ++i) r[i] = problem.vector[i] - ax[i];
            if (cmax <= 4.0 * unit_roundoff(Precision::Ext128) * xmax) break;
        }
    }

    const std::vector<Ext>& solution() const { return xhat_; }

    /** ‖x̂ − x‖_A. */
    double error(const std::vector<Ext>& x) const
    {
        const std::size_t n = xhat_.size();
        if (x.size() != n) throw std::invalid_argument("a_norm_error: size mismatch");
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) e[i] = (xhat_[i] - x[i]).hi;
        auto ae = matvec<double, double>(A_, e);
        double q = 0.0;
        for (std::size_t i = 0; i < n; ++i) q += e[i] * ae[i];
        return std::sqrt(std::max(q, 0.0));
    }

private:
    std::vector<double> cholesky_solve(std::vector<double> b) const
    {
        const std::size_t n = b.size();
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            const double* li = L_.data() + i * n;
            for (std::size_t p = 0; p < i; ++p) s -= li[p] * b[p];
            b[i] = s / li[i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i];
            for (std::size_t p = i + 1; p < n; ++p) s -= L_(p, i) * b[p];
            b[i] = s / L_(i, i);
        }
        return b;
    }

    Matrix<double> A_;
    Matrix<double> L_;
    std::vector<Ext> xhat_;
};

inline double a_norm_error(const ProblemInstance& problem, const std::vector<Ext>& x)
{
    return ANormOracle(problem).error(x);
}

/** d^{k/2}/(1 − d). */
inline double cg_limit(double d, std::size_t k)
{
    return std::pow(d, 0.5 * static_cast<double>(k)) / (1.0 - d);
}

/** First k such that e_{j+1} > 0.99 e_j for j = k, k+1, k+2. */
inline std::optional<std::size_t> stagnation_index(const std::vector<double>& errors, std::size_t first_k = 1)
{
    for (std::size_t i = 0; i + 3 < errors.size(); ++i) {
        bool flat = true;
        for (std::size_t j = i; j < i + 3; ++j) flat = flat && errors[j + 1] > 0.99 * errors[j];
        if (flat) return first_k + i;
    }
    return std::nullopt;
}

struct SolveTrace {
    std::vector<std::size_t> ks;
    std::vector<double> errors;       // ‖A⁻¹b − x̄_k‖_A
    std::vector<double> limit_curve;  // d^{k/2}/(1 − d)
    std::optional<std::size_t> stagnation;
    Precision precision = Precision::Work64;
    std::uint64_t seed = 0;

    /** Number of leading entries up to and including the stagnation point. */
    std::size_t curve_length() const
    {
        if (!stagnation) return errors.size();
        return std::min(errors.size(), *stagnation - ks.front() + 1);
    }
};

/** A-norm errors of x̄_1..x̄_m for every completed step of the run. */
inline SolveTrace solve_trace(const ProblemInstance& problem, const LanczosRun& run, double d,
                              const ANormOracle& oracle)
{
    SolveTrace tr;
    tr.precision = run.options.precision;
    tr.seed = problem.spec.seed;
    for (std::size_t k = 1; k <= run.steps(); ++k) {
        std::vector<Ext> x;
        try {
            x = lanczos_solve(problem, run, k);
        } catch (const NotPositiveDefinite&) {
            break;
        }
        tr.ks.push_back(k);
        tr.errors.push_back(oracle.error(x));
        tr.limit_curve.push_back(cg_limit(d, k));
    }
    if (!tr.ks.empty()) tr.stagnation = stagnation_index(tr.errors, tr.ks.front());
    return tr;
}

inline SolveTrace solve_trace(const ProblemInstance& problem, const LanczosRun& run, double d)
{
    return solve_trace(problem, run, d, ANormOracle(problem));
}

}  // namespace lanczos_lab
