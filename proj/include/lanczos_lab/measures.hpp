#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "linalg.hpp"
#include "scalars.hpp"
#include "spectral.hpp"

namespace lanczos_lab {

/** Three-term recurrence evaluation of p_0..p_n at x; p_0 = 1. */
template <class X>
std::vector<X> eval_recurrence_all(const std::vector<Ext>& alphas, const std::vector<Ext>& betas,
                                   std::size_t n, const X& x)
{
    if (n > alphas.size() || n > betas.size())
        throw std::invalid_argument("eval_recurrence_all: degree exceeds recurrence length");
    auto cv = [](const Ext& v) -> X {
        if constexpr (std::is_same_v<X, Ext>) return v;
        else return X(v.hi);
    };
    std::vector<X> p(n + 1);
    p[0] = X(1.0);
    if (n >= 1) p[1] = (x - cv(alphas[0])) * p[0] / cv(betas[0]);
    for (std::size_t j = 1; j < n; ++j) p[j + 1] = ((x - cv(alphas[j])) * p[j] - cv(betas[j - 1]) * p[j - 1]) / cv(betas[j]);
    return p;
}

template <class X>
X eval_recurrence(const std::vector<Ext>& alphas, const std::vector<Ext>& betas, std::size_t n, const X& x)
{
    if (n > alphas.size() || n > betas.size())
        throw std::invalid_argument("eval_recurrence: degree exceeds recurrence length");
    auto cv = [](const Ext& v) -> X {
        if constexpr (std::is_same_v<X, Ext>) return v;
        else return X(v.hi);
    };
    X pm(0.0), p(1.0);
    for (std::size_t j = 0; j < n; ++j) {
        X next = (x - cv(alphas[j])) * p;
        if (j > 0) next -= cv(betas[j - 1]) * pm;
        next /= cv(betas[j]);
        pm = p;
        p = next;
    }
    return p;
}

/** h(x) = Σ_n coeffs[n]·p_n(x), with p_n given by a three-term recurrence. */
struct OrthoExpansion {
    std::vector<Ext> alphas, betas, coeffs;

    std::size_t degree() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

    template <class X>
    X operator()(const X& x) const
    {
        if (coeffs.empty()) return X(0.0);
        auto p = eval_recurrence_all(alphas, betas, coeffs.size() - 1, x);
        X s(0.0);
        for (std::size_t n = 0; n < coeffs.size(); ++n) {
            if constexpr (std::is_same_v<X, Ext>) s += coeffs[n] * p[n];
            else s += X(coeffs[n].hi) * p[n];
        }
        return s;
    }
};

enum class MeasureKind { Discrete, Semicircle, Arcsine, MarchenkoPastur, PerturbedContinuous };

inline std::string_view to_string(MeasureKind k)
{
    switch (k) {
    case MeasureKind::Discrete: return "discrete";
    case MeasureKind::Semicircle: return "semicircle";
    case MeasureKind::Arcsine: return "arcsine";
    case MeasureKind::MarchenkoPastur: return "marchenko-pastur";
    case MeasureKind::PerturbedContinuous: return "perturbed-continuous";
    }
    return "unknown";
}

/**
 * Probability measure on an interval: a discrete measure (ascending atoms), one of
 * the named continuous laws, or (1 + h)·base for a continuous base and polynomial h.
 * Continuous kinds are held symbolically.
 */
class Measure {
public:
    struct Discrete {
        std::vector<Ext> atoms, weights;
        bool is_signed = false;
    };
    struct Semicircle {
        double a = -1.0, b = 1.0;
    };
    struct Arcsine {
        double a = -1.0, b = 1.0;
    };
    struct MarchenkoPastur {
        double d = 0.5;
    };
    struct Perturbed {
        std::shared_ptr<const Measure> base;
        OrthoExpansion h;
        bool is_signed = false;
    };
    using Variant = std::variant<Discrete, Semicircle, Arcsine, MarchenkoPastur, Perturbed>;

    Measure() : v_(Semicircle{}) {}

    static Measure discrete(std::vector<Ext> atoms, std::vector<Ext> weights, bool allow_signed = false)
    {
        if (atoms.size() != weights.size()) throw std::invalid_argument("Measure::discrete: size mismatch");
        if (atoms.empty()) throw std::invalid_argument("Measure::discrete: no atoms");
        std::vector<std::size_t> idx(atoms.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
        Discrete d;
        d.atoms.reserve(atoms.size());
        d.weights.reserve(atoms.size());
        for (std::size_t i : idx) {
            if (!isfinite(atoms[i]) || !isfinite(weights[i]))
                throw std::invalid_argument("Measure::discrete: non-finite atom or weight");
            if (weights[i] < Ext(0.0)) {
                if (!allow_signed) throw std::invalid_argument("Measure::discrete: negative weight");
                d.is_signed = true;
            }
            d.atoms.push_back(atoms[i]);
            d.weights.push_back(weights[i]);
        }
        return Measure(std::move(d));
    }

    static Measure semicircle(double a = -1.0, double b = 1.0)
    {
        if (!(a < b)) throw std::invalid_argument("Measure::semicircle: need a < b");
        return Measure(Semicircle{a, b});
    }
    static Measure arcsine(double a = -1.0, double b = 1.0)
    {
        if (!(a < b)) throw std::invalid_argument("Measure::arcsine: need a < b");
        return Measure(Arcsine{a, b});
    }
    static Measure marchenko_pastur(double d)
    {
        if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("d must be in (0,1)");
        return Measure(MarchenkoPastur{d});
    }
    /** (1 + h)·base; signedness is recorded from the caller's knowledge of h on the support. */
    static Measure perturbed(const Measure& base, OrthoExpansion h, bool is_signed)
    {
        if (!base.is_continuous() || base.kind() == MeasureKind::PerturbedContinuous)
            throw std::invalid_argument("Measure::perturbed: base must be a named continuous measure");
        return Measure(Perturbed{std::make_shared<const Measure>(base), std::move(h), is_signed});
    }

    MeasureKind kind() const { return static_cast<MeasureKind>(v_.index()); }
    const Variant& data() const { return v_; }
    bool is_continuous() const { return kind() != MeasureKind::Discrete; }
    bool is_signed() const
    {
        if (auto* d = std::get_if<Discrete>(&v_)) return d->is_signed;
        if (auto* p = std::get_if<Perturbed>(&v_)) return p->is_signed;
        return false;
    }

    const Discrete& as_discrete() const
    {
        if (auto* d = std::get_if<Discrete>(&v_)) return *d;
        throw std::invalid_argument("Measure: not discrete");
    }

    std::size_t size() const { return kind() == MeasureKind::Discrete ? as_discrete().atoms.size() : 0; }

    /** Closed support interval. */
    std::pair<double, double> support() const
    {
        return std::visit(
            [](const auto& m) -> std::pair<double, double> {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, Discrete>) return {m.atoms.front().hi, m.atoms.back().hi};
                else if constexpr (std::is_same_v<M, Semicircle> || std::is_same_v<M, Arcsine>) return {m.a, m.b};
                else if constexpr (std::is_same_v<M, MarchenkoPastur>) {
                    double s = std::sqrt(m.d);
                    return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s)};
                } else return m.base->support();
            },
            v_);
    }

    Ext total_mass() const
    {
        if (auto* d = std::get_if<Discrete>(&v_)) {
            Ext s(0.0);
            for (const Ext& w : d->weights) s += w;
            return s;
        }
        if (auto* p = std::get_if<Perturbed>(&v_)) {
            // ∫(1 + h) dbase = 1 + c_0 since ∫p_n dbase = δ_{n0}.
            return p->h.coeffs.empty() ? Ext(1.0) : Ext(1.0) + p->h.coeffs[0];
        }
        return Ext(1.0);
    }

    /** Density of a continuous kind at x (0 outside the support). */
    double density(double x) const;

private:
    explicit Measure(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

namespace detail {

struct AffineFrame {
    double c, r;  // x = c + r·y maps [-1, 1] onto the support
};

inline AffineFrame frame_of(const Measure& m)
{
    auto [a, b] = m.support();
    return {(a + b) * 0.5, (b - a) * 0.5};
}

// Density in θ for x = c + r cos θ, i.e. ρ(x(θ))·r·sin θ. Smooth on [0, π].
inline double theta_weight(const Measure& m, double theta)
{
    const double s = std::sin(theta);
    switch (m.kind()) {
    case MeasureKind::Semicircle: return 2.0 / std::numbers::pi * s * s;
    case MeasureKind::Arcsine: return 1.0 / std::numbers::pi;
    case MeasureKind::MarchenkoPastur: {
        const double d = std::get<Measure::MarchenkoPastur>(m.data()).d;
        const double x = 1.0 + d + 2.0 * std::sqrt(d) * std::cos(theta);
        return 2.0 * s * s / (std::numbers::pi * x);
    }
    default: throw std::invalid_argument("theta_weight: not a named continuous measure");
    }
}

// Gauss–Legendre nodes and weights on [-1, 1] via Golub–Welsch.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t m)
{
    JacobiMatrix J;
    J.alphas.assign(m, Ext(0.0));
    for (std::size_t n = 0; n + 1 < m; ++n) {
        double k = static_cast<double>(n + 1);
        J.betas.push_back(Ext(k) / sqrt(Ext(4.0 * k * k - 1.0)));
    }
    auto E = tridiag_eigen(J);
    std::vector<double> x(m), w(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i] = E.values[i].hi;
        w[i] = 2.0 * (E.first_components[i] * E.first_components[i]).hi;
    }
    return {x, w};
}

// ∫ over θ in [t0, t1] of g(θ) with composite Gauss–Legendre.
template <class G>
auto integrate_theta(double t0, double t1, std::size_t m, std::size_t panels, G&& g)
{
    static thread_local std::size_t cached_m = 0;
    static thread_local std::pair<std::vector<double>, std::vector<double>> rule;
    if (cached_m != m) {
        rule = gauss_legendre(m);
        cached_m = m;
    }
    using R = decltype(g(0.0));
    R s{};
    const double h = (t1 - t0) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = t0 + h * static_cast<double>(p);
        for (std::size_t i = 0; i < m; ++i) {
            const double t = lo + 0.5 * h * (rule.first[i] + 1.0);
            s += g(t) * (0.5 * h * rule.second[i]);
        }
    }
    return s;
}

inline double named_density(const Measure& m, double x)
{
    auto [lo, hi] = m.support();
    if (x <= lo || x >= hi) return 0.0;
    auto f = frame_of(m);
    const double y = (x - f.c) / f.r;
    const double s = std::sqrt(std::max(0.0, 1.0 - y * y));
    switch (m.kind()) {
    case MeasureKind::Semicircle: return 2.0 / (std::numbers::pi * f.r) * s;
    case MeasureKind::Arcsine: return 1.0 / (std::numbers::pi * f.r * s);
    case MeasureKind::MarchenkoPastur: {
        const double d = std::get<Measure::MarchenkoPastur>(m.data()).d;
        return std::sqrt((hi - x) * (x - lo)) / (2.0 * std::numbers::pi * d * x);
    }
    default: throw std::invalid_argument("named_density: not a named continuous measure");
    }
}

inline double named_cdf(const Measure& m, double x)
{
    auto [lo, hi] = m.support();
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    auto f = frame_of(m);
    const double y = std::clamp((x - f.c) / f.r, -1.0, 1.0);
    switch (m.kind()) {
    case MeasureKind::Semicircle: return 0.5 + (y * std::sqrt(1.0 - y * y) + std::asin(y)) / std::numbers::pi;
    case MeasureKind::Arcsine: return 0.5 + std::asin(y) / std::numbers::pi;
    case MeasureKind::MarchenkoPastur: {
        const double d = std::get<Measure::MarchenkoPastur>(m.data()).d;
        const double root = std::sqrt((hi - x) * (x - lo));
        const double z = std::clamp(((1.0 + d) * x - (1.0 - d) * (1.0 - d)) / (2.0 * std::sqrt(d) * x), -1.0, 1.0);
        return 0.5 + (root + (1.0 + d) * std::asin(y) - (1.0 - d) * std::asin(z)) / (2.0 * std::numbers::pi * d);
    }
    default: throw std::invalid_argument("named_cdf: not a named continuous measure");
    }
}

}  // namespace detail

inline double Measure::density(double x) const
{
    if (kind() == MeasureKind::Discrete) throw std::invalid_argument("density: discrete measure");
    if (auto* p = std::get_if<Perturbed>(&v_)) return (1.0 + p->h(x)) * detail::named_density(*p->base, x);
    return detail::named_density(*this, x);
}

/** ν((−∞, x]). */
inline double cdf(const Measure& nu, double x)
{
    switch (nu.kind()) {
    case MeasureKind::Discrete: {
        const auto& d = nu.as_discrete();
        Ext s(0.0);
        for (std::size_t i = 0; i < d.atoms.size() && d.atoms[i] <= Ext(x); ++i) s += d.weights[i];
        return s.hi;
    }
    case MeasureKind::PerturbedContinuous: {
        const auto& p = std::get<Measure::Perturbed>(nu.data());
        const Measure& base = *p.base;
        auto [lo, hi] = base.support();
        if (x <= lo) return 0.0;
        if (x >= hi) return nu.total_mass().hi;
        auto f = detail::frame_of(base);
        const double tx = std::acos(std::clamp((x - f.c) / f.r, -1.0, 1.0));
        const std::size_t panels = 4 + p.h.degree() / 8;
        double extra = detail::integrate_theta(tx, std::numbers::pi, 32, panels, [&](double t) {
            return p.h(f.c + f.r * std::cos(t)) * detail::theta_weight(base, t);
        });
        return detail::named_cdf(base, x) + extra;
    }
    default: return detail::named_cdf(nu, x);
    }
}

/** ν((−∞, x)). */
inline double cdf_left(const Measure& nu, double x)
{
    if (nu.kind() != MeasureKind::Discrete) return cdf(nu, x);
    const auto& d = nu.as_discrete();
    Ext s(0.0);
    for (std::size_t i = 0; i < d.atoms.size() && d.atoms[i] < Ext(x); ++i) s += d.weights[i];
    return s.hi;
}

/** ν([x, y]). */
inline double interval_mass(const Measure& nu, double x, double y)
{
    if (x > y) throw std::invalid_argument("interval_mass: need x <= y");
    return cdf(nu, y) - cdf_left(nu, x);
}

/**
 * Kolmogorov–Smirnov distance. Discrete pairs are compared at every atom of the
 * union; a discrete measure against a continuous one at each atom from both sides.
 * Two continuous measures are compared on a 20001-point grid (an estimate).
 */
inline double ks_distance(const Measure& a, const Measure& b)
{
    if (a.is_signed() || b.is_signed()) throw std::invalid_argument("ks_distance: signed measure");
    for (const Measure* m : {&a, &b})
        if (std::abs((m->total_mass() - 1.0).hi) > 1e-12)
            throw std::invalid_argument("ks_distance: measures must have unit mass");

    if (a.kind() == MeasureKind::Discrete && b.kind() == MeasureKind::Discrete) {
        const auto& da = a.as_discrete();
        const auto& db = b.as_discrete();
        std::size_t i = 0, j = 0;
        Ext fa(0.0), fb(0.0);
        double sup = 0.0;
        while (i < da.atoms.size() || j < db.atoms.size()) {
            Ext x = (j >= db.atoms.size() || (i < da.atoms.size() && da.atoms[i] <= db.atoms[j])) ? da.atoms[i]
                                                                                                   : db.atoms[j];
            while (i < da.atoms.size() && da.atoms[i] == x) fa += da.weights[i++];
            while (j < db.atoms.size() && db.atoms[j] == x) fb += db.weights[j++];
            sup = std::max(sup, std::abs((fa - fb).hi));
        }
        return sup;
    }
    if (a.kind() == MeasureKind::Discrete || b.kind() == MeasureKind::Discrete) {
        const Measure& disc = a.kind() == MeasureKind::Discrete ? a : b;
        const Measure& cont = a.kind() == MeasureKind::Discrete ? b : a;
        const auto& d = disc.as_discrete();
        Ext f(0.0);
        double sup = 0.0;
        for (std::size_t i = 0; i < d.atoms.size();) {
            const double g = cdf(cont, d.atoms[i].hi);
            sup = std::max(sup, std::abs(f.hi - g));
            Ext x = d.atoms[i];
            while (i < d.atoms.size() && d.atoms[i] == x) f += d.weights[i++];
            sup = std::max(sup, std::abs(f.hi - g));
        }
        return sup;
    }
    auto [a0, a1] = a.support();
    auto [b0, b1] = b.support();
    const double lo = std::min(a0, b0), hi = std::max(a1, b1);
    double sup = 0.0;
    const int m = 20000;
    for (int i = 0; i <= m; ++i) {
        double x = lo + (hi - lo) * i / m;
        sup = std::max(sup, std::abs(cdf(a, x) - cdf(b, x)));
    }
    return sup;
}

/**
 * S(z; ν) = ∫ ν(dx)/(x − z). Closed forms for the named laws; exact sums for
 * discrete measures; the polynomial part of a perturbed measure by quadrature in θ.
 */
inline std::complex<double> stieltjes_transform(const Measure& nu, std::complex<double> z)
{
    using C = std::complex<double>;
    if (nu.kind() == MeasureKind::Discrete) {
        const auto& d = nu.as_discrete();
        C s(0.0);
        for (std::size_t i = 0; i < d.atoms.size(); ++i) {
            C den = C(d.atoms[i].hi) - z;
            if (den == C(0.0)) throw std::invalid_argument("stieltjes_transform: z coincides with an atom");
            s += d.weights[i].hi / den;
        }
        return s;
    }
    auto [lo, hi] = nu.support();
    if (z.imag() == 0.0 && z.real() >= lo && z.real() <= hi)
        throw std::invalid_argument("stieltjes_transform: z lies on the support");
    auto branch = [](C w) { return std::sqrt(w - 1.0) * std::sqrt(w + 1.0); };  // ~ w at infinity
    switch (nu.kind()) {
    case MeasureKind::Semicircle: {
        auto f = detail::frame_of(nu);
        C w = (z - f.c) / f.r;
        // 2(R − w) = −2/(w + R) without the cancellation at large |w|
        return -2.0 / (w + branch(w)) / f.r;
    }
    case MeasureKind::Arcsine: {
        auto f = detail::frame_of(nu);
        C w = (z - f.c) / f.r;
        return -1.0 / branch(w) / f.r;
    }
    case MeasureKind::MarchenkoPastur: {
        const double d = std::get<Measure::MarchenkoPastur>(nu.data()).d;
        // (1 − d − z + root)/(2dz) rationalized; root ~ z at infinity
        C root = std::sqrt(z - lo) * std::sqrt(z - hi);
        return -2.0 / (root + z - 1.0 + d);
    }
    case MeasureKind::PerturbedContinuous: {
        const auto& p = std::get<Measure::Perturbed>(nu.data());
        auto f = detail::frame_of(*p.base);
        C extra = detail::integrate_theta(0.0, std::numbers::pi, 32, 16 + p.h.degree() / 4, [&](double t) {
            double x = f.c + f.r * std::cos(t);
            return C(p.h(x) * detail::theta_weight(*p.base, t)) / (C(x) - z);
        });
        return stieltjes_transform(*p.base, z) + extra;
    }
    default: break;
    }
    throw std::invalid_argument("stieltjes_transform: unsupported measure");
}

/**
 * VESD from eigenvalues and projections u_jᵀb: atoms λ_j, weights (u_jᵀb)².
 * Atoms closer than merge_tol are merged (weights summed); exact zero weights are dropped.
 */
inline Measure vesd_from_projection(const SpectralProjection& sp, double merge_tol)
{
    std::vector<Ext> atoms, weights;
    for (std::size_t j = 0; j < sp.values.size(); ++j) {
        Ext w = sp.projections[j] * sp.projections[j];
        if (!atoms.empty() && std::abs((sp.values[j] - atoms.back()).hi) <= merge_tol) {
            weights.back() += w;
            continue;
        }
        atoms.push_back(sp.values[j]);
        weights.push_back(w);
    }
    std::vector<Ext> a2, w2;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (weights[i] != Ext(0.0)) {
            a2.push_back(atoms[i]);
            w2.push_back(weights[i]);
        }
    return Measure::discrete(std::move(a2), std::move(w2));
}

/**
 * Eigenvector empirical spectral distribution of (A, b). Ext128 uses the in-repo
 * double-double eigensolver; otherwise Work64. The merge tolerance is
 * 100·u(p)·‖A‖ at the precision of the eigensolve.
 */
inline Measure vesd(const Matrix<double>& A, const std::vector<Ext>& b, Precision p = Precision::Work64)
{
    auto sp = spectral_projection(A, b, p);
    double anorm = 0.0;
    for (const Ext& v : sp.values) anorm = std::max(anorm, std::abs(v.hi));
    const double u = p == Precision::Ext128 ? unit_roundoff(Precision::Ext128) : unit_roundoff(Precision::Work64);
    return vesd_from_projection(sp, 100.0 * u * anorm);
}

/** VESD from a full Work64 eigendecomposition; projections accumulated in double-double. */
inline Measure vesd(const DenseEigen& E, const std::vector<Ext>& b)
{
    const std::size_t n = E.values.size();
    if (b.size() != E.vectors.rows()) throw std::invalid_argument("vesd: dimension mismatch");
    SpectralProjection sp;
    sp.values.resize(n);
    sp.projections.assign(n, Ext(0.0));
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double* urow = E.vectors.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) sp.projections[j] += b[i] * urow[j];
    }
    double anorm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sp.values[j] = Ext(E.values[j]);
        anorm = std::max(anorm, std::abs(E.values[j]));
    }
    return vesd_from_projection(sp, 100.0 * unit_roundoff(Precision::Work64) * anorm);
}

/** Gaussian quadrature measure of a Jacobi matrix: atoms θ_n, weights (e_0ᵀs_n)². */
inline Measure quadrature_measure(const JacobiMatrix& J)
{
    auto E = tridiag_eigen(J);
    return Measure::discrete(E.values, E.weights());
}

/** m atoms at the (i − 1/2)/m quantiles, each of mass 1/m. */
inline Measure quantile_discretization(const Measure& mu, std::size_t m)
{
    if (!mu.is_continuous()) throw std::invalid_argument("quantile_discretization: continuous measure required");
    auto [lo, hi] = mu.support();
    std::vector<Ext> atoms(m), weights(m, Ext(1.0) / Ext(static_cast<double>(m)));
    for (std::size_t i = 0; i < m; ++i) {
        const double target = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 0.0; ++it) {
            double mid = 0.5 * (a + b);
            if (mid == a || mid == b) break;
            (cdf(mu, mid) < target ? a : b) = mid;
        }
        atoms[i] = 0.5 * (a + b);
    }
    return Measure::discrete(std::move(atoms), std::move(weights));
}

}  // namespace lanczos_lab
