#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "scalars.hpp"

namespace lanczos_lab {

enum class EnsembleKind { GOE, WignerGeneric, CovarianceGaussian, CovarianceRademacher, ExplicitDiagonal };

inline std::string_view to_string(EnsembleKind k)
{
    switch (k) {
    case EnsembleKind::GOE: return "goe";
    case EnsembleKind::WignerGeneric: return "wigner";
    case EnsembleKind::CovarianceGaussian: return "covariance-gaussian";
    case EnsembleKind::CovarianceRademacher: return "covariance-rademacher";
    case EnsembleKind::ExplicitDiagonal: return "diagonal";
    }
    return "unknown";
}

inline EnsembleKind parse_ensemble_kind(std::string_view s)
{
    if (s == "goe") return EnsembleKind::GOE;
    if (s == "wigner") return EnsembleKind::WignerGeneric;
    if (s == "covariance-gaussian" || s == "wishart") return EnsembleKind::CovarianceGaussian;
    if (s == "covariance-rademacher" || s == "rademacher") return EnsembleKind::CovarianceRademacher;
    if (s == "diagonal") return EnsembleKind::ExplicitDiagonal;
    throw std::invalid_argument("unknown ensemble kind '" + std::string(s) + "'");
}

enum class EntryDist { Gaussian, Rademacher };

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::GOE;
    std::size_t n = 1;
    double aspect_d = 0.0;  // covariance kinds only; M = round(n / d)
    std::uint64_t seed = 0;
    bool ones_vector = false;  // covariance kinds: b ∝ (1, ..., 1)
};

struct ProblemInstance {
    Matrix<double> matrix;
    std::vector<Ext> vector;  // unit b
    EnsembleSpec spec;

    std::size_t dim() const { return matrix.rows(); }
};

/** splitmix64 step; used to derive independent stream seeds. */
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/** mt19937_64 with 53-bit uniforms and Box–Muller normals. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /** Uniform on [0, 1). */
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    double rademacher() { return (eng_() >> 63) ? 1.0 : -1.0; }

    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

namespace detail {

constexpr std::uint64_t kVectorStream = 0x5eed0fb0c7a11ULL;

inline std::vector<Ext> normalize(const std::vector<double>& g)
{
    Ext s(0.0);
    for (double x : g) s += Ext::from_product(x, x);
    Ext nrm = sqrt(s);
    std::vector<Ext> b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) b[i] = Ext(g[i]) / nrm;
    return b;
}

}  // namespace detail

/** Unit vector with iid Gaussian direction, from an independent stream of `seed`. */
inline std::vector<Ext> random_unit_vector(std::size_t n, std::uint64_t seed)
{
    Rng rng(splitmix64(seed ^ detail::kVectorStream));
    std::vector<double> g(n);
    for (auto& x : g) x = rng.normal();
    return detail::normalize(g);
}

inline std::vector<Ext> ones_unit_vector(std::size_t n)
{
    return detail::normalize(std::vector<double>(n, 1.0));
}

/** A = (X + Xᵀ) / (2√(2n)) with X iid standard normal; b uniform on the sphere. */
inline ProblemInstance sample_goe(std::size_t n, std::uint64_t seed)
{
    if (n == 0) throw std::invalid_argument("sample_goe: n must be >= 1");
    Rng rng(seed);
    Matrix<double> X(n, n);
    for (auto& x : X.storage()) x = rng.normal();
    ProblemInstance p;
    p.matrix = Matrix<double>(n, n);
    const double scale = 1.0 / (2.0 * std::sqrt(2.0 * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = (X(i, j) + X(j, i)) * scale;
            p.matrix(i, j) = v;
            p.matrix(j, i) = v;
        }
    p.vector = random_unit_vector(n, seed);
    p.spec = {EnsembleKind::GOE, n, 0.0, seed, false};
    return p;
}

/** Symmetric Wigner matrix with unit-variance entries (diagonal included), scaled by 1/(2√n). */
inline ProblemInstance sample_wigner(std::size_t n, std::uint64_t seed)
{
    if (n == 0) throw std::invalid_argument("sample_wigner: n must be >= 1");
    Rng rng(seed);
    ProblemInstance p;
    p.matrix = Matrix<double>(n, n);
    const double scale = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = rng.normal() * scale;
            p.matrix(i, j) = v;
            p.matrix(j, i) = v;
        }
    p.vector = random_unit_vector(n, seed);
    p.spec = {EnsembleKind::WignerGeneric, n, 0.0, seed, false};
    return p;
}

inline std::size_t covariance_columns(std::size_t n, double d)
{
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) / d));
}

/**
 * Sample covariance A = X Xᵀ / M with X of shape n×M, M = round(n/d). This
 * normalization puts the spectrum on [(1−√d)², (1+√d)²].
 */
inline ProblemInstance sample_covariance(std::size_t n, double d, std::uint64_t seed, EntryDist dist,
                                         bool ones_vector = false)
{
    if (n == 0) throw std::invalid_argument("sample_covariance: n must be >= 1");
    if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("d must be in (0,1)");
    const std::size_t M = covariance_columns(n, d);
    Rng rng(seed);
    Matrix<double> X(n, M);
    if (dist == EntryDist::Gaussian)
        for (auto& x : X.storage()) x = rng.normal();
    else
        for (auto& x : X.storage()) x = rng.rademacher();

    ProblemInstance p;
    p.matrix = Matrix<double>(n, n);
    const double inv = 1.0 / static_cast<double>(M);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = X.data() + i * M;
        std::size_t j = 0;
        for (; j + 4 <= i + 1; j += 4) {
            const double* x0 = X.data() + j * M;
            const double* x1 = x0 + M;
            const double* x2 = x1 + M;
            const double* x3 = x2 + M;
            double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
            for (std::size_t t = 0; t < M; ++t) {
                const double a = xi[t];
                s0 += a * x0[t];
                s1 += a * x1[t];
                s2 += a * x2[t];
                s3 += a * x3[t];
            }
            p.matrix(i, j) = s0 * inv;
            p.matrix(i, j + 1) = s1 * inv;
            p.matrix(i, j + 2) = s2 * inv;
            p.matrix(i, j + 3) = s3 * inv;
        }
        for (; j <= i; ++j) {
            const double* xj = X.data() + j * M;
            double s = 0;
            for (std::size_t t = 0; t < M; ++t) s += xi[t] * xj[t];
            p.matrix(i, j) = s * inv;
        }
        for (std::size_t jj = 0; jj < i; ++jj) p.matrix(jj, i) = p.matrix(i, jj);
    }
    p.vector = ones_vector ? ones_unit_vector(n) : random_unit_vector(n, seed);
    p.spec = {dist == EntryDist::Gaussian ? EnsembleKind::CovarianceGaussian : EnsembleKind::CovarianceRademacher,
              n, d, seed, ones_vector};
    return p;
}

inline ProblemInstance explicit_diagonal(const std::vector<double>& diag, std::vector<Ext> b)
{
    const std::size_t n = diag.size();
    if (n == 0 || b.size() != n) throw std::invalid_argument("explicit_diagonal: size mismatch");
    ProblemInstance p;
    p.matrix = Matrix<double>(n, n);
    for (std::size_t i = 0; i < n; ++i) p.matrix(i, i) = diag[i];
    p.vector = std::move(b);
    p.spec = {EnsembleKind::ExplicitDiagonal, n, 0.0, 0, false};
    return p;
}

/** Problem from an explicit symmetric matrix; b is normalized in extended precision. */
inline ProblemInstance make_problem(Matrix<double> A, const std::vector<double>& b)
{
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw std::invalid_argument("make_problem: dimension mismatch");
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (A(i, j) != A(j, i)) throw std::invalid_argument("make_problem: matrix not symmetric");
    ProblemInstance p;
    p.matrix = std::move(A);
    p.vector = detail::normalize(b);
    p.spec = {EnsembleKind::ExplicitDiagonal, b.size(), 0.0, 0, false};
    return p;
}

inline ProblemInstance sample(const EnsembleSpec& s)
{
    switch (s.kind) {
    case EnsembleKind::GOE: return sample_goe(s.n, s.seed);
    case EnsembleKind::WignerGeneric: return sample_wigner(s.n, s.seed);
    case EnsembleKind::CovarianceGaussian:
        return sample_covariance(s.n, s.aspect_d, s.seed, EntryDist::Gaussian, s.ones_vector);
    case EnsembleKind::CovarianceRademacher:
        return sample_covariance(s.n, s.aspect_d, s.seed, EntryDist::Rademacher, s.ones_vector);
    case EnsembleKind::ExplicitDiagonal:
        throw std::invalid_argument("sample: diagonal problems are built with explicit_diagonal");
    }
    throw std::invalid_argument("sample: unknown kind");
}

namespace detail {

inline std::string hexfloat(double x)
{
    std::ostringstream os;
    os << std::hexfloat << x;
    return os.str();
}

}  // namespace detail

/**
 * Text dump: a header, the lower triangle in row-major order (one row per line),
 * then b as "hi lo" pairs. Values are hexfloats so replay is bit-exact.
 */
inline void write_instance(std::ostream& os, const ProblemInstance& p)
{
    os << "lanczos-lab-instance 1\n";
    os << "kind " << to_string(p.spec.kind) << "\n";
    os << "n " << p.dim() << "\n";
    os << "aspect_d " << detail::hexfloat(p.spec.aspect_d) << "\n";
    os << "seed " << p.spec.seed << "\n";
    os << "ones_vector " << (p.spec.ones_vector ? 1 : 0) << "\n";
    os << "matrix\n";
    for (std::size_t i = 0; i < p.dim(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) os << (j ? " " : "") << detail::hexfloat(p.matrix(i, j));
        os << "\n";
    }
    os << "vector\n";
    for (const Ext& b : p.vector) os << detail::hexfloat(b.hi) << " " << detail::hexfloat(b.lo) << "\n";
}

inline ProblemInstance read_instance(std::istream& is)
{
    auto expect = [&](const std::string& key) {
        std::string tok;
        if (!(is >> tok) || tok != key) throw std::runtime_error("read_instance: expected '" + key + "'");
    };
    auto read_double = [&]() {
        std::string tok;
        if (!(is >> tok)) throw std::runtime_error("read_instance: truncated input");
        return std::strtod(tok.c_str(), nullptr);
    };
    expect("lanczos-lab-instance");
    int version = 0;
    is >> version;
    if (version != 1) throw std::runtime_error("read_instance: unsupported version");
    ProblemInstance p;
    std::string kind;
    expect("kind");
    is >> kind;
    p.spec.kind = parse_ensemble_kind(kind);
    expect("n");
    is >> p.spec.n;
    expect("aspect_d");
    p.spec.aspect_d = read_double();
    expect("seed");
    is >> p.spec.seed;
    expect("ones_vector");
    int ones = 0;
    is >> ones;
    p.spec.ones_vector = ones != 0;
    expect("matrix");
    const std::size_t n = p.spec.n;
    p.matrix = Matrix<double>(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double v = read_double();
            p.matrix(i, j) = v;
            p.matrix(j, i) = v;
        }
    expect("vector");
    p.vector.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double hi = read_double();
        double lo = read_double();
        p.vector[i] = Ext(hi, lo);
    }
    return p;
}

}  // namespace lanczos_lab
