#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "scalars.hpp"

#if defined(LANCZOS_LAB_HAVE_LAPACK)
extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda, double* w,
             double* work, const int* lwork, int* iwork, const int* liwork, int* info, std::size_t,
             std::size_t);
void dsytrd_(const char* uplo, const int* n, double* a, const int* lda, double* d, double* e,
             double* tau, double* work, const int* lwork, int* info, std::size_t);
void dormtr_(const char* side, const char* uplo, const char* trans, const int* m, const int* n,
             const double* a, const int* lda, const double* tau, double* c, const int* ldc,
             double* work, const int* lwork, int* info, std::size_t, std::size_t, std::size_t);
}
#endif

namespace lanczos_lab {

/** Symmetric tridiagonal matrix: alphas on the diagonal, betas off it. */
struct JacobiMatrix {
    std::vector<Ext> alphas;  // α_0..α_{k-1}
    std::vector<Ext> betas;   // β_0..β_{k-2}

    std::size_t size() const { return alphas.size(); }

    /** Leading k×k block. */
    JacobiMatrix leading(std::size_t k) const
    {
        k = std::min(k, size());
        JacobiMatrix j;
        j.alphas.assign(alphas.begin(), alphas.begin() + static_cast<std::ptrdiff_t>(k));
        j.betas.assign(betas.begin(), betas.begin() + static_cast<std::ptrdiff_t>(k ? k - 1 : 0));
        return j;
    }

    void validate() const
    {
        if (alphas.empty()) throw std::invalid_argument("JacobiMatrix: empty");
        if (betas.size() + 1 != alphas.size())
            throw std::invalid_argument("JacobiMatrix: need exactly k-1 off-diagonal entries");
        for (const Ext& b : betas)
            if (!(b > Ext(0.0))) throw std::invalid_argument("JacobiMatrix: betas must be positive");
    }

    Matrix<Ext> dense() const
    {
        const std::size_t k = size();
        Matrix<Ext> m(k, k);
        for (std::size_t i = 0; i < k; ++i) {
            m(i, i) = alphas[i];
            if (i + 1 < k) m(i, i + 1) = m(i + 1, i) = betas[i];
        }
        return m;
    }
};

/** Eigenvalues of a Jacobi matrix and the first components of its eigenvectors. */
struct EigenDecomposition {
    std::vector<Ext> values;
    std::vector<Ext> first_components;

    std::vector<Ext> weights() const
    {
        std::vector<Ext> w(first_components.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = first_components[i] * first_components[i];
        return w;
    }
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::size_t index)
        : std::runtime_error(what + " (index " + std::to_string(index) + ")"), index_(index)
    {
    }
    std::size_t index() const { return index_; }

private:
    std::size_t index_;
};

namespace detail {

template <class T>
T pythag(const T& a, const T& b)
{
    using std::abs;
    using std::sqrt;
    T x = abs(a), y = abs(b);
    if (x < y) std::swap(x, y);
    if (x == T(0)) return T(0);
    T r = y / x;
    return x * sqrt(T(1) + r * r);
}

template <class T>
T copy_sign(const T& mag, const T& sgn)
{
    using std::abs;
    return sgn >= T(0) ? abs(mag) : -abs(mag);
}

}  // namespace detail

/**
 * Implicit-shift QL on a symmetric tridiagonal matrix (diagonal d, off-diagonal e
 * with e[i] coupling d[i] and d[i+1]; e.size() == d.size(), last entry ignored).
 * Every plane rotation is applied as a column operation to the row vectors in
 * `rows` (nrows × n), so starting from e_0ᵀ yields first eigenvector components
 * and starting from cᵀ yields Sᵀc. Eigenvalues are left unsorted in d.
 */
template <class T>
void tridiagonal_ql(std::vector<T>& d, std::vector<T>& e, Matrix<T>* rows)
{
    using std::abs;
    const std::size_t n = d.size();
    if (n == 0) return;
    e.resize(n);
    e[n - 1] = T(0);
    const double u = ScalarTraits<T>::unit_roundoff;
    const std::size_t max_total = 50 * std::max<std::size_t>(n, 1);
    std::size_t total = 0;
    const std::size_t nr = rows ? rows->rows() : 0;

    for (std::size_t l = 0; l < n; ++l) {
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                T dd = abs(d[m]) + abs(d[m + 1]);
                if (abs(e[m]) <= dd * u) break;
            }
            if (m != l) {
                if (++total > max_total)
                    throw ConvergenceError("tridiagonal QL failed to converge", l);
                T g = (d[l + 1] - d[l]) / (T(2) * e[l]);
                T r = detail::pythag(g, T(1));
                g = d[m] - d[l] + e[l] / (g + detail::copy_sign(r, g));
                T s(1), c(1), p(0);
                bool underflow = false;
                std::size_t i = m;
                while (i-- > l) {
                    T f = s * e[i];
                    T b = c * e[i];
                    r = detail::pythag(f, g);
                    e[i + 1] = r;
                    if (r == T(0)) {
                        d[i + 1] -= p;
                        e[m] = T(0);
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + T(2) * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (std::size_t k = 0; k < nr; ++k) {
                        T& zi = (*rows)(k, i);
                        T& zi1 = (*rows)(k, i + 1);
                        T fz = zi1;
                        zi1 = s * zi + c * fz;
                        zi = c * zi - s * fz;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = T(0);
            }
        } while (m != l);
    }
}

namespace detail {

// Ascending values, ties broken by weight descending (weight = squared row-0 entry).
template <class T>
std::vector<std::size_t> eigen_order(const std::vector<T>& values, const Matrix<T>* rows)
{
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] < values[b]) return true;
        if (values[b] < values[a]) return false;
        if (!rows || rows->rows() == 0) return false;
        using std::abs;
        return abs((*rows)(0, b)) < abs((*rows)(0, a));
    });
    return idx;
}

template <class T>
void permute_columns(Matrix<T>& m, const std::vector<std::size_t>& idx)
{
    Matrix<T> out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(i, idx[j]);
    m = std::move(out);
}

}  // namespace detail

/** Eigenvalues and first eigenvector components of J, computed in extended precision. */
inline EigenDecomposition tridiag_eigen(const JacobiMatrix& J)
{
    if (J.alphas.empty()) throw std::invalid_argument("tridiag_eigen: empty Jacobi matrix");
    if (J.betas.size() + 1 != J.alphas.size())
        throw std::invalid_argument("tridiag_eigen: need k-1 off-diagonal entries");
    const std::size_t k = J.size();
    std::vector<Ext> d = J.alphas;
    std::vector<Ext> e(J.betas);
    Matrix<Ext> row(1, k);
    row(0, 0) = Ext(1.0);
    tridiagonal_ql(d, e, &row);
    auto idx = detail::eigen_order(d, &row);
    EigenDecomposition out;
    out.values.resize(k);
    out.first_components.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.values[j] = d[idx[j]];
        out.first_components[j] = row(0, idx[j]);
    }
    return out;
}

/** Eigenvalues only, ascending. */
template <class T>
std::vector<T> tridiag_eigenvalues(std::vector<T> d, std::vector<T> e)
{
    tridiagonal_ql<T>(d, e, nullptr);
    std::sort(d.begin(), d.end());
    return d;
}

/**
 * Householder reduction A = Q T Qᵀ of a symmetric matrix. The reflectors are kept
 * so that Qᵀ can be applied to vectors without forming Q.
 */
template <class T>
struct Tridiagonalization {
    std::vector<T> d, e;               // T's diagonal and off-diagonal (e.size() == n)
    std::vector<std::vector<T>> v;     // reflector k acts on indices k+1..n-1
    std::vector<T> tau;

    std::vector<T> apply_qt(std::vector<T> b) const
    {
        for (std::size_t k = 0; k < v.size(); ++k) apply_reflector(k, b);
        return b;
    }

    Matrix<T> form_q() const
    {
        const std::size_t n = d.size();
        Matrix<T> Q = Matrix<T>::identity(n);
        for (std::size_t kk = v.size(); kk-- > 0;) {
            const auto& vk = v[kk];
            if (tau[kk] == T(0)) continue;
            const std::size_t off = kk + 1;
            for (std::size_t j = 0; j < n; ++j) {
                T s(0);
                for (std::size_t i = 0; i < vk.size(); ++i) s += vk[i] * Q(off + i, j);
                s *= tau[kk];
                for (std::size_t i = 0; i < vk.size(); ++i) Q(off + i, j) -= s * vk[i];
            }
        }
        return Q;
    }

private:
    void apply_reflector(std::size_t k, std::vector<T>& b) const
    {
        if (tau[k] == T(0)) return;
        const auto& vk = v[k];
        const std::size_t off = k + 1;
        T s(0);
        for (std::size_t i = 0; i < vk.size(); ++i) s += vk[i] * b[off + i];
        s *= tau[k];
        for (std::size_t i = 0; i < vk.size(); ++i) b[off + i] -= s * vk[i];
    }
};

template <class T>
Tridiagonalization<T> householder_tridiagonalize(Matrix<T> A)
{
    using std::abs;
    using std::sqrt;
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("householder_tridiagonalize: matrix not square");
    Tridiagonalization<T> out;
    out.d.assign(n, T(0));
    out.e.assign(n, T(0));
    std::vector<T> p(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        std::vector<T> x(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = A(k + 1 + i, k);
        T xn = norm2(x);
        out.d[k] = A(k, k);
        if (xn == T(0)) {
            out.e[k] = T(0);
            out.v.push_back(std::move(x));
            out.tau.push_back(T(0));
            continue;
        }
        T alpha = x[0] >= T(0) ? -xn : xn;
        x[0] -= alpha;
        T vtv = dot(x, x);
        T tau = T(2) / vtv;
        out.e[k] = alpha;
        // p = tau * A22 v
        for (std::size_t i = 0; i < m; ++i) {
            T s(0);
            for (std::size_t j = 0; j < m; ++j) s += A(k + 1 + i, k + 1 + j) * x[j];
            p[i] = tau * s;
        }
        T K(0);
        for (std::size_t i = 0; i < m; ++i) K += x[i] * p[i];
        K = K * tau * T(0.5);
        for (std::size_t i = 0; i < m; ++i) w[i] = p[i] - K * x[i];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                A(k + 1 + i, k + 1 + j) -= x[i] * w[j] + w[i] * x[j];
        out.v.push_back(std::move(x));
        out.tau.push_back(tau);
    }
    if (n >= 2) {
        out.d[n - 2] = A(n - 2, n - 2);
        out.e[n - 2] = A(n - 1, n - 2);
    }
    out.d[n - 1] = A(n - 1, n - 1);
    return out;
}

/** Full eigendecomposition; vectors(i, j) is component i of eigenvector j. */
template <class T>
struct SymmetricEigen {
    std::vector<T> values;
    Matrix<T> vectors;
};

using DenseEigen = SymmetricEigen<double>;

/** In-repo dense symmetric eigensolver (Householder + implicit QL), any scalar type. */
template <class T>
SymmetricEigen<T> dense_symmetric_eigen_generic(const Matrix<T>& A)
{
    auto tri = householder_tridiagonalize(A);
    Matrix<T> Z = tri.form_q();
    std::vector<T> d = tri.d, e = tri.e;
    tridiagonal_ql(d, e, &Z);
    auto idx = detail::eigen_order<T>(d, nullptr);
    SymmetricEigen<T> out;
    out.values.resize(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) out.values[j] = d[idx[j]];
    detail::permute_columns(Z, idx);
    out.vectors = std::move(Z);
    return out;
}

/** Eigenvalues λ_j with projections u_jᵀ b, ascending in λ. */
struct SpectralProjection {
    std::vector<Ext> values;
    std::vector<Ext> projections;
};

template <class T>
SpectralProjection spectral_projection_generic(const Matrix<T>& A, const std::vector<T>& b)
{
    auto tri = householder_tridiagonalize(A);
    std::vector<T> c = tri.apply_qt(b);
    const std::size_t n = c.size();
    Matrix<T> row(1, n);
    for (std::size_t i = 0; i < n; ++i) row(0, i) = c[i];
    std::vector<T> d = tri.d, e = tri.e;
    tridiagonal_ql(d, e, &row);
    auto idx = detail::eigen_order<T>(d, nullptr);
    SpectralProjection out;
    out.values.resize(n);
    out.projections.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = to_ext(d[idx[j]]);
        out.projections[j] = to_ext(row(0, idx[j]));
    }
    return out;
}

#if defined(LANCZOS_LAB_HAVE_LAPACK)
namespace detail {

inline DenseEigen lapack_syevd(const Matrix<double>& A)
{
    const int n = static_cast<int>(A.rows());
    std::vector<double> a = A.storage();
    DenseEigen out;
    out.values.assign(static_cast<std::size_t>(n), 0.0);
    int info = 0, lwork = -1, liwork = -1, iwork_query = 0;
    double work_query = 0.0;
    const char jobz = 'V', uplo = 'L';
    dsyevd_(&jobz, &uplo, &n, a.data(), &n, out.values.data(), &work_query, &lwork, &iwork_query,
            &liwork, &info, 1, 1);
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(static_cast<std::size_t>(lwork));
    std::vector<int> iwork(static_cast<std::size_t>(liwork));
    dsyevd_(&jobz, &uplo, &n, a.data(), &n, out.values.data(), work.data(), &lwork, iwork.data(),
            &liwork, &info, 1, 1);
    if (info != 0) throw ConvergenceError("dsyevd failed", static_cast<std::size_t>(info));
    // Column-major eigenvectors: a[i + j*n] is component i of vector j.
    out.vectors = Matrix<double>(A.rows(), A.rows());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            out.vectors(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                a[static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * static_cast<std::size_t>(n)];
    return out;
}

inline SpectralProjection lapack_projection(const Matrix<double>& A, const std::vector<double>& b)
{
    const int n = static_cast<int>(A.rows());
    std::vector<double> a = A.storage();
    std::vector<double> d(static_cast<std::size_t>(n)), e(static_cast<std::size_t>(n), 0.0),
        tau(static_cast<std::size_t>(std::max(n - 1, 1)));
    const char uplo = 'L';
    int info = 0, lwork = -1;
    double wq = 0.0;
    dsytrd_(&uplo, &n, a.data(), &n, d.data(), e.data(), tau.data(), &wq, &lwork, &info, 1);
    lwork = std::max(1, static_cast<int>(wq));
    std::vector<double> work(static_cast<std::size_t>(lwork));
    dsytrd_(&uplo, &n, a.data(), &n, d.data(), e.data(), tau.data(), work.data(), &lwork, &info, 1);
    if (info != 0) throw ConvergenceError("dsytrd failed", static_cast<std::size_t>(info));

    std::vector<double> c = b;
    const char side = 'L', trans = 'T';
    const int one = 1;
    lwork = -1;
    dormtr_(&side, &uplo, &trans, &n, &one, a.data(), &n, tau.data(), c.data(), &n, &wq, &lwork, &info,
            1, 1, 1);
    lwork = std::max(1, static_cast<int>(wq));
    work.assign(static_cast<std::size_t>(lwork), 0.0);
    dormtr_(&side, &uplo, &trans, &n, &one, a.data(), &n, tau.data(), c.data(), &n, work.data(), &lwork,
            &info, 1, 1, 1);
    if (info != 0) throw ConvergenceError("dormtr failed", static_cast<std::size_t>(info));

    Matrix<double> row(1, static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) row(0, static_cast<std::size_t>(i)) = c[static_cast<std::size_t>(i)];
    tridiagonal_ql(d, e, &row);
    auto idx = eigen_order<double>(d, nullptr);
    SpectralProjection out;
    out.values.resize(d.size());
    out.projections.resize(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        out.values[j] = d[idx[j]];
        out.projections[j] = row(0, idx[j]);
    }
    return out;
}

}  // namespace detail
#endif

inline bool have_lapack()
{
#if defined(LANCZOS_LAB_HAVE_LAPACK)
    return true;
#else
    return false;
#endif
}

/** Full Work64 eigendecomposition; LAPACK when available, otherwise in-repo. */
inline DenseEigen dense_symmetric_eigen(const Matrix<double>& A)
{
    if (A.rows() != A.cols()) throw std::invalid_argument("dense_symmetric_eigen: matrix not square");
#if defined(LANCZOS_LAB_HAVE_LAPACK)
    return detail::lapack_syevd(A);
#else
    return dense_symmetric_eigen_generic(A);
#endif
}

/**
 * Eigenvalues and projections u_jᵀb. Ext128 runs the in-repo solver in double-double;
 * lower precisions use the Work64 route.
 */
inline SpectralProjection spectral_projection(const Matrix<double>& A, const std::vector<Ext>& b,
                                              Precision p = Precision::Work64)
{
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw std::invalid_argument("spectral_projection: dimension mismatch");
    if (p == Precision::Ext128) return spectral_projection_generic(A.cast<Ext>(), b);
#if defined(LANCZOS_LAB_HAVE_LAPACK)
    return detail::lapack_projection(A, to_double(b));
#else
    return spectral_projection_generic(A, to_double(b));
#endif
}

/** Eigenvalues of a Work64 symmetric matrix, ascending. */
inline std::vector<double> symmetric_eigenvalues(const Matrix<double>& A)
{
    std::vector<Ext> b(A.rows(), Ext(0.0));
    if (!b.empty()) b[0] = 1.0;
    auto sp = spectral_projection(A, b);
    return to_double(sp.values);
}

/**
 * f(A)v = U f(Λ) Uᵀ v accumulated in extended precision. A NaN from f marks the
 * function as undefined at that eigenvalue.
 */
inline std::vector<Ext> apply_matrix_function(const DenseEigen& E, const std::function<Ext(const Ext&)>& f,
                                              const std::vector<Ext>& v)
{
    const std::size_t n = E.values.size();
    if (v.size() != E.vectors.rows()) throw std::invalid_argument("apply_matrix_function: size mismatch");
    std::vector<Ext> c(n, Ext(0.0));
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double* urow = E.vectors.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) c[j] += v[i] * urow[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
        Ext fj = f(Ext(E.values[j]));
        if (isnan(fj) || !isfinite(fj))
            throw std::domain_error("apply_matrix_function: f undefined at eigenvalue " +
                                    std::to_string(E.values[j]));
        c[j] *= fj;
    }
    std::vector<Ext> out(v.size(), Ext(0.0));
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double* urow = E.vectors.data() + i * n;
        Ext s(0.0);
        for (std::size_t j = 0; j < n; ++j) s += c[j] * urow[j];
        out[i] = s;
    }
    return out;
}

/** 2-norm of a small dense matrix, via the largest eigenvalue of MᵀM. */
inline double spectral_norm(const Matrix<double>& M)
{
    if (M.empty()) return 0.0;
    const std::size_t c = M.cols();
    Matrix<double> G(c, c);
    for (std::size_t i = 0; i < M.rows(); ++i)
        for (std::size_t a = 0; a < c; ++a)
            for (std::size_t b = 0; b < c; ++b) G(a, b) += M(i, a) * M(i, b);
    auto tri = householder_tridiagonalize(G);
    auto ev = tridiag_eigenvalues(tri.d, tri.e);
    return std::sqrt(std::max(0.0, ev.back()));
}

}  // namespace lanczos_lab
