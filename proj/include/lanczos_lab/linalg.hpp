#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "scalars.hpp"

namespace lanczos_lab {

/** Dense row-major matrix. */
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    template <class U>
    Matrix<U> cast() const
    {
        Matrix<U> out(rows_, cols_);
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if constexpr (std::is_same_v<T, DoubleDouble>) out.data()[i] = round_to<U>(data_[i]);
            else if constexpr (std::is_same_v<U, DoubleDouble>) out.data()[i] = to_ext(data_[i]);
            else out.data()[i] = static_cast<U>(data_[i]);
        }
        return out;
    }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

template <class T>
T dot(std::span<const T> x, std::span<const T> y)
{
    assert(x.size() == y.size());
    T s(0);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

template <class T>
T dot(const std::vector<T>& x, const std::vector<T>& y)
{
    return dot(std::span<const T>(x), std::span<const T>(y));
}

template <class T>
T norm2(std::span<const T> x)
{
    using std::sqrt;
    return sqrt(dot(x, x));
}

template <class T>
T norm2(const std::vector<T>& x)
{
    return norm2(std::span<const T>(x));
}

/** y = A x with the matrix entries held at storage type S, accumulated in T. */
template <class T, class S>
void matvec(const Matrix<S>& A, std::span<const T> x, std::span<T> y)
{
    const std::size_t n = A.rows(), m = A.cols();
    assert(x.size() == m && y.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
        const S* a = A.data() + i * m;
        T acc(0);
        for (std::size_t j = 0; j < m; ++j) acc += x[j] * a[j];
        y[i] = acc;
    }
}

template <class T, class S>
std::vector<T> matvec(const Matrix<S>& A, const std::vector<T>& x)
{
    std::vector<T> y(A.rows());
    matvec<T, S>(A, std::span<const T>(x), std::span<T>(y));
    return y;
}

template <class T>
std::vector<DoubleDouble> to_ext(const std::vector<T>& v)
{
    std::vector<DoubleDouble> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_ext(v[i]);
    return out;
}

inline std::vector<double> to_double(const std::vector<DoubleDouble>& v)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].hi;
    return out;
}

/** Max absolute entry. */
template <class T>
double max_abs(const Matrix<T>& M)
{
    double m = 0.0;
    for (const T& v : M.storage()) m = std::max(m, std::abs(to_double(v)));
    return m;
}

template <class T>
double max_abs(const std::vector<T>& v)
{
    double m = 0.0;
    for (const T& x : v) m = std::max(m, std::abs(to_double(x)));
    return m;
}

}  // namespace lanczos_lab
