#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace qdl {

using cplx = std::complex<double>;

namespace detail {

inline double conj_of(double x) { return x; }
inline cplx conj_of(const cplx& z) { return std::conj(z); }
inline double real_of(double x) { return x; }
inline double real_of(const cplx& z) { return z.real(); }

} // namespace detail

// Dense row-major matrix. Only what the library needs, nothing clever.
template <class T>
class Matrix {
public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<T> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries))
    {
        if (data_.size() != rows_ * cols_)
            throw DomainError("matrix entry count does not match its shape");
    }
    Matrix(std::initializer_list<std::initializer_list<T>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : rows) {
            if (row.size() != cols_)
                throw DomainError("ragged matrix literal");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = T{1};
        return m;
    }

    static Matrix diagonal(std::span<const double> values)
    {
        Matrix m(values.size(), values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            m(i, i) = T{values[i]};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }

    Matrix& operator+=(const Matrix& o)
    {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o)
    {
        check_same(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(T s)
    {
        for (auto& x : data_)
            x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, T s) { return a *= s; }
    friend Matrix operator*(T s, Matrix a) { return a *= s; }
    friend Matrix operator-(Matrix a)
    {
        for (auto& x : a.data_)
            x = -x;
        return a;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_)
            throw DomainError("matrix product shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{})
                    continue;
                for (std::size_t j = 0; j < b.cols_; ++j)
                    c(i, j) += aik * b(k, j);
            }
        return c;
    }

    Matrix adjoint() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = detail::conj_of((*this)(i, j));
        return t;
    }

    T trace() const
    {
        T s{};
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i)
            s += (*this)(i, i);
        return s;
    }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto& x : data_)
            m = std::max(m, std::abs(x));
        return m;
    }

private:
    void check_same(const Matrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DomainError("matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = Matrix<cplx>;
using RealMatrix = Matrix<double>;

inline ComplexMatrix to_complex(const RealMatrix& m)
{
    ComplexMatrix c(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            c(i, j) = m(i, j);
    return c;
}

// Real part if every imaginary part is exactly zero.
inline bool is_real(const ComplexMatrix& m)
{
    return std::all_of(m.data().begin(), m.data().end(), [](const cplx& z) { return z.imag() == 0.0; });
}

inline RealMatrix real_part(const ComplexMatrix& m)
{
    RealMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            r(i, j) = m(i, j).real();
    return r;
}

template <class T>
void require_hermitian(const Matrix<T>& m, double tol = 1e-9)
{
    if (!m.square())
        throw DomainError("expected a square matrix, got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            if (std::abs(m(i, j) - detail::conj_of(m(j, i))) > tol) {
                std::ostringstream os;
                os << "matrix is not Hermitian at entry (" << i << ", " << j << ")";
                throw DomainError(os.str());
            }
}

template <class T>
struct EigenSystem {
    std::vector<double> values; // descending
    Matrix<T> vectors;          // orthonormal columns
};

// Cyclic Jacobi rotations; works for real symmetric and complex Hermitian input.
template <class T>
EigenSystem<T> herm_eig(const Matrix<T>& m)
{
    require_hermitian(m);
    const std::size_t n = m.rows();
    Matrix<T> a = m;
    Matrix<T> v = Matrix<T>::identity(n);

    double total = 0.0;
    for (const auto& x : a.data())
        total += std::norm(x);

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                off += 2.0 * std::norm(a(p, q));
        if (off == 0.0 || std::sqrt(off) <= 1e-13 * std::sqrt(total))
            break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const double g = std::abs(a(p, q));
                if (g == 0.0)
                    continue;
                const T phase = a(p, q) / g;
                const T cphase = detail::conj_of(phase);
                const double app = detail::real_of(a(p, p));
                const double aqq = detail::real_of(a(q, q));
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const T akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * cphase * akq;
                    a(k, q) = s * akp + c * cphase * akq;
                    const T vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * cphase * vkq;
                    v(k, q) = s * vkp + c * cphase * vkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const T apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * phase * aqk;
                    a(q, k) = s * apk + c * phase * aqk;
                }
                a(p, q) = T{};
                a(q, p) = T{};
                a(p, p) = T{detail::real_of(a(p, p))};
                a(q, q) = T{detail::real_of(a(q, q))};
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return detail::real_of(a(i, i)) > detail::real_of(a(j, j));
    });
    EigenSystem<T> out{std::vector<double>(n), Matrix<T>(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = detail::real_of(a(order[k], order[k]));
        for (std::size_t i = 0; i < n; ++i)
            out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

// Eigenvalues only, for real symmetric input: Householder reduction to
// tridiagonal form followed by implicit QL. Much cheaper than Jacobi when
// vectors are not needed.
inline std::vector<double> sym_eigenvalues(RealMatrix a)
{
    require_hermitian(a);
    const int n = static_cast<int>(a.rows());
    std::vector<double> d(n), e(n);
    if (n == 0)
        return d;
    if (n == 1)
        return {a(0, 0)};

    for (int i = n - 1; i > 0; --i) {
        const int l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (int k = 0; k <= l; ++k)
                scale += std::abs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = f >= 0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k)
                        g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k)
                        g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k)
                        a(j, k) -= (f * e[k] + g * a(i, k));
                }
            }
        } else {
            e[i] = a(i, l);
        }
    }
    for (int i = 0; i < n; ++i)
        d[i] = a(i, i);

    for (int i = 1; i < n; ++i)
        e[i - 1] = e[i];
    e[n - 1] = 0.0;
    constexpr double eps = 2.220446049250313e-16;
    // entries far below the matrix scale count as zero, else QL stalls on underflow
    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]));
    const double negligible = eps * eps * anorm;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= negligible)
                    break;
            }
            if (m != l) {
                if (iter++ == 100)
                    throw ConvergenceError("tridiagonal QL did not converge", 0.0);
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    e[i + 1] = (r = std::hypot(f, g));
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    d[i + 1] = g + (p = s * r);
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l)
                    continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
}

inline std::vector<double> eigenvalues(const RealMatrix& m) { return sym_eigenvalues(m); }

inline std::vector<double> eigenvalues(const ComplexMatrix& m)
{
    if (is_real(m))
        return sym_eigenvalues(real_part(m));
    return herm_eig(m).values;
}

template <class T>
double trace_norm(const Matrix<T>& m)
{
    double s = 0.0;
    for (double x : eigenvalues(m))
        s += std::abs(x);
    return s;
}

template <class T>
Matrix<T> tensor_product(const Matrix<T>& a, const Matrix<T>& b)
{
    Matrix<T> c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const T aij = a(i, j);
            if (aij == T{})
                continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

enum class Keep { first, second };

template <class T>
Matrix<T> partial_trace(const Matrix<T>& m, std::size_t dim_first, std::size_t dim_second, Keep keep)
{
    if (!m.square() || dim_first == 0 || dim_second == 0 || dim_first * dim_second != m.rows())
        throw DomainError("partial trace: dimension " + std::to_string(m.rows()) + " does not factor as " +
                          std::to_string(dim_first) + "x" + std::to_string(dim_second));
    if (keep == Keep::first) {
        Matrix<T> out(dim_first, dim_first);
        for (std::size_t i = 0; i < dim_first; ++i)
            for (std::size_t j = 0; j < dim_first; ++j)
                for (std::size_t k = 0; k < dim_second; ++k)
                    out(i, j) += m(i * dim_second + k, j * dim_second + k);
        return out;
    }
    Matrix<T> out(dim_second, dim_second);
    for (std::size_t i = 0; i < dim_second; ++i)
        for (std::size_t j = 0; j < dim_second; ++j)
            for (std::size_t k = 0; k < dim_first; ++k)
                out(i, j) += m(k * dim_second + i, k * dim_second + j);
    return out;
}

inline ComplexMatrix projector(std::span<const cplx> ket)
{
    ComplexMatrix p(ket.size(), ket.size());
    for (std::size_t i = 0; i < ket.size(); ++i)
        for (std::size_t j = 0; j < ket.size(); ++j)
            p(i, j) = ket[i] * std::conj(ket[j]);
    return p;
}

// Hermitian, positive semidefinite, unit trace. Validated on construction.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m))
    {
        require_hermitian(m_);
        if (std::abs(m_.trace() - 1.0) > 1e-9)
            throw DomainError("density matrix trace differs from 1");
        const auto ev = eigenvalues(m_);
        if (!ev.empty() && ev.back() < -1e-9)
            throw DomainError("density matrix has negative eigenvalue " + std::to_string(ev.back()));
    }

    std::size_t dim() const { return m_.rows(); }
    const ComplexMatrix& matrix() const { return m_; }

private:
    ComplexMatrix m_;
};

// Qubit given by purity and a unit Bloch direction.
struct QubitState {
    double r = 1.0;
    std::array<double, 3> bloch{0.0, 0.0, 1.0};

    QubitState() = default;
    QubitState(double purity, std::array<double, 3> direction) : r(purity), bloch(direction)
    {
        if (!(r >= 0.0 && r <= 1.0))
            throw DomainError("purity must lie in [0, 1]");
        const double len = std::sqrt(bloch[0] * bloch[0] + bloch[1] * bloch[1] + bloch[2] * bloch[2]);
        if (std::abs(len - 1.0) > 1e-9)
            throw DomainError("Bloch direction must be a unit vector");
    }

    ComplexMatrix matrix() const
    {
        const double x = r * bloch[0], y = r * bloch[1], z = r * bloch[2];
        return ComplexMatrix{{cplx(0.5 * (1 + z), 0), cplx(0.5 * x, -0.5 * y)},
                             {cplx(0.5 * x, 0.5 * y), cplx(0.5 * (1 - z), 0)}};
    }

    DensityMatrix density() const { return DensityMatrix(matrix()); }
};

} // namespace qdl
