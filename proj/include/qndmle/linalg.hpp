// Copyright 2026 The qndmle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense matrices. Dimensions here are tiny (probe spaces of a few
// levels, parameter dimensions below ten), so everything is plain row-major
// storage and O(n^3) loops.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qndmle/errors.hpp"

namespace qndmle {

using Complex = std::complex<double>;

namespace detail {
inline double conj_of(double x) { return x; }
inline Complex conj_of(const Complex& z) { return std::conj(z); }
inline double abs_of(double x) { return std::abs(x); }
inline double abs_of(const Complex& z) { return std::abs(z); }
}  // namespace detail

template <typename T>
class Matrix {
  public:
    using value_type = T;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const T> data() const { return data_; }
    std::span<T> data() { return data_; }

    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = detail::conj_of((*this)(r, c));
        return out;
    }

    std::vector<T> column(std::size_t c) const {
        std::vector<T> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DomainError("matrix product: dimension mismatch");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend std::vector<T> operator*(const Matrix& a, std::span<const T> v) {
        if (a.cols_ != v.size()) throw DomainError("matrix-vector product: dimension mismatch");
        std::vector<T> out(a.rows_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            T acc{};
            for (std::size_t k = 0; k < a.cols_; ++k) acc += a(i, k) * v[k];
            out[i] = acc;
        }
        return out;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) {
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
        return a;
    }
    friend Matrix operator-(Matrix a, const Matrix& b) {
        for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
        return a;
    }
    friend Matrix operator*(T s, Matrix a) {
        for (auto& x : a.data_) x *= s;
        return a;
    }

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using ComplexMatrix = Matrix<Complex>;
using RealMatrix = Matrix<double>;

/// Largest entrywise absolute difference; dimensions must agree.
template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DomainError("max_abs_diff: dimension mismatch");
    double m = 0.0;
    auto da = a.data();
    auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, detail::abs_of(da[i] - db[i]));
    return m;
}

template <typename T>
bool is_hermitian(const Matrix<T>& m, double tol) {
    if (!m.square()) return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j)
            if (detail::abs_of(m(i, j) - detail::conj_of(m(j, i))) > tol) return false;
    return true;
}

/// ‖U†U − I‖_max.
inline double unitarity_defect(const ComplexMatrix& u) {
    return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.cols()));
}

struct HermitianEigen {
    std::vector<double> values;  // ascending
    ComplexMatrix vectors;       // columns are eigenvectors
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot with a diagonal
/// unitary, then applies the classical real Jacobi rotation. Stops when the
/// off-diagonal Frobenius norm drops below `tol` times max(1, ‖A‖_F).
inline HermitianEigen hermitian_eigen(const ComplexMatrix& a, double tol = 1e-13, int max_sweeps = 100) {
    if (!a.square()) throw DomainError("hermitian_eigen: matrix is not square");
    const std::size_t n = a.rows();
    ComplexMatrix m = a;
    ComplexMatrix v = ComplexMatrix::identity(n);

    double frob = 0.0;
    for (const auto& z : m.data()) frob += std::norm(z);
    const double threshold = tol * std::max(1.0, std::sqrt(frob));

    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += std::norm(m(i, j));
        return std::sqrt(s);
    };

    int sweep = 0;
    for (; sweep < max_sweeps && off_norm() > threshold; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = m(p, q);
                const double r = std::abs(apq);
                if (r == 0.0) continue;
                const Complex phase = apq / r;  // e^{iφ}
                const double app = m(p, p).real();
                const double aqq = m(q, q).real();
                const double tau = (aqq - app) / (2.0 * r);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = D R, D = diag(1, e^{-iφ}) on (p, q).
                const Complex jpp = c;
                const Complex jpq = s;
                const Complex jqp = -s * std::conj(phase);
                const Complex jqq = c * std::conj(phase);
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex mkp = m(k, p);
                    const Complex mkq = m(k, q);
                    m(k, p) = mkp * jpp + mkq * jqp;
                    m(k, q) = mkp * jpq + mkq * jqq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex mpk = m(p, k);
                    const Complex mqk = m(q, k);
                    m(p, k) = std::conj(jpp) * mpk + std::conj(jqp) * mqk;
                    m(q, k) = std::conj(jpq) * mpk + std::conj(jqq) * mqk;
                }
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                m(p, p) = m(p, p).real();
                m(q, q) = m(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const Complex vkp = v(k, p);
                    const Complex vkq = v(k, q);
                    v(k, p) = vkp * jpp + vkq * jqp;
                    v(k, q) = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return m(x, x).real() < m(y, y).real(); });
    HermitianEigen out;
    out.values.resize(n);
    out.vectors = ComplexMatrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = m(order[c], order[c]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    out.sweeps = sweep;
    return out;
}

/// exp(−i H) for Hermitian H, through its eigendecomposition.
inline ComplexMatrix expm_minus_i(const HermitianEigen& eig) {
    const std::size_t n = eig.values.size();
    ComplexMatrix scaled = eig.vectors;
    for (std::size_t c = 0; c < n; ++c) {
        const Complex f = std::exp(Complex(0.0, -eig.values[c]));
        for (std::size_t r = 0; r < n; ++r) scaled(r, c) *= f;
    }
    return scaled * eig.vectors.adjoint();
}

inline ComplexMatrix expm_minus_i(const ComplexMatrix& h) { return expm_minus_i(hermitian_eigen(h)); }

/// Directional derivative of exp(−i H) along the Hermitian direction dH
/// (Daleckii–Krein): V (G ∘ V† dH V) V† with divided differences G of
/// λ ↦ e^{−iλ}.
inline ComplexMatrix expm_minus_i_derivative(const HermitianEigen& eig, const ComplexMatrix& dh) {
    const std::size_t n = eig.values.size();
    ComplexMatrix inner = eig.vectors.adjoint() * dh * eig.vectors;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            // (e^{-iλa} − e^{-iλb}) / (λa − λb) = −i e^{−i m} sinc(δ/2), free of cancellation.
            const double half = 0.5 * (eig.values[a] - eig.values[b]);
            const double mid = 0.5 * (eig.values[a] + eig.values[b]);
            const double sinc = half == 0.0 ? 1.0 : std::sin(half) / half;
            inner(a, b) *= Complex(0.0, -1.0) * std::exp(Complex(0.0, -mid)) * sinc;
        }
    }
    return eig.vectors * inner * eig.vectors.adjoint();
}

/// Eigenvalues of a real symmetric matrix, ascending.
inline std::vector<double> symmetric_eigenvalues(const RealMatrix& m) {
    ComplexMatrix c(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) c(i, j) = m(i, j);
    return hermitian_eigen(c).values;
}

/// Inverse by Gauss–Jordan elimination with partial pivoting. Throws
/// NumericalRefusal when a pivot falls below `singular_tol` relative to the
/// largest entry.
inline RealMatrix inverse(const RealMatrix& m, double singular_tol = 1e-12) {
    if (!m.square()) throw DomainError("inverse: matrix is not square");
    const std::size_t n = m.rows();
    RealMatrix a = m;
    RealMatrix inv = RealMatrix::identity(n);
    double scale = 0.0;
    for (double x : m.data()) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) throw NumericalRefusal("inverse: zero matrix");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) <= singular_tol * scale) throw NumericalRefusal("inverse: matrix is singular");
        if (piv != col) {
            for (std::size_t k = 0; k < n; ++k) {
                std::swap(a(piv, k), a(col, k));
                std::swap(inv(piv, k), inv(col, k));
            }
        }
        const double d = a(col, col);
        for (std::size_t k = 0; k < n; ++k) {
            a(col, k) /= d;
            inv(col, k) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a(r, col);
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < n; ++k) {
                a(r, k) -= f * a(col, k);
                inv(r, k) -= f * inv(col, k);
            }
        }
    }
    return inv;
}

inline double trace(const RealMatrix& m) {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) t += m(i, i);
    return t;
}

}  // namespace qndmle
