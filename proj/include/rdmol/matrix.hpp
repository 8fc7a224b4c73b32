#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rdmol {

// Dense row-major matrix. Just enough surface for spectral synthesis,
// Jacobian assembly and test oracles; anything performance-critical in the
// integrator uses banded storage instead.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Matrix transposed() const {
        Matrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
        return m;
    }

    std::vector<double> operator*(const std::vector<double>& x) const {
        if (x.size() != cols_) throw std::invalid_argument("Matrix: size mismatch in matvec");
        std::vector<double> y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = a_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    friend Matrix operator*(const Matrix& A, const Matrix& B) {
        if (A.cols_ != B.rows_) throw std::invalid_argument("Matrix: size mismatch in matmul");
        Matrix C(A.rows_, B.cols_);
        for (std::size_t i = 0; i < A.rows_; ++i) {
            for (std::size_t k = 0; k < A.cols_; ++k) {
                const double aik = A(i, k);
                if (aik == 0.0) continue;
                const double* brow = B.a_.data() + k * B.cols_;
                double* crow = C.a_.data() + i * C.cols_;
                for (std::size_t j = 0; j < B.cols_; ++j) crow[j] += aik * brow[j];
            }
        }
        return C;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

// Gaussian elimination with partial pivoting. Desk-scale systems only; the
// integrator's banded path never comes through here.
inline std::vector<double> solve_dense(Matrix A, std::vector<double> b) {
    const std::size_t n = A.rows();
    if (A.cols() != n || b.size() != n)
        throw std::invalid_argument("solve_dense: square system required");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
        if (std::abs(A(p, k)) < 1e-300) throw std::runtime_error("solve_dense: singular matrix");
        if (p != k) {
            for (std::size_t j = k; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double m = A(i, k) / A(k, k);
            if (m == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) A(i, j) -= m * A(k, j);
            b[i] -= m * b[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * b[j];
        b[i] = s / A(i, i);
    }
    return b;
}

}  // namespace rdmol
