#pragma once

#include <lapacke.h>

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "rdmol/grid.hpp"
#include "rdmol/matrix.hpp"
#include "rdmol/quadrature.hpp"

namespace rdmol {

// Second-difference operator kappa * N^2 * tridiag(1, -2, 1) with the
// no-flux corner modification (-1 on the first and last diagonal entry,
// equivalent to mirroring the wall-adjacent cells).
struct LaplacianOperator {
    int N = 0;
    double kappa = 1.0;

    double scale() const { return kappa * static_cast<double>(N) * N; }

    std::vector<double> apply(std::span<const double> y) const {
        if (static_cast<int>(y.size()) != N)
            throw std::invalid_argument("LaplacianOperator: size mismatch");
        std::vector<double> out(N);
        const double s = scale();
        for (int k = 0; k < N; ++k) {
            const double left = (k > 0) ? y[k - 1] : y[0];
            const double right = (k < N - 1) ? y[k + 1] : y[N - 1];
            out[k] = s * (left - 2.0 * y[k] + right);
        }
        return out;
    }

    Matrix dense() const {
        Matrix m(N, N);
        const double s = scale();
        for (int k = 0; k < N; ++k) {
            m(k, k) = (k == 0 || k == N - 1) ? -s : -2.0 * s;
            if (k > 0) m(k, k - 1) = s;
            if (k < N - 1) m(k, k + 1) = s;
        }
        return m;
    }
};

inline LaplacianOperator laplacian(int N, double diffusion = 1.0) {
    if (N < 2) throw std::invalid_argument("laplacian: need at least two cells");
    if (!(diffusion > 0.0)) throw std::invalid_argument("laplacian: diffusivity must be positive");
    return LaplacianOperator{N, diffusion};
}

// Cell averages of f, each to an absolute tolerance of tol.
inline std::vector<double> project_cells(const std::function<double(double)>& f, int N,
                                         double tol = 1e-12) {
    if (N < 2) throw std::invalid_argument("project_cells: need at least two cells");
    std::vector<double> out(N);
    const double h = 1.0 / N;
    for (int k = 0; k < N; ++k)
        out[k] = N * integrate(f, k * h, (k + 1) * h, tol * h);
    return out;
}

inline StateVector project_initial(const ProblemSpec& spec, const Grid& grid,
                                   double tol = 1e-12) {
    spec.validate();
    StateVector u(grid);
    const std::vector<double> a = project_cells(spec.a0, grid.N, tol);
    const std::vector<double> b = project_cells(spec.b0, grid.N, tol);
    const std::vector<double> c = project_cells(spec.c0, grid.N, tol);
    for (int k = 0; k < grid.N; ++k) {
        u.a()[k] = a[k];
        u.b()[k] = b[k];
        u.c()[k] = c[k];
    }
    return u;
}

// Semi-discrete right-hand side: per-cell mass action plus the species-wise
// discrete Laplacian. Layout is species-major, [a; b; c].
inline void rhs_into(const ProblemSpec& spec, const Grid& grid, std::span<const double> u,
                     std::span<double> out) {
    const int N = grid.N;
    if (static_cast<int>(u.size()) != 3 * N || static_cast<int>(out.size()) != 3 * N)
        throw std::invalid_argument("rhs_into: size mismatch");
    const double* a = u.data();
    const double* b = u.data() + N;
    const double* c = u.data() + 2 * N;
    const double sA = spec.kA * static_cast<double>(N) * N;
    const double sB = spec.kB * static_cast<double>(N) * N;
    const double sC = spec.kC * static_cast<double>(N) * N;
    for (int k = 0; k < N; ++k) {
        const int l = (k > 0) ? k - 1 : 0;
        const int r = (k < N - 1) ? k + 1 : N - 1;
        const double f = -spec.k1 * a[k] * b[k] + spec.k_minus1 * c[k];
        out[k] = f + sA * (a[l] - 2.0 * a[k] + a[r]);
        out[N + k] = f + sB * (b[l] - 2.0 * b[k] + b[r]);
        out[2 * N + k] = -f + sC * (c[l] - 2.0 * c[k] + c[r]);
    }
}

inline std::vector<double> rhs(const ProblemSpec& spec, const Grid& grid, const StateVector& u) {
    if (!(u.grid == grid)) throw std::invalid_argument("rhs: state/grid mismatch");
    std::vector<double> out(u.data.size());
    rhs_into(spec, grid, u.data, out);
    return out;
}

// Jacobian of the reaction field alone: diagonal blocks
// [[B, A, C], [B, A, C], [-B, -A, -C]] with A = -k1 diag(a),
// B = -k1 diag(b), C = k_minus1 I.
inline Matrix reaction_jacobian(const ProblemSpec& spec, const StateVector& u) {
    const int N = u.N();
    Matrix J(3 * N, 3 * N);
    const auto a = u.a(), b = u.b();
    for (int k = 0; k < N; ++k) {
        const double da = -spec.k1 * b[k];
        const double db = -spec.k1 * a[k];
        const double dc = spec.k_minus1;
        J(k, k) = da;
        J(k, N + k) = db;
        J(k, 2 * N + k) = dc;
        J(N + k, k) = da;
        J(N + k, N + k) = db;
        J(N + k, 2 * N + k) = dc;
        J(2 * N + k, k) = -da;
        J(2 * N + k, N + k) = -db;
        J(2 * N + k, 2 * N + k) = -dc;
    }
    return J;
}

// Full Jacobian of rhs: reaction blocks plus the block-diagonal Laplacian.
inline Matrix jacobian(const ProblemSpec& spec, const Grid& grid, const StateVector& u) {
    if (!(u.grid == grid)) throw std::invalid_argument("jacobian: state/grid mismatch");
    const int N = grid.N;
    Matrix J = reaction_jacobian(spec, u);
    for (int s = 0; s < 3; ++s) {
        const double sc = spec.diffusion(s) * static_cast<double>(N) * N;
        const int off = s * N;
        for (int k = 0; k < N; ++k) {
            J(off + k, off + k) += (k == 0 || k == N - 1) ? -sc : -2.0 * sc;
            if (k > 0) J(off + k, off + k - 1) += sc;
            if (k < N - 1) J(off + k, off + k + 1) += sc;
        }
    }
    return J;
}

namespace detail {

inline double max_sym_eig3(double m[9]) {
    double w[3];
    const int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, 'N', 'U', 3, m, 3, w);
    if (info != 0) throw std::runtime_error("dsyev failed on 3x3 block");
    return w[2];
}

// Largest eigenvalue of the symmetric part of the reaction Jacobian. All
// blocks are diagonal, so the 3N x 3N eigenproblem splits into one 3x3
// problem per cell.
inline double reaction_log_norm_unchecked(const ProblemSpec& spec, std::span<const double> a,
                                          std::span<const double> b) {
    double mu = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double da = -spec.k1 * b[k];
        const double db = -spec.k1 * a[k];
        const double dc = spec.k_minus1;
        double m[9] = {da,
                       0.5 * (db + da),
                       0.5 * (dc - da),
                       0.0,
                       db,
                       0.5 * (dc - db),
                       0.0,
                       0.0,
                       -dc};
        m[3] = m[1];
        m[6] = m[2];
        m[7] = m[5];
        mu = std::max(mu, max_sym_eig3(m));
    }
    return mu;
}

}  // namespace detail

// Log-norm of the reaction field over the box [0, M_tilde]^{3N}; the
// quadratic form y^T DF y is bounded by this value times |y|^2, and by
// 2 k1 M_tilde + k_minus1 for any admissible state.
inline double log_norm_reaction(const ProblemSpec& spec, const StateVector& u, double M_tilde) {
    if (!(M_tilde >= 0.0)) throw std::invalid_argument("log_norm_reaction: bound must be nonnegative");
    for (double v : u.data)
        if (!(v >= 0.0 && v <= M_tilde))
            throw std::domain_error("log_norm_reaction: state outside [0, M_tilde] box");
    return detail::reaction_log_norm_unchecked(spec, u.a(), u.b());
}

}  // namespace rdmol
