#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rdmol/matrix.hpp"
#include "rdmol/quadrature.hpp"

namespace rdmol {

// Jacobi-type tail sum f(t) = sum_{k>=1} exp(-k^2 t). The tail after n
// terms is geometric with ratio at most exp(-(2n+3)t), which certifies the
// truncation.
inline double eval_f(double t, double tol = 1e-12) {
    if (!(t > 0.0)) throw std::domain_error("eval_f: t must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("eval_f: tolerance must be positive");
    double sum = 0.0;
    for (long long k = 1;; ++k) {
        sum += std::exp(-static_cast<double>(k) * k * t);
        const double ratio = std::exp(-(2.0 * k + 3.0) * t);
        const double tail = std::exp(-(k + 1.0) * (k + 1.0) * t) / (1.0 - ratio);
        if (tail <= tol) return sum;
        if (k > 20'000'000) throw std::runtime_error("eval_f: truncation target unreachable");
    }
}

enum class KernelKind { Dirichlet, Neumann, DiscreteNeumann };

struct KernelSpec {
    KernelKind kind = KernelKind::Neumann;
    double diffusion = 1.0;
    double truncation_tol = 1e-12;
    int cells = 0;  // DiscreteNeumann only
};

namespace detail {

// Smallest J with a certified series tail below tol (terms bounded by
// 2 exp(-j^2 theta)).
inline int series_terms(double theta, double tol) {
    if (!(theta >= 1e-5 * M_PI * M_PI))
        throw std::domain_error("heat kernel series: kappa*t below the 1e-5 floor");
    for (int J = 1;; ++J) {
        const double ratio = std::exp(-(2.0 * J + 3.0) * theta);
        const double tail = 2.0 * std::exp(-(J + 1.0) * (J + 1.0) * theta) / (1.0 - ratio);
        if (tail <= tol) return J;
        if (J > 1'000'000) throw std::runtime_error("heat kernel series: tolerance unreachable");
    }
}

// Same certificate for the differentiated series (terms 2 j pi exp(-j^2 theta)).
inline int derivative_series_terms(double theta, double tol) {
    if (!(theta >= 1e-5 * M_PI * M_PI))
        throw std::domain_error("heat kernel series: kappa*t below the 1e-5 floor");
    for (int J = 1;; ++J) {
        const double ratio = 2.0 * std::exp(-(2.0 * J + 3.0) * theta);
        if (ratio < 0.5) {
            const double tail =
                2.0 * M_PI * (J + 1.0) * std::exp(-(J + 1.0) * (J + 1.0) * theta) / (1.0 - ratio);
            if (tail <= tol) return J;
        }
        if (J > 1'000'000) throw std::runtime_error("heat kernel series: tolerance unreachable");
    }
}

inline void check_point(double x, const char* who) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error(std::string(who) + ": point outside [0,1]");
}

inline void check_continuous(const KernelSpec& spec, double t) {
    if (spec.kind == KernelKind::DiscreteNeumann)
        throw std::invalid_argument("continuous kernel evaluation on a discrete spec");
    if (!(spec.diffusion > 0.0)) throw std::invalid_argument("KernelSpec: diffusion must be positive");
    if (!(spec.truncation_tol > 0.0)) throw std::invalid_argument("KernelSpec: bad truncation tol");
    if (!(t > 0.0)) throw std::domain_error("heat kernel: t must be positive");
}

}  // namespace detail

// Neumann kernel 1 + 2 sum e^{-j^2 pi^2 kappa t} cos(j pi x) cos(j pi y),
// Dirichlet kernel 2 sum e^{-j^2 pi^2 kappa t} sin(j pi x) sin(j pi y).
inline double eval_continuous(const KernelSpec& spec, double t, double x, double y) {
    detail::check_continuous(spec, t);
    detail::check_point(x, "eval_continuous");
    detail::check_point(y, "eval_continuous");
    const double theta = M_PI * M_PI * spec.diffusion * t;
    const int J = detail::series_terms(theta, spec.truncation_tol);
    double sum = (spec.kind == KernelKind::Neumann) ? 1.0 : 0.0;
    for (int j = J; j >= 1; --j) {
        const double w = std::exp(-static_cast<double>(j) * j * theta);
        sum += 2.0 * w *
               ((spec.kind == KernelKind::Neumann)
                    ? std::cos(j * M_PI * x) * std::cos(j * M_PI * y)
                    : std::sin(j * M_PI * x) * std::sin(j * M_PI * y));
    }
    return sum;
}

inline double eval_continuous_dx(const KernelSpec& spec, double t, double x, double y) {
    detail::check_continuous(spec, t);
    detail::check_point(x, "eval_continuous_dx");
    detail::check_point(y, "eval_continuous_dx");
    const double theta = M_PI * M_PI * spec.diffusion * t;
    const int J = detail::derivative_series_terms(theta, spec.truncation_tol);
    double sum = 0.0;
    for (int j = J; j >= 1; --j) {
        const double w = j * M_PI * std::exp(-static_cast<double>(j) * j * theta);
        sum += 2.0 * w *
               ((spec.kind == KernelKind::Neumann)
                    ? -std::sin(j * M_PI * x) * std::cos(j * M_PI * y)
                    : std::cos(j * M_PI * x) * std::sin(j * M_PI * y));
    }
    return sum;
}

// Both kernels are symmetric in (x, y), so d_y H(t,x,y) = (d_x H)(t,y,x).
inline double eval_continuous_dy(const KernelSpec& spec, double t, double x, double y) {
    return eval_continuous_dx(spec, t, y, x);
}

// Exact eigensystem of the N-cell no-flux Laplacian (diffusivity 1):
// lambda_j = -4 N^2 sin^2(j pi / 2N) and midpoint-cosine eigenvectors,
// orthonormal in the Euclidean inner product (j is 0-based here).
struct EigenSystem {
    int N = 0;
    std::vector<double> values;
    Matrix vectors;  // column j holds nu_j

    static EigenSystem compute(int N) {
        if (N < 2) throw std::invalid_argument("EigenSystem: need at least two cells");
        EigenSystem es;
        es.N = N;
        es.values.resize(N);
        es.vectors = Matrix(N, N);
        const double root1 = std::sqrt(1.0 / N);
        const double root2 = std::sqrt(2.0 / N);
        for (int j = 0; j < N; ++j) {
            const double s = std::sin(j * M_PI / (2.0 * N));
            es.values[j] = -4.0 * static_cast<double>(N) * N * s * s;
            for (int i = 0; i < N; ++i)
                es.vectors(i, j) = (j == 0) ? root1 : root2 * std::cos(j * (i + 0.5) * M_PI / N);
        }
        return es;
    }

    // V exp(D tau) V^T u0
    std::vector<double> propagate(double tau, const std::vector<double>& u0) const {
        if (static_cast<int>(u0.size()) != N) throw std::invalid_argument("propagate: size mismatch");
        std::vector<double> w(N, 0.0);
        for (int j = 0; j < N; ++j) {
            double s = 0.0;
            for (int i = 0; i < N; ++i) s += vectors(i, j) * u0[i];
            w[j] = s * std::exp(values[j] * tau);
        }
        std::vector<double> out(N, 0.0);
        for (int i = 0; i < N; ++i) {
            double s = 0.0;
            for (int j = 0; j < N; ++j) s += vectors(i, j) * w[j];
            out[i] = s;
        }
        return out;
    }

    // A^N(tau) = V exp(D tau) V^T
    Matrix semigroup(double tau) const {
        Matrix W = vectors;
        for (int j = 0; j < N; ++j) {
            const double e = std::exp(values[j] * tau);
            for (int i = 0; i < N; ++i) W(i, j) *= e;
        }
        return W * vectors.transposed();
    }
};

// Piecewise-constant discrete kernel H^N(t,x,y) = A^N_{ij}(kappa t) / h on
// the cells containing x and y.
inline double eval_discrete(const EigenSystem& es, double kappa, double t, double x, double y) {
    if (!(kappa > 0.0)) throw std::invalid_argument("eval_discrete: diffusivity must be positive");
    if (!(t >= 0.0)) throw std::domain_error("eval_discrete: t must be nonnegative");
    detail::check_point(x, "eval_discrete");
    detail::check_point(y, "eval_discrete");
    const int N = es.N;
    auto cell = [N](double p) {
        const int k = static_cast<int>(std::floor(p * N));
        return k == N ? N - 1 : k;
    };
    const int i = cell(x), j = cell(y);
    double sum = 0.0;
    for (int m = 0; m < N; ++m)
        sum += es.vectors(i, m) * std::exp(es.values[m] * kappa * t) * es.vectors(j, m);
    return sum * N;
}

inline double eval_discrete(int N, double kappa, double t, double x, double y) {
    return eval_discrete(EigenSystem::compute(N), kappa, t, x, y);
}

// sup over cell-midpoint pairs of |H^N - H| at matching diffusivity.
inline double kernel_distance(int N, double kappa, double t) {
    if (!(t > 0.0)) throw std::domain_error("kernel_distance: t must be positive");
    const EigenSystem es = EigenSystem::compute(N);
    const Matrix A = es.semigroup(kappa * t);
    const KernelSpec cont{KernelKind::Neumann, kappa, 1e-12, 0};
    double sup = 0.0;
    for (int i = 0; i < N; ++i) {
        const double xi = (i + 0.5) / N;
        for (int j = 0; j < N; ++j) {
            const double yj = (j + 0.5) / N;
            const double d = std::abs(N * A(i, j) - eval_continuous(cont, t, xi, yj));
            sup = std::max(sup, d);
        }
    }
    return sup;
}

struct DuhamelOptions {
    double space_tol = 1e-10;
    double time_tol = 1e-8;
    double t_floor = 1e-4;  // below this kernel time the kernel acts as the identity
};

// Variation-of-constants evaluation u(t,x) = int H(t,x,y) u0(y) dy +
// int_0^t int H(s,x,y) g(t-s,y) dy ds for the continuous kernels. The time
// integrand is bounded (the kernels have unit mass), but series evaluation
// is refused for kernel times under opt.t_floor; there the kernel is
// treated as the identity, which is exact in the limit for continuous g.
inline std::function<double(double)> duhamel_eval(const KernelSpec& spec,
                                                  std::function<double(double)> u0,
                                                  std::function<double(double, double)> source,
                                                  double t, DuhamelOptions opt = {}) {
    detail::check_continuous(spec, t);
    if (!u0) throw std::invalid_argument("duhamel_eval: initial data not set");
    return [spec, u0, source, t, opt](double x) {
        detail::check_point(x, "duhamel_eval");
        double val = integrate([&](double y) { return eval_continuous(spec, t, x, y) * u0(y); },
                               0.0, 1.0, opt.space_tol);
        if (source) {
            const double split = std::min(t, opt.t_floor);
            val += integrate([&](double s) { return source(t - s, x); }, 0.0, split, opt.time_tol);
            if (t > split)
                val += integrate(
                    [&](double s) {
                        return integrate(
                            [&](double y) { return eval_continuous(spec, s, x, y) * source(t - s, y); },
                            0.0, 1.0, 0.1 * opt.space_tol);
                    },
                    split, t, opt.time_tol);
        }
        return val;
    };
}

// Discrete counterpart on cell values; the source is sampled at cell
// midpoints. No floor is needed: A^N(0) is the identity.
inline std::vector<double> duhamel_eval(const KernelSpec& spec, const std::vector<double>& u0,
                                        std::function<double(double, double)> source, double t,
                                        DuhamelOptions opt = {}) {
    if (spec.kind != KernelKind::DiscreteNeumann)
        throw std::invalid_argument("duhamel_eval: cell-valued initial data needs a discrete spec");
    if (!(spec.diffusion > 0.0)) throw std::invalid_argument("KernelSpec: diffusion must be positive");
    if (!(t >= 0.0)) throw std::domain_error("duhamel_eval: t must be nonnegative");
    const int N = spec.cells;
    if (N < 2 || static_cast<int>(u0.size()) != N)
        throw std::invalid_argument("duhamel_eval: cell count mismatch");

    const EigenSystem es = EigenSystem::compute(N);
    std::vector<double> out = es.propagate(spec.diffusion * t, u0);
    if (source && t > 0.0) {
        auto cache = std::make_shared<std::map<double, std::vector<double>>>();
        auto slice = [&es, &spec, source, t, N, cache](double s) -> const std::vector<double>& {
            auto it = cache->find(s);
            if (it == cache->end()) {
                std::vector<double> g(N);
                for (int k = 0; k < N; ++k) g[k] = source(t - s, (k + 0.5) / N);
                it = cache->emplace(s, es.propagate(spec.diffusion * s, g)).first;
            }
            return it->second;
        };
        for (int i = 0; i < N; ++i)
            out[i] += integrate([&](double s) { return slice(s)[i]; }, 0.0, t, opt.time_tol);
    }
    return out;
}

// int_0^1 |d_y H(t,x,y)| dy, the quantity bounded by C t^{-3/4}.
inline double derivative_integral(const KernelSpec& spec, double t, double x,
                                  double quad_tol = 1e-9) {
    detail::check_continuous(spec, t);
    detail::check_point(x, "derivative_integral");
    if (!(t >= 1e-4)) throw std::domain_error("derivative_integral: t below the 1e-4 floor");
    return integrate([&](double y) { return std::abs(eval_continuous_dy(spec, t, x, y)); }, 0.0,
                     1.0, quad_tol);
}

}  // namespace rdmol
