#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace rdmol {

struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double gk15_panel(const std::function<double(double)>& f, double a, double b,
                         double* err) {
    // max_depth = 0 evaluates a single (G7,K15) panel and reports the
    // Kronrod-Gauss discrepancy through err. Boost leaves that estimate in
    // unit-interval units; scale it to the panel so estimates are comparable
    // across widths.
    const double q =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 1e-30, err);
    *err *= 0.5 * (b - a);
    return q;
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration with an absolute error target: a
// worklist of panels ordered by error estimate, refining the worst panel
// until the summed estimate meets the budget. Handles narrow spikes that a
// per-level tolerance split cannot (those push local targets below one ulp).
// Failure to converge throws instead of returning a degraded value.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, int max_depth = 48) {
    if (!(a <= b)) throw std::invalid_argument("integrate: bad interval");
    if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate: tolerance must be positive");
    if (a == b) return 0.0;

    struct Panel {
        double err, a, b, q;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto make = [&f](double lo, double hi) {
        double err = 0.0;
        const double q = detail::gk15_panel(f, lo, hi, &err);
        if (!std::isfinite(q)) throw QuadratureFailure("quadrature: non-finite integrand");
        return Panel{err, lo, hi, q};
    };

    const double min_width = (b - a) * std::ldexp(1.0, -std::min(max_depth, 60));
    std::vector<Panel> heap{make(a, b)};
    long double total_err = heap.front().err;
    for (std::size_t splits = 0; total_err > abs_tol; ++splits) {
        std::pop_heap(heap.begin(), heap.end());
        const Panel worst = heap.back();
        heap.pop_back();
        if (worst.b - worst.a <= min_width || splits > 200'000)
            throw QuadratureFailure("quadrature: absolute tolerance not reached (max depth)");
        const double m = 0.5 * (worst.a + worst.b);
        const Panel l = make(worst.a, m);
        const Panel r = make(m, worst.b);
        total_err += static_cast<long double>(l.err) + r.err - worst.err;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end());
    }

    double sum = 0.0, comp = 0.0;  // Kahan; panel values can span many scales
    for (const Panel& p : heap) {
        const double y = p.q - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace rdmol
