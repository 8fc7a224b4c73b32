#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rdmol/grid.hpp"
#include "rdmol/mol.hpp"
#include "rdmol/time_integration.hpp"

namespace rdmol {

// Discrete L2 norm of u - v with cell-width weighting, sqrt(1/N sum diff^2).
inline double l2_cell_norm(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.empty())
        throw std::invalid_argument("l2_cell_norm: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u[i] - v[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(u.size()));
}

enum class SamplePoint { LeftEdge, Midpoint };

namespace detail {

// Point value at x from cell averages: derivative of the degree-4
// interpolant of the cumulative sum over a 4-cell stencil, which
// reproduces the averages exactly and is 4th-order accurate for smooth
// profiles. Walls use even reflection, matching the no-flux boundary.
inline double reconstruct_point(std::span<const double> cells, double x) {
    const int M = static_cast<int>(cells.size());
    if (M < 4) throw std::invalid_argument("reconstruct_point: need at least four cells");
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("reconstruct_point: point outside [0,1]");
    const double h = 1.0 / M;
    auto avg = [&](int m) {
        if (m < 0) m = -1 - m;
        if (m >= M) m = 2 * M - 1 - m;
        return cells[m];
    };
    int j = static_cast<int>(std::floor(x * M));
    if (j == M) j = M - 1;
    const int js = (x - j * h < 0.5 * h) ? j - 2 : j - 1;

    double y[5], G[5];
    G[0] = 0.0;
    for (int m = 0; m < 5; ++m) y[m] = (js + m) * h;
    for (int m = 0; m < 4; ++m) G[m + 1] = G[m] + h * avg(js + m);

    // derivative of the Lagrange interpolant of (y, G) at x
    double out = 0.0;
    for (int m = 0; m < 5; ++m) {
        double denom = 1.0, num = 0.0;
        for (int q = 0; q < 5; ++q) {
            if (q == m) continue;
            denom *= y[m] - y[q];
            double prod = 1.0;
            for (int r = 0; r < 5; ++r) {
                if (r == m || r == q) continue;
                prod *= x - y[r];
            }
            num += prod;
        }
        out += G[m] * num / denom;
    }
    return out;
}

}  // namespace detail

// Fine-grid trajectory with point evaluation, or an analytic stand-in used
// by tests and kernel cross-checks.
class ReferenceSolution {
public:
    explicit ReferenceSolution(Trajectory traj) : grid_(traj.grid), traj_(std::move(traj)) {}

    static ReferenceSolution analytic(std::function<double(double, double)> a,
                                      std::function<double(double, double)> b,
                                      std::function<double(double, double)> c) {
        ReferenceSolution r;
        r.fns_ = {std::move(a), std::move(b), std::move(c)};
        return r;
    }

    bool is_analytic() const { return !traj_.has_value(); }
    int N() const { return traj_ ? grid_->N : 0; }
    const Trajectory& trajectory() const {
        if (!traj_) throw std::logic_error("ReferenceSolution: analytic reference has no trajectory");
        return *traj_;
    }

    double value(int species, double t, double x) const {
        if (traj_)
            return detail::reconstruct_point(traj_->state_at(t).species(species), x);
        return fns_[species](t, x);
    }

    double ddt(int species, double t, double x, double fd_dt) const {
        if (!(fd_dt > 0.0)) throw std::invalid_argument("ReferenceSolution: bad FD step");
        return (value(species, t + fd_dt, x) - value(species, t - fd_dt, x)) / (2.0 * fd_dt);
    }

    // All three species sampled on an N-cell grid, species-major layout.
    std::vector<double> sample_state(int N, double t, SamplePoint where) const {
        std::vector<double> out(3 * static_cast<std::size_t>(N));
        for (int s = 0; s < 3; ++s)
            for (int k = 0; k < N; ++k) {
                const double x = (where == SamplePoint::LeftEdge)
                                     ? static_cast<double>(k) / N
                                     : (k + 0.5) / N;
                out[s * N + k] = value(s, t, x);
            }
        return out;
    }

    std::vector<double> sample_ddt(int N, double t, SamplePoint where, double fd_dt) const {
        std::vector<double> out(3 * static_cast<std::size_t>(N));
        for (int s = 0; s < 3; ++s)
            for (int k = 0; k < N; ++k) {
                const double x = (where == SamplePoint::LeftEdge)
                                     ? static_cast<double>(k) / N
                                     : (k + 0.5) / N;
                out[s * N + k] = ddt(s, t, x, fd_dt);
            }
        return out;
    }

private:
    ReferenceSolution() = default;
    std::optional<Grid> grid_;
    std::optional<Trajectory> traj_;
    std::array<std::function<double(double, double)>, 3> fns_;
};

struct ErrorSeries {
    int N = 0;
    std::vector<double> times;
    std::vector<double> eN;  // squared-error functional (1/2N) |u - v|^2
    std::vector<double> EN;  // sqrt(2 eN)

    double e_at(double t, double tol = 1e-9) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= tol) return eN[i];
        throw std::invalid_argument("ErrorSeries: no entry at requested time");
    }
    double E_at(double t, double tol = 1e-9) const { return std::sqrt(2.0 * e_at(t, tol)); }
};

// Squared discrepancy between a study trajectory and the reference, sampled
// at the reference's left cell edges. When the study shares the reference
// grid the cell values are compared directly (self-comparison semantics).
inline ErrorSeries error_series(const Trajectory& study, const ReferenceSolution& ref) {
    const int N = study.grid.N;
    ErrorSeries out;
    out.N = N;
    for (std::size_t i = 0; i < study.times.size(); ++i) {
        const double t = study.times[i];
        const std::vector<double>& u = study.states[i].data;
        std::vector<double> v;
        if (!ref.is_analytic() && ref.N() == N)
            v = ref.trajectory().state_at(t).data;
        else
            v = ref.sample_state(N, t, SamplePoint::LeftEdge);
        double sq = 0.0;
        for (std::size_t q = 0; q < u.size(); ++q) {
            const double d = u[q] - v[q];
            sq += d * d;
        }
        out.times.push_back(t);
        out.eN.push_back(sq / (2.0 * N));
        out.EN.push_back(std::sqrt(sq / N));
    }
    return out;
}

struct ConsistencyEntry {
    int N = 0;
    double t = 0.0;
    double sup_norm = 0.0;  // max_k |eps_k|
    double l2_norm = 0.0;   // Euclidean |eps|
};

// Residual of the reference solution in the semi-discrete system on an
// N-cell grid: eps = d/dt v - F(v) - Lap v, with v sampled at cell
// midpoints and d/dt v from a centered difference in time.
inline ConsistencyEntry consistency_residual(const ProblemSpec& spec, const Grid& grid,
                                             const ReferenceSolution& ref, double t,
                                             double fd_dt = 1e-3) {
    if (!(t - fd_dt > 0.0)) throw std::invalid_argument("consistency_residual: t too small for FD");
    const std::vector<double> v = ref.sample_state(grid.N, t, SamplePoint::Midpoint);
    const std::vector<double> dv = ref.sample_ddt(grid.N, t, SamplePoint::Midpoint, fd_dt);
    std::vector<double> f(v.size());
    rhs_into(spec, grid, v, f);
    ConsistencyEntry e;
    e.N = grid.N;
    e.t = t;
    double sq = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = dv[i] - f[i];
        e.sup_norm = std::max(e.sup_norm, std::abs(r));
        sq += r * r;
    }
    e.l2_norm = std::sqrt(sq);
    return e;
}

// slope of log(error) against log(N) over the last `use_last` points,
// negated so a first-order method reports ~1
inline double fit_order(const std::vector<int>& Ns, const std::vector<double>& errors,
                        std::size_t use_last = 3) {
    if (Ns.size() != errors.size() || Ns.size() < 2)
        throw std::invalid_argument("fit_order: need matching series of length >= 2");
    const std::size_t m = std::min(use_last, Ns.size());
    const std::size_t start = Ns.size() - m;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = start; i < Ns.size(); ++i) {
        if (!(errors[i] > 0.0)) throw std::domain_error("fit_order: nonpositive error value");
        const double lx = std::log(static_cast<double>(Ns[i]));
        const double ly = std::log(errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(m);
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct StudyConfig {
    std::vector<int> Ns{8, 16, 32, 64, 128};
    int N_ref = 512;
    std::vector<double> times{0.1, 0.25, 0.5, 1.0};
    std::vector<double> consistency_times{0.1, 0.25, 0.5};
    double fd_dt = 1e-3;
    double delta_floor = 0.01;
    std::vector<double> delta_probe{0.0025, 0.005, 0.01};
    bool reference_adequacy = true;
    double fit_time = 0.25;
    int c_hat_fit_N = 32;

    void validate(double T) const {
        if (Ns.empty()) throw std::invalid_argument("StudyConfig: no study resolutions");
        int prev = 0;
        for (int n : Ns) {
            if (n < 2) throw std::invalid_argument("StudyConfig: study N must be >= 2");
            if (n <= prev) throw std::invalid_argument("StudyConfig: Ns must be increasing");
            if (N_ref % n != 0)
                throw std::invalid_argument("StudyConfig: reference grid does not nest study grid");
            prev = n;
        }
        if (N_ref < 4 * Ns.back())
            throw std::invalid_argument("StudyConfig: reference must be at least 4x the finest study grid");
        if (reference_adequacy && N_ref % 2 != 0)
            throw std::invalid_argument("StudyConfig: adequacy probe needs an even reference grid");
        auto in_range = [T](double t) { return t > 0.0 && t <= T + 1e-12; };
        for (double t : times)
            if (!in_range(t)) throw std::invalid_argument("StudyConfig: target time outside (0, T]");
        for (double t : consistency_times) {
            if (!in_range(t)) throw std::invalid_argument("StudyConfig: consistency time outside (0, T]");
            if (t < delta_floor - 1e-12)
                throw std::invalid_argument("StudyConfig: consistency time below the delta floor");
            if (!(t - fd_dt > 0.0) || !in_range(t + fd_dt))
                throw std::invalid_argument("StudyConfig: FD stencil leaves the time range");
        }
        for (double t : delta_probe)
            if (!in_range(t)) throw std::invalid_argument("StudyConfig: delta probe outside (0, T]");
        bool fit_found = false;
        for (double t : times) fit_found = fit_found || std::abs(t - fit_time) <= 1e-12;
        if (!fit_found) throw std::invalid_argument("StudyConfig: fit_time must be a target time");
        if (std::find(Ns.begin(), Ns.end(), c_hat_fit_N) == Ns.end())
            throw std::invalid_argument("StudyConfig: c_hat_fit_N must be a study resolution");
        if (Ns.back() <= c_hat_fit_N)
            throw std::invalid_argument("StudyConfig: need study resolutions beyond c_hat_fit_N");
    }
};

struct ConvergenceReport {
    StudyConfig study;
    std::vector<ErrorSeries> errors;  // one per study N
    double fitted_order = 0.0;
    std::vector<ConsistencyEntry> consistency;
    double c_hat = 0.0;
    std::vector<double> conservation_drift;  // per study N, relative
    std::vector<double> trajectory_min;      // per study N
    std::vector<double> trajectory_max;      // per study N
    double max_spread = 0.0;                 // relative spread of the maxima
    std::vector<double> delta_probe_errors;  // e^N at the probe times, finest N
    double adequacy_ratio = 0.0;             // e^{N_ref/2} / e^{N_min} at fit_time
    bool convergence_ok = false;
    bool consistency_ok = false;
    bool conservation_ok = false;
    bool boundedness_ok = false;
    bool adequacy_ok = false;
    std::string notes;
};

namespace detail {

inline void run_jobs(std::vector<std::function<void()>>& jobs, int threads) {
    if (threads <= 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            jobs[i]();
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(threads, static_cast<int>(jobs.size()));
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Full verification sweep: integrates the reference and every study grid,
// then assembles error decay, consistency residuals, conservation drift and
// boundedness records. Per-grid integrations are independent jobs; results
// are aggregated in study order regardless of thread count.
inline ConvergenceReport run_convergence_study(const ProblemSpec& spec, const StudyConfig& study,
                                               const IntegratorConfig& cfg, int threads = 1) {
    spec.validate();
    cfg.validate();
    study.validate(spec.T);

    std::vector<double> ref_times = study.times;
    for (double t : study.consistency_times) {
        ref_times.push_back(t - study.fd_dt);
        ref_times.push_back(t);
        ref_times.push_back(t + study.fd_dt);
    }
    for (double t : study.delta_probe) ref_times.push_back(t);
    ref_times.push_back(study.fit_time);

    const int n_study = static_cast<int>(study.Ns.size());
    std::vector<Trajectory> study_traj;
    study_traj.reserve(n_study);
    for (int i = 0; i < n_study; ++i) study_traj.emplace_back(Trajectory{Grid(study.Ns[i]), {}, {}, {}});
    Trajectory ref_traj{Grid(study.N_ref), {}, {}, {}};
    Trajectory half_traj{Grid(2), {}, {}, {}};

    std::vector<std::function<void()>> jobs;
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto guarded = [&first_error, &err_mutex](std::function<void()> f) {
        return [f = std::move(f), &first_error, &err_mutex]() {
            try {
                f();
            } catch (...) {
                std::scoped_lock lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        };
    };

    jobs.push_back(guarded([&]() {
        ref_traj = integrate(spec, Grid(study.N_ref), cfg, spec.T, ref_times);
    }));
    if (study.reference_adequacy)
        jobs.push_back(guarded([&]() {
            half_traj = integrate(spec, Grid(study.N_ref / 2), cfg, spec.T, {study.fit_time});
        }));
    for (int i = 0; i < n_study; ++i) {
        jobs.push_back(guarded([&, i]() {
            std::vector<double> ts = study.times;
            if (i == n_study - 1)
                for (double t : study.delta_probe) ts.push_back(t);
            study_traj[i] = integrate(spec, Grid(study.Ns[i]), cfg, spec.T, ts);
        }));
    }
    detail::run_jobs(jobs, threads);
    if (first_error) std::rethrow_exception(first_error);

    ConvergenceReport rep;
    rep.study = study;
    const ReferenceSolution ref(std::move(ref_traj));

    for (int i = 0; i < n_study; ++i) rep.errors.push_back(error_series(study_traj[i], ref));

    std::vector<double> E_fit;
    for (const ErrorSeries& es : rep.errors) E_fit.push_back(es.E_at(study.fit_time));
    rep.fitted_order = fit_order(study.Ns, E_fit);
    bool decreasing = true;
    for (std::size_t i = 1; i < E_fit.size(); ++i) decreasing = decreasing && E_fit[i] < E_fit[i - 1];
    rep.convergence_ok = decreasing && rep.fitted_order >= 0.9;

    for (int n : study.Ns)
        for (double t : study.consistency_times)
            rep.consistency.push_back(consistency_residual(spec, Grid(n), ref, t, study.fd_dt));
    double fit_sup = 0.0;
    for (const ConsistencyEntry& e : rep.consistency)
        if (e.N == study.c_hat_fit_N) fit_sup = std::max(fit_sup, e.sup_norm);
    rep.c_hat = fit_sup * study.c_hat_fit_N;
    rep.consistency_ok = true;
    for (const ConsistencyEntry& e : rep.consistency)
        if (e.N > study.c_hat_fit_N)
            rep.consistency_ok = rep.consistency_ok && e.sup_norm <= 1.5 * rep.c_hat / e.N;

    for (int i = 0; i < n_study; ++i) {
        const auto& mon = study_traj[i].monitors;
        const double m0 = mon.front().mass;
        double drift = 0.0, mn = mon.front().min, mx = mon.front().max;
        for (const MonitorRecord& r : mon) {
            drift = std::max(drift, std::abs(r.mass - m0) / std::abs(m0));
            mn = std::min(mn, r.min);
            mx = std::max(mx, r.max);
        }
        rep.conservation_drift.push_back(drift);
        rep.trajectory_min.push_back(mn);
        rep.trajectory_max.push_back(mx);
    }
    rep.conservation_ok = true;
    for (double d : rep.conservation_drift) rep.conservation_ok = rep.conservation_ok && d <= 1e-8;
    const double mx_lo = *std::min_element(rep.trajectory_max.begin(), rep.trajectory_max.end());
    const double mx_hi = *std::max_element(rep.trajectory_max.begin(), rep.trajectory_max.end());
    rep.max_spread = (mx_hi - mx_lo) / mx_lo;
    bool min_ok = true;
    for (double m : rep.trajectory_min) min_ok = min_ok && m >= -1e-9;
    rep.boundedness_ok = min_ok && rep.max_spread < 0.05;

    for (double t : study.delta_probe)
        rep.delta_probe_errors.push_back(rep.errors.back().e_at(t));

    if (study.reference_adequacy) {
        const ErrorSeries half = error_series(half_traj, ref);
        rep.adequacy_ratio = half.e_at(study.fit_time) / rep.errors.front().e_at(study.fit_time);
        rep.adequacy_ok = rep.adequacy_ratio <= 0.25;
    }

    rep.notes =
        "error sampling follows the left-endpoint convention, which adds an O(1/N) offset "
        "between cell averages and point values; consistency residuals sample cell midpoints";
    return rep;
}

struct ProjectionReport {
    std::vector<int> Ns;
    int p = 2;
    std::vector<double> errors;
    double fitted_order = 0.0;
};

// ||f - f^N||_p for the piecewise-constant cell-average projection, by
// per-cell adaptive quadrature.
inline ProjectionReport projection_convergence(const std::function<double(double)>& f,
                                               const std::vector<int>& Ns, int p = 2) {
    if (p != 1 && p != 2) throw std::invalid_argument("projection_convergence: p must be 1 or 2");
    if (Ns.empty()) throw std::invalid_argument("projection_convergence: no resolutions");
    ProjectionReport rep;
    rep.Ns = Ns;
    rep.p = p;
    for (int N : Ns) {
        const std::vector<double> avg = project_cells(f, N, 1e-13);
        const double h = 1.0 / N;
        double total = 0.0;
        for (int k = 0; k < N; ++k) {
            const double fk = avg[k];
            total += integrate(
                [&](double x) {
                    const double d = std::abs(f(x) - fk);
                    return (p == 2) ? d * d : d;
                },
                k * h, (k + 1) * h, 1e-14);
        }
        rep.errors.push_back((p == 2) ? std::sqrt(total) : total);
    }
    rep.fitted_order = fit_order(Ns, rep.errors);
    return rep;
}

}  // namespace rdmol
