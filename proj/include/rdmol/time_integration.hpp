#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rdmol/banded.hpp"
#include "rdmol/grid.hpp"
#include "rdmol/mol.hpp"

namespace rdmol {

enum class Method { ImplicitTrapezoid, BackwardEuler };

struct IntegratorConfig {
    Method method = Method::ImplicitTrapezoid;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double dt_init = 1e-4;
    double dt_min = 1e-13;
    double dt_max = 0.05;
    double newton_tol = 1e-12;
    int newton_max_iter = 16;
    long max_steps = 5'000'000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
        if (!(dt_min > 0.0) || !(dt_init >= dt_min) || !(dt_max >= dt_init))
            throw std::invalid_argument("IntegratorConfig: need dt_min <= dt_init <= dt_max");
        if (!(newton_tol > 0.0) || newton_max_iter < 2)
            throw std::invalid_argument("IntegratorConfig: bad Newton parameters");
    }
};

struct IntegratorFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MonitorRecord {
    double t, mass, min, max, mu_log;
};

struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<MonitorRecord> monitors;

    const StateVector& state_at(double t, double tol = 1e-9) const {
        for (std::size_t i = 0; i < times.size(); ++i)
            if (std::abs(times[i] - t) <= tol) return states[i];
        throw std::invalid_argument("Trajectory: no sample at requested time");
    }
};

namespace detail {

// One-step theta method (theta = 1/2 trapezoid, theta = 1 backward Euler)
// with a damped Newton solve on a banded cell-major system. The Jacobian
// couples the three species inside a cell and same-species neighbours, so
// the bandwidth is 3 on either side.
class ThetaStepper {
public:
    ThetaStepper(const ProblemSpec& spec, const Grid& grid, double theta,
                 const IntegratorConfig& cfg)
        : spec_(spec), grid_(grid), theta_(theta), cfg_(cfg), n_(3 * grid.N), M_(n_, 3, 3),
          fu_(n_), fv_(n_), g_cell_(n_), v_(n_) {}

    // Advances u by dt into out; false if Newton did not converge.
    bool step(const std::vector<double>& u, double dt, std::vector<double>& out) {
        const int N = grid_.N;
        rhs_into(spec_, grid_, u, fu_);

        // explicit predictor
        v_ = u;
        for (int i = 0; i < n_; ++i) v_[i] += dt * fu_[i];

        for (int it = 0; it < cfg_.newton_max_iter; ++it) {
            rhs_into(spec_, grid_, v_, fv_);
            double gmax = 0.0;
            for (int i = 0; i < n_; ++i) {
                const double g =
                    v_[i] - u[i] - dt * ((1.0 - theta_) * fu_[i] + theta_ * fv_[i]);
                g_cell_[cell_index(i, N)] = -g;
                gmax = std::max(gmax, std::abs(g));
            }
            const double scale = 1.0 + std::max(std::abs(vmax(u)), std::abs(vmax(v_)));
            if (gmax <= cfg_.newton_tol * scale) {
                out = v_;
                return true;
            }
            assemble(dt * theta_);
            try {
                M_.factor();
            } catch (const std::runtime_error&) {
                return false;
            }
            M_.solve(g_cell_);
            double dmax = 0.0;
            for (int i = 0; i < n_; ++i) {
                const double d = g_cell_[cell_index(i, N)];
                v_[i] += d;
                dmax = std::max(dmax, std::abs(d));
            }
            if (!std::isfinite(dmax) || dmax > 1e8) return false;
        }
        return false;
    }

private:
    static int cell_index(int species_major, int N) {
        const int s = species_major / N;
        const int k = species_major % N;
        return 3 * k + s;
    }

    static double vmax(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    // M = I - gamma * J(v_), assembled in cell-major order.
    void assemble(double gamma) {
        const int N = grid_.N;
        const double* a = v_.data();
        const double* b = v_.data() + N;
        M_.zero();
        const double sk[3] = {spec_.kA * static_cast<double>(N) * N,
                              spec_.kB * static_cast<double>(N) * N,
                              spec_.kC * static_cast<double>(N) * N};
        for (int k = 0; k < N; ++k) {
            const double da = -spec_.k1 * b[k];
            const double db = -spec_.k1 * a[k];
            const double dc = spec_.k_minus1;
            const double jr[3][3] = {{da, db, dc}, {da, db, dc}, {-da, -db, -dc}};
            for (int s = 0; s < 3; ++s) {
                const int p = 3 * k + s;
                const double lap_diag = (k == 0 || k == N - 1) ? -sk[s] : -2.0 * sk[s];
                for (int s2 = 0; s2 < 3; ++s2) {
                    const double j = jr[s][s2] + (s == s2 ? lap_diag : 0.0);
                    M_.at(p, 3 * k + s2) = (s == s2 ? 1.0 : 0.0) - gamma * j;
                }
                if (k > 0) M_.at(p, 3 * (k - 1) + s) = -gamma * sk[s];
                if (k < N - 1) M_.at(p, 3 * (k + 1) + s) = -gamma * sk[s];
            }
        }
    }

    const ProblemSpec& spec_;
    const Grid& grid_;
    double theta_;
    const IntegratorConfig& cfg_;
    int n_;
    BandedMatrix M_;
    std::vector<double> fu_, fv_, g_cell_, v_;
};

inline double vnorm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline MonitorRecord make_monitor(const ProblemSpec& spec, const Grid& grid, double t,
                                  const std::vector<double>& u) {
    const int N = grid.N;
    double sa = 0.0, sb = 0.0, sc = 0.0, mn = u[0], mx = u[0];
    for (int k = 0; k < N; ++k) {
        sa += u[k];
        sb += u[N + k];
        sc += u[2 * N + k];
    }
    for (double v : u) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const double mu = reaction_log_norm_unchecked(
        spec, std::span<const double>(u.data(), N), std::span<const double>(u.data() + N, N));
    return MonitorRecord{t, grid.h() * (sa + sb + 2.0 * sc), mn, mx, mu};
}

// Adaptive driver: step doubling compares one dt step against two dt/2
// steps, advances with the halved solution, and controls the weighted RMS
// of their difference.
inline Trajectory integrate_core(const ProblemSpec& spec, const Grid& grid,
                                 const IntegratorConfig& cfg, std::vector<double> u, double t0,
                                 double t1, std::vector<double> sample_times) {
    const int n = 3 * grid.N;
    const double theta = (cfg.method == Method::BackwardEuler) ? 1.0 : 0.5;
    const int order = (cfg.method == Method::BackwardEuler) ? 1 : 2;
    const double err_denom = std::pow(2.0, order) - 1.0;
    ThetaStepper stepper(spec, grid, theta, cfg);

    std::sort(sample_times.begin(), sample_times.end());
    sample_times.erase(std::unique(sample_times.begin(), sample_times.end()), sample_times.end());
    for (double s : sample_times)
        if (s < t0 - 1e-12 || s > t1 + 1e-12)
            throw std::invalid_argument("integrate: sample time outside [t0, t1]");

    Trajectory traj{grid, {}, {}, {}};
    traj.monitors.push_back(make_monitor(spec, grid, t0, u));
    std::size_t next = 0;
    while (next < sample_times.size() && sample_times[next] <= t0 + 1e-14) {
        traj.times.push_back(sample_times[next]);
        traj.states.emplace_back(grid, u);
        ++next;
    }

    double t = t0;
    double dt_ctrl = std::min(cfg.dt_init, cfg.dt_max);
    std::vector<double> ubig(n), uhalf(n), usmall(n);
    long steps = 0;

    while (t < t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
        if (++steps > cfg.max_steps) throw IntegratorFailure("integrate: step budget exhausted");
        const double target =
            (next < sample_times.size()) ? std::min(sample_times[next], t1) : t1;
        double dt = std::min(dt_ctrl, cfg.dt_max);
        bool clipped = false;
        if (t + dt >= target - 1e-14 * std::max(1.0, std::abs(target))) {
            dt = target - t;
            clipped = true;
        }

        const bool ok = stepper.step(u, dt, ubig) && stepper.step(u, 0.5 * dt, uhalf) &&
                        stepper.step(uhalf, 0.5 * dt, usmall);
        if (!ok) {
            dt_ctrl = dt * 0.25;
            if (dt_ctrl < cfg.dt_min)
                throw IntegratorFailure("integrate: Newton failed at the minimum step size");
            continue;
        }

        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double w =
                cfg.abs_tol + cfg.rel_tol * std::max(std::abs(u[i]), std::abs(usmall[i]));
            const double e = (ubig[i] - usmall[i]) / w;
            sq += e * e;
        }
        const double E = std::sqrt(sq / n) / err_denom;
        const double factor =
            (E > 0.0) ? std::clamp(0.9 * std::pow(E, -1.0 / (order + 1)), 0.2, 5.0) : 5.0;

        if (E <= 1.0) {
            t = (clipped) ? target : t + dt;
            u = usmall;
            if (vnorm_inf(u) > 1e8) throw IntegratorFailure("integrate: state blow-up");
            traj.monitors.push_back(make_monitor(spec, grid, t, u));
            while (next < sample_times.size() &&
                   std::abs(sample_times[next] - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
                traj.times.push_back(sample_times[next]);
                traj.states.emplace_back(grid, u);
                ++next;
            }
            const double candidate = dt * factor;
            dt_ctrl = clipped ? std::max(dt_ctrl, candidate) : candidate;
        } else {
            dt_ctrl = dt * std::min(factor, 0.5);
            if (dt_ctrl < cfg.dt_min)
                throw IntegratorFailure("integrate: error control demands dt below dt_min");
        }
    }
    return traj;
}

}  // namespace detail

inline Trajectory integrate(const ProblemSpec& spec, const Grid& grid, const IntegratorConfig& cfg,
                            double t_end, const std::vector<double>& sample_times) {
    spec.validate();
    cfg.validate();
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate: t_end must be positive");
    const StateVector u0 = project_initial(spec, grid);
    return detail::integrate_core(spec, grid, cfg, u0.data, 0.0, t_end, sample_times);
}

// Relaxes the semi-discrete system until the right-hand side drops below
// rhs_tol in the max norm, growing the horizon geometrically.
inline StateVector steady_state(const ProblemSpec& spec, const Grid& grid,
                                const IntegratorConfig& cfg, double rhs_tol = 1e-10,
                                double t_cap = 1e5) {
    spec.validate();
    cfg.validate();
    StateVector u = project_initial(spec, grid);
    std::vector<double> f(u.data.size());
    double t = 0.0, horizon = 1.0;
    while (true) {
        rhs_into(spec, grid, u.data, f);
        if (detail::vnorm_inf(f) <= rhs_tol) return u;
        if (t >= t_cap)
            throw IntegratorFailure("steady_state: no equilibrium within the time cap");
        const Trajectory chunk =
            detail::integrate_core(spec, grid, cfg, u.data, t, t + horizon, {t + horizon});
        u.data = chunk.states.back().data;
        t += horizon;
        horizon *= 8.0;
    }
}

}  // namespace rdmol
