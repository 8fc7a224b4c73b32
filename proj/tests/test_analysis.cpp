#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rdmol/analysis.hpp"
#include "rdmol/grid.hpp"
#include "rdmol/mol.hpp"
#include "rdmol/time_integration.hpp"

using Catch::Approx;
using rdmol::Grid;
using rdmol::IntegratorConfig;
using rdmol::ProblemSpec;
using rdmol::ReferenceSolution;
using rdmol::SamplePoint;
using rdmol::StudyConfig;
using rdmol::Trajectory;

namespace {

// single-snapshot trajectory holding cell averages of three profiles
Trajectory snapshot(int N, const std::function<double(double)>& fa,
                    const std::function<double(double)>& fb,
                    const std::function<double(double)>& fc, double t) {
    const Grid grid(N);
    std::vector<double> data(3 * static_cast<std::size_t>(N));
    const auto a = rdmol::project_cells(fa, N, 1e-14);
    const auto b = rdmol::project_cells(fb, N, 1e-14);
    const auto c = rdmol::project_cells(fc, N, 1e-14);
    for (int k = 0; k < N; ++k) {
        data[k] = a[k];
        data[N + k] = b[k];
        data[2 * N + k] = c[k];
    }
    return Trajectory{grid, {t}, {rdmol::StateVector(grid, std::move(data))}, {}};
}

}  // namespace

TEST_CASE("cell-weighted norm") {
    const std::vector<double> u{1.0, 2.0};
    const std::vector<double> v{2.0, 1.0};
    REQUIRE(rdmol::l2_cell_norm(u, v) == Approx(1.0).margin(1e-15));
    REQUIRE_THROWS_AS(rdmol::l2_cell_norm(u, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("point reconstruction from averages is fourth order") {
    const double pi = std::acos(-1.0);
    auto f = [pi](double x) { return 2.0 + std::cos(pi * x); };
    auto flat = [](double) { return 1.0; };
    double prev_err = 0.0;
    for (int N : {16, 32, 64}) {
        const ReferenceSolution ref(snapshot(N, f, flat, flat, 0.0));
        double err = 0.0;
        for (double x : {0.003, 0.01, 0.25, 0.5, 0.77, 0.99, 1.0})
            err = std::max(err, std::abs(ref.value(0, 0.0, x) - f(x)));
        if (prev_err > 0.0) {
            const double rate = prev_err / err;
            REQUIRE(rate > 10.0);
            REQUIRE(rate < 24.0);
        }
        prev_err = err;
    }
    REQUIRE(prev_err < 1e-6);
}

TEST_CASE("reconstruction reproduces low-degree polynomials exactly") {
    // cumulative sums of a cubic lie on a quartic, so the stencil is exact
    auto f = [](double x) { return 1.0 + x - 0.5 * x * x + 0.125 * x * x * x; };
    auto flat = [](double) { return 1.0; };
    const ReferenceSolution ref(snapshot(10, f, flat, flat, 0.0));
    // interior points only: wall reflection assumes even symmetry
    for (double x : {0.25, 0.41, 0.6, 0.75})
        REQUIRE(ref.value(0, 0.0, x) == Approx(f(x)).margin(1e-11));
}

TEST_CASE("sampling conventions differ by half a cell") {
    auto ramp = [](double x) { return x; };
    ReferenceSolution ref = ReferenceSolution::analytic(
        [&](double, double x) { return ramp(x); }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; });
    const auto left = ref.sample_state(4, 0.0, SamplePoint::LeftEdge);
    const auto mid = ref.sample_state(4, 0.0, SamplePoint::Midpoint);
    REQUIRE(left[1] == Approx(0.25));
    REQUIRE(mid[1] == Approx(0.375));
}

TEST_CASE("time derivative of an analytic reference") {
    const double pi = std::acos(-1.0);
    ReferenceSolution ref = ReferenceSolution::analytic(
        [pi](double t, double x) { return std::exp(-t) * std::cos(pi * x); },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
    REQUIRE(ref.ddt(0, 0.5, 0.3, 1e-4) ==
            Approx(-std::exp(-0.5) * std::cos(pi * 0.3)).margin(1e-8));
}

TEST_CASE("identical trajectories give a zero error series") {
    const ProblemSpec spec = rdmol::default_problem();
    const Trajectory traj = rdmol::integrate(spec, Grid(8), IntegratorConfig{}, 0.2, {0.1, 0.2});
    Trajectory copy = traj;
    const auto es = rdmol::error_series(traj, ReferenceSolution(std::move(copy)));
    REQUIRE(es.N == 8);
    REQUIRE(es.times == std::vector<double>{0.1, 0.2});
    for (double e : es.eN) REQUIRE(e == 0.0);
}

TEST_CASE("residual of the exact slow mode matches the symbol gap") {
    // pure diffusion with a cosine mode: midpoint samples are exact
    // eigenvectors, so the residual is kA (4 N^2 sin^2(pi/2N) - pi^2) v
    ProblemSpec spec = rdmol::default_problem();
    spec.k1 = 0.0;
    spec.k_minus1 = 0.0;
    const double pi = std::acos(-1.0);
    const double kA = spec.kA;
    ReferenceSolution ref = ReferenceSolution::analytic(
        [pi, kA](double t, double x) { return 2.0 + std::exp(-kA * pi * pi * t) * std::cos(pi * x); },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
    for (int N : {8, 16}) {
        const auto e = rdmol::consistency_residual(spec, Grid(N), ref, 0.25, 1e-5);
        const double s = std::sin(pi / (2.0 * N));
        const double gap = kA * std::abs(4.0 * N * N * s * s - pi * pi);
        const double amp = std::exp(-kA * pi * pi * 0.25) * std::cos(pi * 0.5 / N);
        REQUIRE(e.sup_norm == Approx(gap * amp).epsilon(1e-6));
    }
}

TEST_CASE("spatially uniform equilibrium has zero residual") {
    const ProblemSpec spec = rdmol::default_problem();
    // k1 a b = k_minus1 c at (1, 2, 1)
    ReferenceSolution ref = ReferenceSolution::analytic(
        [](double, double) { return 1.0; }, [](double, double) { return 2.0; },
        [](double, double) { return 1.0; });
    const auto e = rdmol::consistency_residual(spec, Grid(12), ref, 0.3);
    REQUIRE(e.sup_norm <= 1e-9);
}

TEST_CASE("order fit recovers an exact power law") {
    REQUIRE(rdmol::fit_order({8, 16, 32}, {1.0, 0.5, 0.25}) == Approx(1.0).margin(1e-12));
    REQUIRE(rdmol::fit_order({8, 16, 32, 64}, {1.0, 0.25, 0.0625, 0.015625}) ==
            Approx(2.0).margin(1e-12));
}

TEST_CASE("study configuration validation") {
    const double T = 1.0;
    StudyConfig s;
    REQUIRE_NOTHROW(s.validate(T));
    StudyConfig bad = s;
    bad.N_ref = 500;  // not a multiple of 8
    REQUIRE_THROWS_AS(bad.validate(T), std::invalid_argument);
    bad = s;
    bad.N_ref = 256;  // under 4x the finest grid
    REQUIRE_THROWS_AS(bad.validate(T), std::invalid_argument);
    bad = s;
    bad.fit_time = 0.33;
    REQUIRE_THROWS_AS(bad.validate(T), std::invalid_argument);
    bad = s;
    bad.c_hat_fit_N = 24;
    REQUIRE_THROWS_AS(bad.validate(T), std::invalid_argument);
    bad = s;
    bad.times.push_back(2.0);
    REQUIRE_THROWS_AS(bad.validate(T), std::invalid_argument);
    bad = s;
    bad.consistency_times = {0.005};  // below the delta floor
    REQUIRE_THROWS_AS(bad.validate(T), std::invalid_argument);
}

TEST_CASE("small study end to end") {
    const ProblemSpec spec = rdmol::default_problem();
    StudyConfig study;
    study.Ns = {4, 8, 16};
    study.N_ref = 64;
    study.times = {0.1, 0.25};
    study.consistency_times = {0.1};
    study.delta_probe = {0.05, 0.1};
    study.fit_time = 0.25;
    study.c_hat_fit_N = 8;
    IntegratorConfig cfg;
    const auto rep = rdmol::run_convergence_study(spec, study, cfg, 2);

    REQUIRE(rep.errors.size() == 3);
    double prev = 1e300;
    for (const auto& es : rep.errors) {
        const double E = es.E_at(0.25);
        REQUIRE(E < prev);
        prev = E;
    }
    REQUIRE(rep.fitted_order >= 0.9);
    REQUIRE(rep.convergence_ok);
    REQUIRE(rep.consistency_ok);
    REQUIRE(rep.conservation_ok);
    REQUIRE(rep.boundedness_ok);
    REQUIRE(rep.adequacy_ok);
    REQUIRE(rep.c_hat > 0.0);
    REQUIRE(rep.consistency.size() == 3);

    // early-time probes recorded for the finest grid
    REQUIRE(rep.delta_probe_errors.size() == 2);
    for (double e : rep.delta_probe_errors) REQUIRE(e > 0.0);

    // the aggregation is deterministic regardless of thread count
    const auto rep1 = rdmol::run_convergence_study(spec, study, cfg, 1);
    for (std::size_t i = 0; i < rep.errors.size(); ++i)
        for (std::size_t q = 0; q < rep.errors[i].eN.size(); ++q)
            REQUIRE(rep.errors[i].eN[q] == rep1.errors[i].eN[q]);
}

TEST_CASE("projection error of the ramp is exact") {
    const std::vector<int> Ns{8, 16, 32, 64};
    const auto rep = rdmol::projection_convergence([](double x) { return x; }, Ns, 2);
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        const double exact = 1.0 / (2.0 * std::sqrt(3.0) * Ns[i]);
        REQUIRE(rep.errors[i] == Approx(exact).epsilon(1e-10));
    }
    REQUIRE(rep.fitted_order == Approx(1.0).margin(1e-6));
}

TEST_CASE("projection order for a smooth profile") {
    const double pi = std::acos(-1.0);
    const auto rep = rdmol::projection_convergence(
        [pi](double x) { return 2.0 + std::cos(pi * x); }, {8, 16, 32, 64}, 2);
    REQUIRE(rep.fitted_order >= 0.99);
    double prev = 1e300;
    for (double e : rep.errors) {
        REQUIRE(e < prev);
        prev = e;
    }
    REQUIRE_THROWS_AS(rdmol::projection_convergence([](double x) { return x; }, {8}, 3),
                      std::invalid_argument);
}
