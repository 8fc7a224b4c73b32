// Acceptance sweep: one line per criterion, nonzero exit on any failure.
// Tolerances are pinned here and nowhere else.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rdmol/analysis.hpp"
#include "rdmol/grid.hpp"
#include "rdmol/heat_kernels.hpp"
#include "rdmol/mol.hpp"
#include "rdmol/multicell.hpp"
#include "rdmol/quadrature.hpp"
#include "rdmol/reaction_network.hpp"
#include "rdmol/time_integration.hpp"

namespace {

bool g_all_ok = true;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!ok) g_all_ok = false;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

rdmol::ReactionNetwork binding_network(double k1, double k_minus1) {
    rdmol::Complex ab;
    ab.coeff = {{0, 1}, {1, 1}};
    rdmol::Complex c;
    c.coeff = {{2, 1}};
    return rdmol::ReactionNetwork({"A", "B", "C"},
                                  {rdmol::Reaction{ab, c, k1}, rdmol::Reaction{c, ab, k_minus1}});
}

}  // namespace

int main() {
    const rdmol::ProblemSpec spec = rdmol::default_problem();
    const rdmol::StudyConfig study;  // N in {8..128}, reference 512
    const rdmol::IntegratorConfig cfg;
    const int threads =
        std::max(1, std::min(8, static_cast<int>(std::thread::hardware_concurrency())));

    std::printf("running the default study (reference N=%d, %d threads)...\n", study.N_ref,
                threads);
    const rdmol::ConvergenceReport rep = rdmol::run_convergence_study(spec, study, cfg, threads);

    // 1. error decay: E(N) strictly decreasing at t=0.25, order over the
    //    last three grids at least 0.9
    {
        std::vector<double> E;
        for (const auto& es : rep.errors) E.push_back(es.E_at(0.25));
        bool decreasing = true;
        for (std::size_t i = 1; i < E.size(); ++i) decreasing = decreasing && E[i] < E[i - 1];
        std::string detail = "E(N) =";
        for (double e : E) detail += " " + fmt(e);
        detail += ", fitted order " + fmt(rep.fitted_order);
        report("1. solution error decays with order >= 0.9", decreasing && rep.fitted_order >= 0.9,
               detail);
    }

    // 2. consistency: single C fitted at N=32, margin 1.5 at N in {64,128},
    //    times {0.1, 0.25, 0.5}
    {
        bool ok = true;
        double worst = 0.0;
        for (const auto& e : rep.consistency)
            if (e.N > 32) {
                const double cap = 1.5 * rep.c_hat / e.N;
                ok = ok && e.sup_norm <= cap;
                worst = std::max(worst, e.sup_norm * e.N / rep.c_hat);
            }
        report("2. residual envelope C/N with margin 1.5",
               ok && rep.consistency_ok,
               "C = " + fmt(rep.c_hat) + ", worst N*sup/C = " + fmt(worst));
    }

    // 3. conserved total: relative drift of the weighted sum <= 1e-8 at every N
    {
        double worst = 0.0;
        for (double d : rep.conservation_drift) worst = std::max(worst, d);
        report("3. conserved combination drifts <= 1e-8", worst <= 1e-8,
               "max relative drift " + fmt(worst));
    }

    // 4. boundedness: min >= -1e-9 and max spread < 5% across grids
    {
        double mn = 1e300;
        for (double m : rep.trajectory_min) mn = std::min(mn, m);
        report("4. nonnegativity and grid-uniform bound",
               mn >= -1e-9 && rep.max_spread < 0.05,
               "min " + fmt(mn) + ", max spread " + fmt(rep.max_spread * 100.0) + "%");
    }

    // supplementary: early-time error probes at the finest grid decrease as
    // the probe time grows
    {
        const auto& p = rep.delta_probe_errors;
        bool ok = p.size() == 3 && p[0] >= p[1] && p[1] >= p[2];
        report("S1. early-time probe errors shrink with the probe time", ok,
               "e(0.0025)=" + fmt(p.size() > 0 ? p[0] : -1.0) +
                   " e(0.005)=" + fmt(p.size() > 1 ? p[1] : -1.0) +
                   " e(0.01)=" + fmt(p.size() > 2 ? p[2] : -1.0));
    }

    // 5. discrete kernel converges uniformly: distances strictly decreasing,
    //    final/initial <= 0.25 at kappa=1, t=0.1
    {
        std::vector<double> d;
        for (int N : {8, 16, 32, 64, 128}) d.push_back(rdmol::kernel_distance(N, 1.0, 0.1));
        bool decreasing = true;
        for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i] < d[i - 1];
        const double ratio = d.back() / d.front();
        std::string detail = "distances =";
        for (double v : d) detail += " " + fmt(v);
        detail += ", ratio " + fmt(ratio);
        report("5. kernel distance decreasing with ratio <= 0.25", decreasing && ratio <= 0.25,
               detail);
    }

    // 6. kernel normalization, uniform bound, and the integral of the tail sum
    {
        bool mass_ok = true;
        double worst_mass = 0.0;
        const rdmol::EigenSystem es16 = rdmol::EigenSystem::compute(16);
        for (double t : {0.05, 0.1, 0.5, 1.0})
            for (int i = 0; i < 10; ++i) {
                const double x = (i + 0.5) / 10.0;
                double mass = 0.0;
                for (int j = 0; j < 16; ++j)
                    mass += rdmol::eval_discrete(es16, 1.0, t, x, (j + 0.5) / 16.0) / 16.0;
                worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
                mass_ok = mass_ok && std::abs(mass - 1.0) <= 1e-12;
            }

        bool bound_ok = true;
        double worst_excess = -1e300;
        for (int N : {8, 32}) {
            const rdmol::EigenSystem es = rdmol::EigenSystem::compute(N);
            for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) {
                const double cap = 1.0 + 2.0 * rdmol::eval_f(4.0 * t) + 1e-10;
                for (int i = 0; i < 20; ++i)
                    for (int j = 0; j < 20; ++j) {
                        const double v = std::abs(rdmol::eval_discrete(
                            es, 1.0, t, (i + 0.5) / 20.0, (j + 0.5) / 20.0));
                        worst_excess = std::max(worst_excess, v - cap);
                        bound_ok = bound_ok && v <= cap;
                    }
            }
        }

        // integral of the tail sum: substitute t = s^2 to tame the
        // square-root blow-up, then add a certified remainder
        const double A = 25.0;
        const double body = rdmol::integrate(
            [](double s) { return 2.0 * s * rdmol::eval_f(s * s, 1e-13); }, 1e-8, std::sqrt(A),
            1e-9);
        const double tail_cap = std::exp(-A) / (1.0 - std::exp(-3.0 * A)) * 1.001;
        const double pi = std::acos(-1.0);
        const double total = body + tail_cap;
        const bool f_ok = total <= pi * pi / 6.0 + 1e-6 && std::abs(total - pi * pi / 6.0) <= 1e-6;
        report("6. kernel mass 1e-12, amplitude bound, tail-sum integral",
               mass_ok && bound_ok && f_ok,
               "mass defect " + fmt(worst_mass) + ", bound excess " + fmt(worst_excess) +
                   ", integral " + fmt(total) + " vs pi^2/6 " + fmt(pi * pi / 6.0));
    }

    // 7. quadratic form of the reaction part stays under (2 k1 M + k_minus1)|y|^2
    {
        const int N = 16;
        const rdmol::Grid grid(N);
        const double M = 4.0;
        const double cap = 2.0 * spec.k1 * M + spec.k_minus1;
        std::mt19937_64 rng(0x5eed2024);
        std::uniform_real_distribution<double> box(0.0, M);
        std::normal_distribution<double> gauss(0.0, 1.0);
        bool ok = true;
        double worst = -1e300;
        for (int s = 0; s < 100; ++s) {
            rdmol::StateVector u{grid, std::vector<double>(3 * N)};
            for (double& v : u.data) v = box(rng);
            const rdmol::Matrix J = rdmol::reaction_jacobian(spec, u);
            for (int trial = 0; trial < 100; ++trial) {
                std::vector<double> y(3 * N);
                double norm2 = 0.0;
                for (double& v : y) {
                    v = gauss(rng);
                    norm2 += v * v;
                }
                const auto Jy = J * y;
                double quad = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) quad += y[i] * Jy[i];
                worst = std::max(worst, quad - cap * norm2);
                ok = ok && quad <= cap * norm2 + 1e-9;
            }
        }
        report("7. one-sided growth bound on the reaction jacobian", ok,
               "10^4 probes, worst excess " + fmt(worst));
    }

    // 8. projection errors: exact 1/(2 sqrt(3) N) for the ramp, order >= 0.99
    //    for the cosine profile
    {
        const std::vector<int> Ns{8, 16, 32, 64, 128};
        const auto ramp = rdmol::projection_convergence([](double x) { return x; }, Ns, 2);
        bool exact_ok = true;
        double worst = 0.0;
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            const double want = 1.0 / (2.0 * std::sqrt(3.0) * Ns[i]);
            const double rel = std::abs(ramp.errors[i] - want) / want;
            worst = std::max(worst, rel);
            exact_ok = exact_ok && rel <= 1e-10;
        }
        const double pi = std::acos(-1.0);
        const auto cosine = rdmol::projection_convergence(
            [pi](double x) { return 2.0 + std::cos(pi * x); }, Ns, 2);
        report("8. projection errors exact for the ramp, order >= 0.99 for the cosine",
               exact_ok && cosine.fitted_order >= 0.99,
               "worst ramp deviation " + fmt(worst) + ", cosine order " +
                   fmt(cosine.fitted_order));
    }

    // 9. the compartment chain with transport kappa N^2 reproduces the
    //    semi-discrete field; conserved dimensions match; the lifted
    //    equilibrium stays complex balanced
    {
        const int N = 8;
        const rdmol::Grid grid(N);
        const rdmol::ReactionNetwork base = binding_network(spec.k1, spec.k_minus1);
        const double n2 = static_cast<double>(N) * N;
        const auto mc =
            rdmol::expand(base, N, {spec.kA * n2, spec.kB * n2, spec.kC * n2});
        std::mt19937_64 rng(0xabc1234);
        std::uniform_real_distribution<double> unif(0.05, 3.0);
        bool rhs_ok = true;
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            std::vector<double> u(3 * N), x(3 * N), f_mol(3 * N);
            for (double& v : u) v = unif(rng);
            for (int k = 0; k < N; ++k)
                for (int sp = 0; sp < 3; ++sp) x[3 * k + sp] = u[sp * N + k];
            const auto f_net = mc.expanded.rhs(x);
            rdmol::rhs_into(spec, grid, u, f_mol);
            double scale = 1.0;
            for (double v : f_mol) scale = std::max(scale, std::abs(v));
            for (int k = 0; k < N; ++k)
                for (int sp = 0; sp < 3; ++sp) {
                    const double rel = std::abs(f_net[3 * k + sp] - f_mol[sp * N + k]) / scale;
                    worst = std::max(worst, rel);
                    rhs_ok = rhs_ok && rel <= 1e-13;
                }
        }
        const bool dims_ok =
            mc.expanded.conservation_laws().size() == base.conservation_laws().size();
        const auto x_star = rdmol::solve_equilibrium(base, {2.0, 3.0, 0.0});
        const bool balanced =
            mc.expanded.is_complex_balanced(rdmol::lift(x_star, N), 1e-9);
        report("9. compartment expansion matches the semi-discrete field", rhs_ok && dims_ok && balanced,
               "worst relative gap " + fmt(worst) + ", conserved dims " +
                   (dims_ok ? "equal" : "differ") + ", lifted equilibrium " +
                   (balanced ? "balanced" : "unbalanced"));
    }

    // 10. pure diffusion: implicit time stepping agrees with the spectral
    //     evaluation to 1e-8 in sup norm at t=0.5, N=64
    {
        rdmol::ProblemSpec pure = rdmol::default_problem();
        pure.k1 = 0.0;
        pure.k_minus1 = 0.0;
        const int N = 64;
        const rdmol::Grid grid(N);
        rdmol::IntegratorConfig tight;
        tight.rel_tol = 1e-11;
        tight.abs_tol = 1e-13;
        const double t = 0.5;
        const rdmol::Trajectory traj = rdmol::integrate(pure, grid, tight, t, {t});
        const auto& got = traj.state_at(t);
        double worst = 0.0;
        for (int s = 0; s < 3; ++s) {
            rdmol::KernelSpec ks{rdmol::KernelKind::DiscreteNeumann, pure.diffusion(s), 1e-12, N};
            std::vector<double> u0(N);
            const auto proj = rdmol::project_cells(
                s == 0 ? pure.a0 : (s == 1 ? pure.b0 : pure.c0), N);
            const auto want = rdmol::duhamel_eval(ks, proj, {}, t);
            for (int k = 0; k < N; ++k)
                worst = std::max(worst, std::abs(got.species(s)[k] - want[k]));
        }
        report("10. time stepping matches the spectral solution to 1e-8", worst <= 1e-8,
               "sup gap " + fmt(worst));
    }

    std::printf("%s\n", g_all_ok ? "acceptance: all criteria passed" : "acceptance: FAILURES");
    return g_all_ok ? 0 : 1;
}
