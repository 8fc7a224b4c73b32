#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rdmol/analysis.hpp"
#include "rdmol/expression.hpp"
#include "rdmol/grid.hpp"
#include "rdmol/heat_kernels.hpp"
#include "rdmol/mol.hpp"
#include "rdmol/multicell.hpp"
#include "rdmol/network_io.hpp"
#include "rdmol/report_io.hpp"
#include "rdmol/time_integration.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream must_open(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot open output file: " + p.string());
    return f;
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const rdmol::ExperimentConfig& cfg, int threads, unsigned long long seed,
                    const std::vector<std::string>& outputs) {
    auto f = must_open(out_dir / "manifest.json");
    f << rdmol::make_manifest(command, cfg, threads, seed, outputs).dump(2) << '\n';
}

int run_simulate(const rdmol::ExperimentConfig& cfg, int N, const std::vector<double>& times,
                 const fs::path& out_dir, const std::string& command, int threads,
                 unsigned long long seed) {
    const rdmol::Grid grid(N);
    const rdmol::Trajectory traj =
        rdmol::integrate(cfg.problem, grid, cfg.integrator, cfg.problem.T, times);
    {
        auto f = must_open(out_dir / "trajectory.csv");
        rdmol::write_trajectory_csv(f, traj);
    }
    {
        auto f = must_open(out_dir / "monitors.csv");
        rdmol::write_monitors_csv(f, traj.monitors);
    }
    write_manifest(out_dir, command, cfg, threads, seed,
                   {"trajectory.csv", "monitors.csv", "manifest.json"});
    const double m0 = traj.monitors.front().mass;
    double drift = 0.0, mn = traj.monitors.front().min;
    for (const rdmol::MonitorRecord& r : traj.monitors) {
        drift = std::max(drift, std::abs(r.mass - m0) / std::abs(m0));
        mn = std::min(mn, r.min);
    }
    std::cout << "simulate: N=" << N << " steps=" << (traj.monitors.size() - 1)
              << " mass_drift=" << rdmol::fmt17(drift) << " min=" << rdmol::fmt17(mn) << '\n';
    return 0;
}

int run_convergence(const rdmol::ExperimentConfig& cfg, const fs::path& out_dir,
                    const std::string& command, int threads, unsigned long long seed) {
    const rdmol::ConvergenceReport rep =
        rdmol::run_convergence_study(cfg.problem, cfg.study, cfg.integrator, threads);
    {
        auto f = must_open(out_dir / "errors.csv");
        rdmol::write_errors_csv(f, rep.errors);
    }
    {
        auto f = must_open(out_dir / "consistency.csv");
        rdmol::write_consistency_csv(f, rep.consistency);
    }
    {
        auto f = must_open(out_dir / "report.json");
        f << rdmol::report_to_json(rep).dump(2) << '\n';
    }
    {
        std::vector<rdmol::PlotSeries> series;
        rdmol::PlotSeries err;
        err.label = "E(N) at t=" + rdmol::fmt17(rep.study.fit_time);
        for (std::size_t i = 0; i < rep.errors.size(); ++i) {
            err.x.push_back(rep.study.Ns[i]);
            err.y.push_back(rep.errors[i].E_at(rep.study.fit_time));
        }
        series.push_back(err);
        rdmol::PlotSeries slope;
        slope.label = "slope -1";
        slope.x = err.x;
        for (double n : err.x) slope.y.push_back(err.y.front() * err.x.front() / n);
        series.push_back(slope);
        auto f = must_open(out_dir / "convergence.svg");
        rdmol::write_svg_loglog(f, "error decay", "N", "E(N)", series);
    }
    write_manifest(out_dir, command, cfg, threads, seed,
                   {"errors.csv", "consistency.csv", "report.json", "convergence.svg",
                    "manifest.json"});
    std::cout << "convergence: order=" << rdmol::fmt17(rep.fitted_order)
              << " c_hat=" << rdmol::fmt17(rep.c_hat)
              << " flags: convergence=" << (rep.convergence_ok ? "pass" : "fail")
              << " consistency=" << (rep.consistency_ok ? "pass" : "fail")
              << " conservation=" << (rep.conservation_ok ? "pass" : "fail")
              << " boundedness=" << (rep.boundedness_ok ? "pass" : "fail") << '\n';
    return (rep.convergence_ok && rep.consistency_ok && rep.conservation_ok && rep.boundedness_ok)
               ? 0
               : 1;
}

int run_consistency(const rdmol::ExperimentConfig& cfg, const fs::path& out_dir,
                    const std::string& command, int threads, unsigned long long seed) {
    std::vector<double> ref_times;
    for (double t : cfg.study.consistency_times) {
        ref_times.push_back(t - cfg.study.fd_dt);
        ref_times.push_back(t);
        ref_times.push_back(t + cfg.study.fd_dt);
    }
    rdmol::Trajectory ref_traj = rdmol::integrate(
        cfg.problem, rdmol::Grid(cfg.study.N_ref), cfg.integrator, cfg.problem.T, ref_times);
    const rdmol::ReferenceSolution ref(std::move(ref_traj));
    std::vector<rdmol::ConsistencyEntry> entries;
    for (int n : cfg.study.Ns)
        for (double t : cfg.study.consistency_times)
            entries.push_back(rdmol::consistency_residual(cfg.problem, rdmol::Grid(n), ref, t,
                                                          cfg.study.fd_dt));
    {
        auto f = must_open(out_dir / "consistency.csv");
        rdmol::write_consistency_csv(f, entries);
    }
    write_manifest(out_dir, command, cfg, threads, seed, {"consistency.csv", "manifest.json"});
    for (const rdmol::ConsistencyEntry& e : entries)
        std::cout << "consistency: N=" << e.N << " t=" << rdmol::fmt17(e.t)
                  << " sup=" << rdmol::fmt17(e.sup_norm) << " l2=" << rdmol::fmt17(e.l2_norm)
                  << '\n';
    return 0;
}

int run_kernels(const rdmol::ExperimentConfig& cfg, double kappa, double t,
                const std::vector<int>& Ns, const fs::path& out_dir, const std::string& command,
                int threads, unsigned long long seed) {
    std::vector<double> dist;
    for (int n : Ns) dist.push_back(rdmol::kernel_distance(n, kappa, t));
    {
        auto f = must_open(out_dir / "kernels.csv");
        f << "N,distance\n";
        for (std::size_t i = 0; i < Ns.size(); ++i)
            f << Ns[i] << ',' << rdmol::fmt17(dist[i]) << '\n';
    }
    write_manifest(out_dir, command, cfg, threads, seed, {"kernels.csv", "manifest.json"});
    std::cout << "kernels: kappa=" << rdmol::fmt17(kappa) << " t=" << rdmol::fmt17(t)
              << " f(4t)=" << rdmol::fmt17(rdmol::eval_f(4.0 * t)) << '\n';
    for (std::size_t i = 0; i < Ns.size(); ++i)
        std::cout << "kernels: N=" << Ns[i] << " distance=" << rdmol::fmt17(dist[i]) << '\n';
    return 0;
}

int run_project(const rdmol::ExperimentConfig& cfg, const std::string& expr_text,
                const std::vector<int>& Ns, int p, const fs::path& out_dir,
                const std::string& command, int threads, unsigned long long seed) {
    const auto f = rdmol::parse_expression(expr_text);
    const rdmol::ProjectionReport rep = rdmol::projection_convergence(f, Ns, p);
    {
        auto out = must_open(out_dir / "projection.csv");
        rdmol::write_projection_csv(out, rep);
    }
    write_manifest(out_dir, command, cfg, threads, seed, {"projection.csv", "manifest.json"});
    std::cout << "project: p=" << p << " order=" << rdmol::fmt17(rep.fitted_order) << '\n';
    return 0;
}

int run_multicell(const rdmol::ExperimentConfig& cfg, const std::string& network_path, int cells,
                  const std::vector<double>& transport, const fs::path& out_dir,
                  const std::string& command, int threads, unsigned long long seed) {
    const rdmol::ReactionNetwork base = rdmol::parse_network_file(network_path);
    const rdmol::MulticellNetwork mc = rdmol::expand(base, cells, transport);
    {
        auto f = must_open(out_dir / "expanded.network");
        f << rdmol::format_network(mc.expanded);
    }
    const std::vector<std::vector<long long>> laws = mc.expanded.conservation_laws();
    {
        nlohmann::ordered_json j;
        j["cells"] = cells;
        j["base_species"] = base.species_count();
        j["base_reactions"] = base.reaction_count();
        j["species"] = mc.expanded.species_count();
        j["reactions"] = mc.expanded.reaction_count();
        j["conservation_laws"] = laws;
        auto f = must_open(out_dir / "multicell.json");
        f << j.dump(2) << '\n';
    }
    write_manifest(out_dir, command, cfg, threads, seed,
                   {"expanded.network", "multicell.json", "manifest.json"});
    std::cout << "multicell: cells=" << cells << " species=" << mc.expanded.species_count()
              << " reactions=" << mc.expanded.reaction_count()
              << " conservation_laws=" << laws.size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::string command;
    for (int i = 0; i < argc; ++i) {
        if (i) command += ' ';
        command += argv[i];
    }

    CLI::App app{"method-of-lines reaction-diffusion toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir_str = "out";
    int threads = 1;
    unsigned long long seed = 0;
    app.add_option("--config", config_path, "experiment config file");
    app.add_option("--out", out_dir_str, "output directory (created if missing)");
    app.add_option("--threads", threads, "worker threads for study runs")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed echoed into the manifest");

    auto* sim = app.add_subcommand("simulate", "integrate one grid and write the trajectory");
    int sim_N = 64;
    std::string sim_times = "0.1,0.25,0.5,1.0";
    sim->add_option("--N", sim_N, "grid cells");
    sim->add_option("--times", sim_times, "comma-separated sample times");

    auto* conv = app.add_subcommand("convergence", "full error/consistency/conservation study");

    auto* cons = app.add_subcommand("consistency", "semi-discrete residuals of the fine solution");

    auto* kern = app.add_subcommand("kernels", "heat kernel distances and bounds");
    double kern_kappa = 1.0, kern_t = 0.1;
    std::string kern_Ns = "8,16,32,64,128";
    kern->add_option("--kappa", kern_kappa, "diffusion coefficient");
    kern->add_option("--t", kern_t, "evaluation time");
    kern->add_option("--Ns", kern_Ns, "comma-separated grid sizes");

    auto* proj = app.add_subcommand("project", "cell-average projection error table");
    std::string proj_expr = "2 + cos(pi*x)";
    std::string proj_Ns = "8,16,32,64,128";
    int proj_p = 2;
    proj->add_option("--expr", proj_expr, "profile expression in x");
    proj->add_option("--Ns", proj_Ns, "comma-separated grid sizes");
    proj->add_option("--p", proj_p, "norm exponent (1 or 2)");

    auto* mc = app.add_subcommand("multicell", "expand a network into diffusively coupled cells");
    std::string mc_network;
    int mc_cells = 3;
    std::string mc_transport;
    mc->add_option("--network", mc_network, "base network file")->required();
    mc->add_option("--cells", mc_cells, "number of cells");
    mc->add_option("--transport", mc_transport, "comma-separated per-species transport rates")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        rdmol::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = rdmol::parse_experiment_config_file(config_path);
        cfg.problem.validate();
        cfg.integrator.validate();

        const fs::path out_dir(out_dir_str);
        fs::create_directories(out_dir);

        if (*sim)
            return run_simulate(cfg, sim_N, rdmol::detail::parse_double_list(sim_times, 0), out_dir,
                                command, threads, seed);
        if (*conv) return run_convergence(cfg, out_dir, command, threads, seed);
        if (*cons) return run_consistency(cfg, out_dir, command, threads, seed);
        if (*kern) {
            std::vector<int> Ns;
            for (double d : rdmol::detail::parse_double_list(kern_Ns, 0))
                Ns.push_back(static_cast<int>(d));
            return run_kernels(cfg, kern_kappa, kern_t, Ns, out_dir, command, threads, seed);
        }
        if (*proj) {
            std::vector<int> Ns;
            for (double d : rdmol::detail::parse_double_list(proj_Ns, 0))
                Ns.push_back(static_cast<int>(d));
            return run_project(cfg, proj_expr, Ns, proj_p, out_dir, command, threads, seed);
        }
        if (*mc)
            return run_multicell(cfg, mc_network, mc_cells,
                                 rdmol::detail::parse_double_list(mc_transport, 0), out_dir,
                                 command, threads, seed);
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const rdmol::IntegratorFailure& e) {
        std::cerr << "integration error: " << e.what() << '\n';
        return 3;
    } catch (const rdmol::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const rdmol::ParseError& e) {
        std::cerr << "network error: " << e.what() << '\n';
        return 2;
    } catch (const rdmol::ExprError& e) {
        std::cerr << "expression error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
