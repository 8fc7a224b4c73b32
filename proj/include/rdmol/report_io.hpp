#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rdmol/analysis.hpp"
#include "rdmol/expression.hpp"
#include "rdmol/grid.hpp"
#include "rdmol/time_integration.hpp"

namespace rdmol {

// shortest round-trippable decimal form
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    static const char* names[3] = {"a", "b", "c"};
    os << "t,species,cell,value\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        for (int s = 0; s < 3; ++s) {
            auto vals = traj.states[i].species(s);
            for (int k = 0; k < traj.grid.N; ++k)
                os << fmt17(traj.times[i]) << ',' << names[s] << ',' << (k + 1) << ','
                   << fmt17(vals[k]) << '\n';
        }
}

inline void write_monitors_csv(std::ostream& os, const std::vector<MonitorRecord>& mons) {
    os << "t,mass,min,max,mu_log\n";
    for (const MonitorRecord& r : mons)
        os << fmt17(r.t) << ',' << fmt17(r.mass) << ',' << fmt17(r.min) << ',' << fmt17(r.max)
           << ',' << fmt17(r.mu_log) << '\n';
}

inline void write_errors_csv(std::ostream& os, const std::vector<ErrorSeries>& series) {
    os << "N,t,eN,EN\n";
    for (const ErrorSeries& es : series)
        for (std::size_t i = 0; i < es.times.size(); ++i)
            os << es.N << ',' << fmt17(es.times[i]) << ',' << fmt17(es.eN[i]) << ','
               << fmt17(es.EN[i]) << '\n';
}

inline void write_consistency_csv(std::ostream& os, const std::vector<ConsistencyEntry>& entries) {
    os << "N,t,res_sup,res_l2\n";
    for (const ConsistencyEntry& e : entries)
        os << e.N << ',' << fmt17(e.t) << ',' << fmt17(e.sup_norm) << ',' << fmt17(e.l2_norm)
           << '\n';
}

inline void write_projection_csv(std::ostream& os, const ProjectionReport& rep) {
    os << "N,error\n";
    for (std::size_t i = 0; i < rep.Ns.size(); ++i)
        os << rep.Ns[i] << ',' << fmt17(rep.errors[i]) << '\n';
}

inline nlohmann::ordered_json study_to_json(const StudyConfig& s) {
    nlohmann::ordered_json j;
    j["Ns"] = s.Ns;
    j["N_ref"] = s.N_ref;
    j["times"] = s.times;
    j["consistency_times"] = s.consistency_times;
    j["fd_dt"] = s.fd_dt;
    j["delta_floor"] = s.delta_floor;
    j["delta_probe"] = s.delta_probe;
    j["reference_adequacy"] = s.reference_adequacy;
    j["fit_time"] = s.fit_time;
    j["c_hat_fit_N"] = s.c_hat_fit_N;
    return j;
}

inline nlohmann::ordered_json report_to_json(const ConvergenceReport& rep) {
    nlohmann::ordered_json j;
    j["study"] = study_to_json(rep.study);
    j["errors"] = nlohmann::ordered_json::array();
    for (const ErrorSeries& es : rep.errors) {
        nlohmann::ordered_json e;
        e["N"] = es.N;
        e["t"] = es.times;
        e["eN"] = es.eN;
        e["EN"] = es.EN;
        j["errors"].push_back(e);
    }
    j["fitted_order"] = rep.fitted_order;
    j["consistency"] = nlohmann::ordered_json::array();
    for (const ConsistencyEntry& e : rep.consistency)
        j["consistency"].push_back({{"N", e.N}, {"t", e.t}, {"res_sup", e.sup_norm}, {"res_l2", e.l2_norm}});
    j["c_hat"] = rep.c_hat;
    j["conservation_drift"] = rep.conservation_drift;
    j["trajectory_min"] = rep.trajectory_min;
    j["trajectory_max"] = rep.trajectory_max;
    j["max_spread"] = rep.max_spread;
    j["delta_probe_times"] = rep.study.delta_probe;
    j["delta_probe_eN"] = rep.delta_probe_errors;
    if (rep.study.reference_adequacy) {
        j["adequacy_ratio"] = rep.adequacy_ratio;
        j["adequacy_ok"] = rep.adequacy_ok;
    }
    j["flags"] = {{"convergence", rep.convergence_ok},
                  {"consistency", rep.consistency_ok},
                  {"conservation", rep.conservation_ok},
                  {"boundedness", rep.boundedness_ok}};
    j["notes"] = rep.notes;
    return j;
}

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal standalone log-log SVG: framed plot area, one polyline with
// point markers per series, legend in the top-right corner.
inline void write_svg_loglog(std::ostream& os, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<PlotSeries>& series) {
    static const char* palette[6] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const double W = 640, H = 480, L = 70, R = 610, T = 50, B = 420;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const PlotSeries& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0))
                throw std::invalid_argument("write_svg_loglog: values must be positive");
            const double lx = std::log10(s.x[i]), ly = std::log10(s.y[i]);
            if (first) {
                xmin = xmax = lx;
                ymin = ymax = ly;
                first = false;
            }
            xmin = std::min(xmin, lx);
            xmax = std::max(xmax, lx);
            ymin = std::min(ymin, ly);
            ymax = std::max(ymax, ly);
        }
    if (first) throw std::invalid_argument("write_svg_loglog: nothing to plot");
    if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
    auto X = [&](double v) { return L + (std::log10(v) - xmin) / (xmax - xmin) * (R - L); };
    auto Y = [&](double v) { return B - (std::log10(v) - ymin) / (ymax - ymin) * (B - T); };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (R - L) << "\" height=\""
       << (B - T) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (W / 2) << "\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">" << title
       << "</text>\n";
    os << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 15) << "\" text-anchor=\"middle\">" << x_label
       << "</text>\n";
    os << "<text x=\"20\" y=\"" << ((T + B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << ((T + B) / 2) << ")\">" << y_label << "</text>\n";
    // decade ticks
    for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d) {
        const double px = L + (d - xmin) / (xmax - xmin) * (R - L);
        os << "<line x1=\"" << px << "\" y1=\"" << B << "\" x2=\"" << px << "\" y2=\"" << (B + 5)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px << "\" y=\"" << (B + 20) << "\" text-anchor=\"middle\">1e" << d
           << "</text>\n";
    }
    for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d) {
        const double py = B - (d - ymin) / (ymax - ymin) * (B - T);
        os << "<line x1=\"" << (L - 5) << "\" y1=\"" << py << "\" x2=\"" << L << "\" y2=\"" << py
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << (L - 10) << "\" y=\"" << (py + 4) << "\" text-anchor=\"end\">1e" << d
           << "</text>\n";
    }
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = palette[si % 6];
        const PlotSeries& s = series[si];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
        os << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i])
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        os << "<text x=\"" << (R - 8) << "\" y=\"" << (T + 18 + 16 * si) << "\" text-anchor=\"end\" fill=\""
           << color << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
}

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& what, int line_no)
        : std::runtime_error("config line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

struct ExperimentConfig {
    ProblemSpec problem = default_problem();
    StudyConfig study;
    IntegratorConfig integrator;
    // expression text retained for the manifest echo
    std::string a0_text = "2 + cos(pi*x)";
    std::string b0_text = "1 + 0.5*cos(2*pi*x)";
    std::string c0_text = "0.5*(1 - x*(1 - x))";
};

namespace detail {

inline std::vector<double> parse_double_list(const std::string& v, int line_no) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double d = std::stod(item, &used);
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
            if (used != item.size()) throw std::invalid_argument("");
            out.push_back(d);
        } catch (const std::exception&) {
            throw ConfigError("malformed number '" + item + "'", line_no);
        }
    }
    if (out.empty()) throw ConfigError("empty list", line_no);
    return out;
}

inline std::vector<int> parse_int_list(const std::string& v, int line_no) {
    std::vector<int> out;
    for (double d : parse_double_list(v, line_no)) {
        const int i = static_cast<int>(d);
        if (static_cast<double>(i) != d) throw ConfigError("expected an integer", line_no);
        out.push_back(i);
    }
    return out;
}

inline double parse_double_value(const std::string& v, int line_no) {
    const std::vector<double> one = parse_double_list(v, line_no);
    if (one.size() != 1) throw ConfigError("expected a single number", line_no);
    return one[0];
}

inline int parse_int_value(const std::string& v, int line_no) {
    const double d = parse_double_value(v, line_no);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw ConfigError("expected an integer", line_no);
    return i;
}

inline bool parse_bool_value(const std::string& v, int line_no) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("expected true or false", line_no);
}

}  // namespace detail

// Sectioned key = value format with [problem], [study], [integrator]
// sections, '#' comments and comma-separated lists. Unknown sections or
// keys are rejected.
inline ExperimentConfig parse_experiment_config(std::istream& is) {
    ExperimentConfig cfg;
    std::string line, section;
    int line_no = 0;
    bool a0_set = false, b0_set = false, c0_set = false;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (section != "problem" && section != "study" && section != "integrator")
                throw ConfigError("unknown section '" + section + "'", line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key outside any section", line_no);
        if (key.empty() || val.empty()) throw ConfigError("empty key or value", line_no);

        auto expr = [&](const std::string& text) {
            try {
                return parse_expression(text);
            } catch (const ExprError& e) {
                throw ConfigError(std::string("bad expression: ") + e.what(), line_no);
            }
        };

        if (section == "problem") {
            if (key == "k1") cfg.problem.k1 = detail::parse_double_value(val, line_no);
            else if (key == "k_minus1") cfg.problem.k_minus1 = detail::parse_double_value(val, line_no);
            else if (key == "kA") cfg.problem.kA = detail::parse_double_value(val, line_no);
            else if (key == "kB") cfg.problem.kB = detail::parse_double_value(val, line_no);
            else if (key == "kC") cfg.problem.kC = detail::parse_double_value(val, line_no);
            else if (key == "T") cfg.problem.T = detail::parse_double_value(val, line_no);
            else if (key == "a0") { cfg.problem.a0 = expr(val); cfg.a0_text = val; a0_set = true; }
            else if (key == "b0") { cfg.problem.b0 = expr(val); cfg.b0_text = val; b0_set = true; }
            else if (key == "c0") { cfg.problem.c0 = expr(val); cfg.c0_text = val; c0_set = true; }
            else throw ConfigError("unknown problem key '" + key + "'", line_no);
        } else if (section == "study") {
            if (key == "Ns") cfg.study.Ns = detail::parse_int_list(val, line_no);
            else if (key == "N_ref") cfg.study.N_ref = detail::parse_int_value(val, line_no);
            else if (key == "times") cfg.study.times = detail::parse_double_list(val, line_no);
            else if (key == "consistency_times") cfg.study.consistency_times = detail::parse_double_list(val, line_no);
            else if (key == "fd_dt") cfg.study.fd_dt = detail::parse_double_value(val, line_no);
            else if (key == "delta_floor") cfg.study.delta_floor = detail::parse_double_value(val, line_no);
            else if (key == "delta_probe") cfg.study.delta_probe = detail::parse_double_list(val, line_no);
            else if (key == "reference_adequacy") cfg.study.reference_adequacy = detail::parse_bool_value(val, line_no);
            else if (key == "fit_time") cfg.study.fit_time = detail::parse_double_value(val, line_no);
            else if (key == "c_hat_fit_N") cfg.study.c_hat_fit_N = detail::parse_int_value(val, line_no);
            else throw ConfigError("unknown study key '" + key + "'", line_no);
        } else {
            if (key == "method") {
                if (val == "trapezoid") cfg.integrator.method = Method::ImplicitTrapezoid;
                else if (val == "backward_euler") cfg.integrator.method = Method::BackwardEuler;
                else throw ConfigError("unknown method '" + val + "'", line_no);
            } else if (key == "rel_tol") cfg.integrator.rel_tol = detail::parse_double_value(val, line_no);
            else if (key == "abs_tol") cfg.integrator.abs_tol = detail::parse_double_value(val, line_no);
            else if (key == "dt_init") cfg.integrator.dt_init = detail::parse_double_value(val, line_no);
            else if (key == "dt_min") cfg.integrator.dt_min = detail::parse_double_value(val, line_no);
            else if (key == "dt_max") cfg.integrator.dt_max = detail::parse_double_value(val, line_no);
            else if (key == "newton_tol") cfg.integrator.newton_tol = detail::parse_double_value(val, line_no);
            else if (key == "newton_max_iter") cfg.integrator.newton_max_iter = detail::parse_int_value(val, line_no);
            else if (key == "max_steps") cfg.integrator.max_steps = detail::parse_int_value(val, line_no);
            else throw ConfigError("unknown integrator key '" + key + "'", line_no);
        }
    }
    (void)a0_set;
    (void)b0_set;
    (void)c0_set;
    return cfg;
}

inline ExperimentConfig parse_experiment_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    return parse_experiment_config(f);
}

inline nlohmann::ordered_json problem_to_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["k1"] = cfg.problem.k1;
    j["k_minus1"] = cfg.problem.k_minus1;
    j["kA"] = cfg.problem.kA;
    j["kB"] = cfg.problem.kB;
    j["kC"] = cfg.problem.kC;
    j["T"] = cfg.problem.T;
    j["a0"] = cfg.a0_text;
    j["b0"] = cfg.b0_text;
    j["c0"] = cfg.c0_text;
    return j;
}

inline nlohmann::ordered_json integrator_to_json(const IntegratorConfig& c) {
    nlohmann::ordered_json j;
    j["method"] = (c.method == Method::ImplicitTrapezoid) ? "trapezoid" : "backward_euler";
    j["rel_tol"] = c.rel_tol;
    j["abs_tol"] = c.abs_tol;
    j["dt_init"] = c.dt_init;
    j["dt_min"] = c.dt_min;
    j["dt_max"] = c.dt_max;
    j["newton_tol"] = c.newton_tol;
    j["newton_max_iter"] = c.newton_max_iter;
    j["max_steps"] = c.max_steps;
    return j;
}

inline nlohmann::ordered_json make_manifest(const std::string& command,
                                            const ExperimentConfig& cfg, int threads,
                                            unsigned long long seed,
                                            const std::vector<std::string>& outputs) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["threads"] = threads;
    j["seed"] = seed;
    j["problem"] = problem_to_json(cfg);
    j["study"] = study_to_json(cfg.study);
    j["integrator"] = integrator_to_json(cfg.integrator);
    j["outputs"] = outputs;
    return j;
}

}  // namespace rdmol
