#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdmol/exact.hpp"
#include "rdmol/matrix.hpp"

namespace rdmol {

// Nonnegative integer combination of species, e.g. A + B or 2A. Keys are
// species indices, values strictly positive coefficients.
struct Complex {
    std::map<int, int> coeff;
    friend bool operator==(const Complex& a, const Complex& b) { return a.coeff == b.coeff; }
    friend bool operator<(const Complex& a, const Complex& b) { return a.coeff < b.coeff; }
};

struct Reaction {
    Complex source;
    Complex target;
    double rate = 0.0;  // mass-action rate constant
};

inline bool is_valid_species_name(const std::string& s) {
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s) {
        const unsigned char u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '_' || c == '.' || c == '-')) return false;
    }
    return true;
}

class ReactionNetwork {
public:
    ReactionNetwork(std::vector<std::string> species, std::vector<Reaction> reactions)
        : species_(std::move(species)), reactions_(std::move(reactions)) {
        validate();
        const int n = species_count();
        const int r = reaction_count();
        gamma_.assign(static_cast<std::size_t>(n) * r, 0);
        for (int j = 0; j < r; ++j) {
            for (const auto& [i, c] : reactions_[j].target.coeff) gamma_at(i, j) += c;
            for (const auto& [i, c] : reactions_[j].source.coeff) gamma_at(i, j) -= c;
        }
    }

    int species_count() const { return static_cast<int>(species_.size()); }
    int reaction_count() const { return static_cast<int>(reactions_.size()); }
    const std::vector<std::string>& species() const { return species_; }
    const std::string& species_name(int i) const { return species_.at(i); }
    const std::vector<Reaction>& reactions() const { return reactions_; }

    int species_index(const std::string& name) const {
        const auto it = std::find(species_.begin(), species_.end(), name);
        if (it == species_.end())
            throw std::invalid_argument("ReactionNetwork: unknown species '" + name + "'");
        return static_cast<int>(it - species_.begin());
    }

    // Stoichiometric matrix entry, column j = target_j - source_j.
    long long gamma(int i, int j) const { return gamma_[static_cast<std::size_t>(i) * reaction_count() + j]; }

    Matrix gamma_matrix() const {
        Matrix G(species_count(), reaction_count());
        for (int i = 0; i < species_count(); ++i)
            for (int j = 0; j < reaction_count(); ++j) G(i, j) = static_cast<double>(gamma(i, j));
        return G;
    }

    std::vector<double> mass_action_rates(const std::vector<double>& x) const {
        check_state(x);
        std::vector<double> v(reaction_count());
        for (int j = 0; j < reaction_count(); ++j) {
            double p = reactions_[j].rate;
            for (const auto& [i, c] : reactions_[j].source.coeff)
                for (int q = 0; q < c; ++q) p *= x[i];
            v[j] = p;
        }
        return v;
    }

    std::vector<double> rhs(const std::vector<double>& x) const {
        const std::vector<double> v = mass_action_rates(x);
        std::vector<double> dx(species_count(), 0.0);
        for (int j = 0; j < reaction_count(); ++j) {
            if (v[j] == 0.0) continue;
            for (const auto& [i, c] : reactions_[j].target.coeff) dx[i] += c * v[j];
            for (const auto& [i, c] : reactions_[j].source.coeff) dx[i] -= c * v[j];
        }
        return dx;
    }

    // Basis of the left nullspace of Gamma (conservation laws nu with
    // nu^T Gamma = 0), in canonical reduced integer form.
    std::vector<std::vector<long long>> conservation_laws() const {
        std::vector<std::vector<long long>> Gt(reaction_count(),
                                               std::vector<long long>(species_count()));
        for (int j = 0; j < reaction_count(); ++j)
            for (int i = 0; i < species_count(); ++i) Gt[j][i] = gamma(i, j);
        return integer_nullspace(Gt, species_count());
    }

    // Deduplicated complexes in order of first appearance (source before
    // target, reactions in declaration order).
    std::vector<Complex> complexes() const {
        std::vector<Complex> out;
        auto push = [&out](const Complex& c) {
            if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
        };
        for (const Reaction& rx : reactions_) {
            push(rx.source);
            push(rx.target);
        }
        return out;
    }

    // Horn-Jackson complex balance: at x*, the total mass-action flux into
    // each complex equals the total flux out of it. Implies Gamma v(x*) = 0.
    bool is_complex_balanced(const std::vector<double>& x, double tol = 1e-10) const {
        if (!(tol >= 0.0)) throw std::invalid_argument("is_complex_balanced: bad tolerance");
        const std::vector<double> v = mass_action_rates(x);
        std::map<Complex, double> net;
        for (int j = 0; j < reaction_count(); ++j) {
            net[reactions_[j].target] += v[j];
            net[reactions_[j].source] -= v[j];
        }
        for (const auto& [c, flux] : net)
            if (std::abs(flux) > tol) return false;
        return true;
    }

private:
    void validate() const {
        if (species_.empty()) throw std::invalid_argument("ReactionNetwork: no species");
        for (const std::string& s : species_) {
            if (!is_valid_species_name(s))
                throw std::invalid_argument("ReactionNetwork: invalid species name '" + s + "'");
            if (std::count(species_.begin(), species_.end(), s) != 1)
                throw std::invalid_argument("ReactionNetwork: duplicate species '" + s + "'");
        }
        for (const Reaction& rx : reactions_) {
            if (!(rx.rate >= 0.0) || !std::isfinite(rx.rate))
                throw std::invalid_argument("ReactionNetwork: rate constants must be finite and nonnegative");
            for (const Complex* c : {&rx.source, &rx.target}) {
                for (const auto& [i, k] : c->coeff) {
                    if (i < 0 || i >= species_count())
                        throw std::invalid_argument("ReactionNetwork: reaction references unknown species");
                    if (k <= 0)
                        throw std::invalid_argument("ReactionNetwork: complex coefficients must be positive");
                }
            }
        }
    }

    void check_state(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != species_count())
            throw std::invalid_argument("ReactionNetwork: state size mismatch");
        for (double xi : x)
            if (!(xi >= 0.0)) throw std::domain_error("ReactionNetwork: negative concentration");
    }

    long long& gamma_at(int i, int j) { return gamma_[static_cast<std::size_t>(i) * reactions_.size() + j]; }

    std::vector<std::string> species_;
    std::vector<Reaction> reactions_;
    std::vector<long long> gamma_;
};

// d(Gamma v)/dx at x, mass-action kinetics.
inline Matrix rhs_jacobian(const ReactionNetwork& net, const std::vector<double>& x) {
    const int n = net.species_count();
    Matrix J(n, n);
    for (int j = 0; j < net.reaction_count(); ++j) {
        const Reaction& rx = net.reactions()[j];
        for (const auto& [m, cm] : rx.source.coeff) {
            double dv = rx.rate * cm * std::pow(x[m], cm - 1);
            for (const auto& [l, cl] : rx.source.coeff)
                if (l != m) dv *= std::pow(x[l], cl);
            if (dv == 0.0) continue;
            for (int i = 0; i < n; ++i) {
                const double g = static_cast<double>(net.gamma(i, j));
                if (g != 0.0) J(i, m) += g * dv;
            }
        }
    }
    return J;
}

// Finds the equilibrium on the stoichiometric compatibility class of x0:
// a short RK4 relaxation of x' = Gamma v(x) gets inside the basin, then
// Gauss-Newton on the stacked system {Gamma v(x) = 0, W x = W x0} (W the
// conservation laws) drives the residual to rhs_tol. Relaxation alone
// cannot finish the job: step doubling near a fixed point accepts steps
// past the RK4 stability edge and the iterate orbits the target.
inline std::vector<double> solve_equilibrium(const ReactionNetwork& net, std::vector<double> x,
                                             double rhs_tol = 1e-12, double t_cap = 1e6) {
    auto norm_inf = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };
    auto rk4 = [&net](const std::vector<double>& y, double dt) {
        const std::size_t n = y.size();
        auto eval = [&net](std::vector<double> s, const std::vector<double>& base,
                           const std::vector<double>& k, double f) {
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::max(0.0, base[i] + f * k[i]);
            return net.rhs(s);
        };
        const std::vector<double> k1 = net.rhs(y);
        const std::vector<double> k2 = eval(y, y, k1, dt / 2);
        const std::vector<double> k3 = eval(y, y, k2, dt / 2);
        const std::vector<double> k4 = eval(y, y, k3, dt);
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = std::max(0.0, y[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]));
        return out;
    };

    const std::vector<double> x0 = x;
    const double coarse_tol = std::max(rhs_tol, 1e-6);
    double t = 0.0, dt = 1e-3;
    while (t < t_cap && norm_inf(net.rhs(x)) > coarse_tol) {
        const std::vector<double> big = rk4(x, dt);
        std::vector<double> small = rk4(x, dt / 2);
        small = rk4(small, dt / 2);
        double err = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            err = std::max(err, std::abs(big[i] - small[i]) / (1e-9 + std::abs(small[i])));
        if (err < 1e-10) {
            x = small;
            t += dt;
            dt = std::min(dt * 2.0, t_cap / 16.0);
        } else {
            dt *= 0.5;
            if (dt < 1e-12) throw std::runtime_error("solve_equilibrium: step size underflow");
        }
    }
    if (norm_inf(net.rhs(x)) > coarse_tol)
        throw std::runtime_error("solve_equilibrium: no equilibrium within time cap");

    const int n = net.species_count();
    const auto laws = net.conservation_laws();
    std::vector<double> targets(laws.size());
    for (std::size_t w = 0; w < laws.size(); ++w)
        for (int i = 0; i < n; ++i) targets[w] += static_cast<double>(laws[w][i]) * x0[i];

    for (int it = 0; it < 60; ++it) {
        std::vector<double> res = net.rhs(x);
        if (norm_inf(res) <= rhs_tol) return x;
        const std::size_t rows = static_cast<std::size_t>(n) + laws.size();
        Matrix S(rows, static_cast<std::size_t>(n));
        std::vector<double> r(rows);
        const Matrix J = rhs_jacobian(net, x);
        for (int i = 0; i < n; ++i) {
            r[i] = res[i];
            for (int m = 0; m < n; ++m) S(i, m) = J(i, m);
        }
        for (std::size_t w = 0; w < laws.size(); ++w) {
            double val = -targets[w];
            for (int i = 0; i < n; ++i) {
                S(n + w, i) = static_cast<double>(laws[w][i]);
                val += static_cast<double>(laws[w][i]) * x[i];
            }
            r[n + w] = val;
        }
        const Matrix St = S.transposed();
        const Matrix G = St * S;
        const std::vector<double> g = St * r;
        const std::vector<double> step = solve_dense(G, g);

        const double before = norm_inf(res);
        double alpha = 1.0;
        while (alpha >= 1e-6) {
            std::vector<double> trial(x);
            bool feasible = true;
            for (int i = 0; i < n; ++i) {
                trial[i] -= alpha * step[i];
                feasible = feasible && trial[i] >= 0.0;
            }
            if (feasible && norm_inf(net.rhs(trial)) <= before) {
                x = std::move(trial);
                break;
            }
            alpha *= 0.5;
        }
        if (alpha < 1e-6) break;  // stalled; the residual check below decides
    }
    if (norm_inf(net.rhs(x)) <= rhs_tol) return x;
    throw std::runtime_error("solve_equilibrium: no equilibrium within time cap");
}

}  // namespace rdmol
