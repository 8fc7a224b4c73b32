#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace rdmol {

// Uniform partition of the unit interval into N half-open cells
// [(k-1)/N, k/N).
struct Grid {
    int N = 0;

    explicit Grid(int n) : N(n) {
        if (n < 2) throw std::invalid_argument("Grid: need at least two cells");
    }

    double h() const { return 1.0 / N; }
    double midpoint(int k) const { return (k + 0.5) / N; }      // k is 0-based
    double left_edge(int k) const { return static_cast<double>(k) / N; }
    int cell_of(double x) const {
        if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("Grid: point outside [0,1]");
        const int k = static_cast<int>(std::floor(x * N));
        return k == N ? N - 1 : k;
    }
    friend bool operator==(const Grid& a, const Grid& b) { return a.N == b.N; }
};

// Reaction-diffusion problem A + B <=> C on the unit interval with no-flux
// walls: forward/backward rate constants, one diffusivity per species,
// initial profiles, and the horizon T.
struct ProblemSpec {
    double k1 = 1.0;
    double k_minus1 = 2.0;
    double kA = 0.1;
    double kB = 0.15;
    double kC = 0.2;
    std::function<double(double)> a0, b0, c0;
    double T = 1.0;

    void validate() const {
        if (!(k1 >= 0.0) || !(k_minus1 >= 0.0))
            throw std::invalid_argument("ProblemSpec: reaction rates must be nonnegative");
        if (!(kA > 0.0) || !(kB > 0.0) || !(kC > 0.0))
            throw std::invalid_argument("ProblemSpec: diffusivities must be positive");
        if (!(T > 0.0)) throw std::invalid_argument("ProblemSpec: horizon must be positive");
        if (!a0 || !b0 || !c0) throw std::invalid_argument("ProblemSpec: initial data not set");
    }

    double diffusion(int species) const {
        switch (species) {
            case 0: return kA;
            case 1: return kB;
            case 2: return kC;
        }
        throw std::invalid_argument("ProblemSpec: species index out of range");
    }
};

inline ProblemSpec default_problem() {
    ProblemSpec p;
    p.a0 = [](double x) { return 2.0 + std::cos(M_PI * x); };
    p.b0 = [](double x) { return 1.0 + 0.5 * std::cos(2.0 * M_PI * x); };
    p.c0 = [](double x) { return 0.5 * (1.0 - x * (1.0 - x)); };
    return p;
}

// Concentrations of the three species on a grid, species-major:
// [a_1..a_N, b_1..b_N, c_1..c_N].
struct StateVector {
    Grid grid;
    std::vector<double> data;

    explicit StateVector(Grid g) : grid(g), data(3 * static_cast<std::size_t>(g.N), 0.0) {}
    StateVector(Grid g, std::vector<double> values) : grid(g), data(std::move(values)) {
        if (data.size() != 3 * static_cast<std::size_t>(g.N))
            throw std::invalid_argument("StateVector: expected 3N entries");
    }

    int N() const { return grid.N; }
    std::span<double> species(int s) { return {data.data() + s * grid.N, static_cast<std::size_t>(grid.N)}; }
    std::span<const double> species(int s) const {
        return {data.data() + s * grid.N, static_cast<std::size_t>(grid.N)};
    }
    std::span<double> a() { return species(0); }
    std::span<double> b() { return species(1); }
    std::span<double> c() { return species(2); }
    std::span<const double> a() const { return species(0); }
    std::span<const double> b() const { return species(1); }
    std::span<const double> c() const { return species(2); }

    double min() const {
        double m = data[0];
        for (double v : data) m = std::min(m, v);
        return m;
    }
    double max() const {
        double m = data[0];
        for (double v : data) m = std::max(m, v);
        return m;
    }
    // total of the conserved combination a + b + 2c, weighted by cell width
    double mass() const {
        double sa = 0.0, sb = 0.0, sc = 0.0;
        for (int k = 0; k < grid.N; ++k) {
            sa += a()[k];
            sb += b()[k];
            sc += c()[k];
        }
        return grid.h() * (sa + sb + 2.0 * sc);
    }
};

}  // namespace rdmol
