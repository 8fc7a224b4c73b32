#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "rdmol/reaction_network.hpp"

namespace rdmol {

// Replicates a base network across a chain of well-mixed cells and couples
// neighbouring cells with reversible transport. Species are ordered
// cell-major (all of cell 1, then cell 2, ...); reactions are grouped as
// cell-1 copies, transport 1<->2, cell-2 copies, transport 2<->3, and so
// on. Each transport edge contributes one forward and one backward
// reaction per species with equal rate constants, so the net flux matches
// kappa_i (x_i^k - x_i^{k+1}).
struct MulticellNetwork {
    int cells = 0;
    std::vector<double> transport;  // per base species
    ReactionNetwork base;
    ReactionNetwork expanded;
};

namespace detail {

inline Complex shift_complex(const Complex& c, int cell, int species_per_cell) {
    Complex out;
    for (const auto& [i, k] : c.coeff) out.coeff[cell * species_per_cell + i] = k;
    return out;
}

}  // namespace detail

inline MulticellNetwork expand(const ReactionNetwork& base, int cells,
                               const std::vector<double>& transport) {
    if (cells < 1) throw std::invalid_argument("expand: need at least one cell");
    const int n = base.species_count();
    if (static_cast<int>(transport.size()) != n)
        throw std::invalid_argument("expand: one transport rate per base species required");
    for (double k : transport)
        if (!(k >= 0.0)) throw std::invalid_argument("expand: transport rates must be nonnegative");

    std::vector<std::string> species;
    species.reserve(static_cast<std::size_t>(n) * cells);
    for (int c = 0; c < cells; ++c)
        for (int i = 0; i < n; ++i)
            species.push_back(base.species_name(i) + "_" + std::to_string(c + 1));

    std::vector<Reaction> reactions;
    reactions.reserve(static_cast<std::size_t>(base.reaction_count()) * cells +
                      2 * static_cast<std::size_t>(n) * (cells - 1));
    for (int c = 0; c < cells; ++c) {
        for (const Reaction& rx : base.reactions()) {
            Reaction copy;
            copy.source = detail::shift_complex(rx.source, c, n);
            copy.target = detail::shift_complex(rx.target, c, n);
            copy.rate = rx.rate;
            reactions.push_back(std::move(copy));
        }
        if (c + 1 == cells) continue;
        for (int i = 0; i < n; ++i) {
            const int here = c * n + i;
            const int there = (c + 1) * n + i;
            Reaction fwd, bwd;
            fwd.source.coeff[here] = 1;
            fwd.target.coeff[there] = 1;
            fwd.rate = transport[i];
            bwd.source.coeff[there] = 1;
            bwd.target.coeff[here] = 1;
            bwd.rate = transport[i];
            reactions.push_back(std::move(fwd));
            reactions.push_back(std::move(bwd));
        }
    }

    return MulticellNetwork{cells, transport, base,
                            ReactionNetwork(std::move(species), std::move(reactions))};
}

// 1 (x) y: every cell holds the same base state, cell-major layout.
inline std::vector<double> lift(const std::vector<double>& y, int cells) {
    if (cells < 1) throw std::invalid_argument("lift: need at least one cell");
    std::vector<double> out;
    out.reserve(y.size() * cells);
    for (int c = 0; c < cells; ++c) out.insert(out.end(), y.begin(), y.end());
    return out;
}

}  // namespace rdmol
