#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdmol/reaction_network.hpp"

namespace rdmol {

// Network definition files: '#' comments, a [species] section with one name
// per line, then one [reaction] section per reaction carrying source,
// target and rate keys. Complexes are written as "A + B", "2 A", or "0" for
// the empty complex.
struct ParseError : std::runtime_error {
    int line;
    ParseError(int ln, const std::string& msg)
        : std::runtime_error("line " + std::to_string(ln) + ": " + msg), line(ln) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t.empty()) throw ParseError(line, "empty number");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ParseError(line, "malformed number '" + t + "'");
    return v;
}

}  // namespace detail

inline Complex parse_complex(const std::string& text, const ReactionNetwork* resolver,
                             const std::vector<std::string>& names, int line) {
    const std::string body = detail::trim(text);
    if (body.empty()) throw ParseError(line, "empty complex");
    Complex c;
    if (body == "0") return c;
    for (std::string term : detail::split(body, '+')) {
        term = detail::trim(term);
        if (term.empty()) throw ParseError(line, "empty term in complex '" + body + "'");
        int coeff = 1;
        std::size_t p = 0;
        while (p < term.size() && std::isdigit(static_cast<unsigned char>(term[p]))) ++p;
        if (p > 0) {
            coeff = std::stoi(term.substr(0, p));
            if (coeff <= 0) throw ParseError(line, "nonpositive coefficient in '" + term + "'");
        }
        std::string name = detail::trim(term.substr(p));
        if (!is_valid_species_name(name))
            throw ParseError(line, "invalid species reference '" + term + "'");
        int idx = -1;
        if (resolver != nullptr) {
            idx = resolver->species_index(name);
        } else {
            for (std::size_t i = 0; i < names.size(); ++i)
                if (names[i] == name) idx = static_cast<int>(i);
            if (idx < 0) throw ParseError(line, "undeclared species '" + name + "'");
        }
        c.coeff[idx] += coeff;
    }
    return c;
}

inline ReactionNetwork parse_network(std::istream& in) {
    std::vector<std::string> species;
    std::vector<Reaction> reactions;

    enum class Section { None, Species, Reaction };
    Section section = Section::None;
    std::string src, tgt, rate;
    int src_line = 0, tgt_line = 0, rate_line = 0, reaction_line = 0;
    bool pending = false;

    auto flush_reaction = [&]() {
        if (!pending) return;
        if (src.empty()) throw ParseError(reaction_line, "[reaction] missing 'source'");
        if (tgt.empty()) throw ParseError(reaction_line, "[reaction] missing 'target'");
        if (rate.empty()) throw ParseError(reaction_line, "[reaction] missing 'rate'");
        Reaction rx;
        rx.source = parse_complex(src, nullptr, species, src_line);
        rx.target = parse_complex(tgt, nullptr, species, tgt_line);
        rx.rate = detail::parse_number(rate, rate_line);
        reactions.push_back(std::move(rx));
        src.clear();
        tgt.clear();
        rate.clear();
        pending = false;
    };

    std::string raw;
    int ln = 0;
    while (std::getline(in, raw)) {
        ++ln;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = detail::trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(ln, "unterminated section header");
            const std::string name = detail::trim(line.substr(1, line.size() - 2));
            flush_reaction();
            if (name == "species") {
                section = Section::Species;
            } else if (name == "reaction") {
                section = Section::Reaction;
                pending = true;
                reaction_line = ln;
            } else {
                throw ParseError(ln, "unknown section [" + name + "]");
            }
            continue;
        }

        switch (section) {
            case Section::None:
                throw ParseError(ln, "content before first section");
            case Section::Species: {
                if (line.find('=') != std::string::npos)
                    throw ParseError(ln, "unexpected '=' in [species]");
                if (!is_valid_species_name(line))
                    throw ParseError(ln, "invalid species name '" + line + "'");
                species.push_back(line);
                break;
            }
            case Section::Reaction: {
                const auto eq = line.find('=');
                if (eq == std::string::npos) throw ParseError(ln, "expected 'key = value'");
                const std::string key = detail::trim(line.substr(0, eq));
                const std::string val = detail::trim(line.substr(eq + 1));
                if (key == "source") {
                    if (!src.empty()) throw ParseError(ln, "duplicate 'source'");
                    src = val;
                    src_line = ln;
                } else if (key == "target") {
                    if (!tgt.empty()) throw ParseError(ln, "duplicate 'target'");
                    tgt = val;
                    tgt_line = ln;
                } else if (key == "rate") {
                    if (!rate.empty()) throw ParseError(ln, "duplicate 'rate'");
                    rate = val;
                    rate_line = ln;
                } else {
                    throw ParseError(ln, "unknown key '" + key + "' in [reaction]");
                }
                break;
            }
        }
    }
    flush_reaction();
    if (species.empty()) throw ParseError(ln, "no [species] section");
    try {
        return ReactionNetwork(std::move(species), std::move(reactions));
    } catch (const std::invalid_argument& e) {
        throw ParseError(ln, e.what());
    }
}

inline ReactionNetwork parse_network_string(const std::string& text) {
    std::istringstream in(text);
    return parse_network(in);
}

inline ReactionNetwork parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file '" + path + "'");
    return parse_network(in);
}

inline std::string format_complex(const ReactionNetwork& net, const Complex& c) {
    if (c.coeff.empty()) return "0";
    std::string out;
    for (const auto& [i, k] : c.coeff) {
        if (!out.empty()) out += " + ";
        if (k != 1) out += std::to_string(k) + " ";
        out += net.species_name(i);
    }
    return out;
}

inline std::string format_network(const ReactionNetwork& net) {
    std::string out = "[species]\n";
    for (const std::string& s : net.species()) out += s + "\n";
    char buf[64];
    for (const Reaction& rx : net.reactions()) {
        out += "\n[reaction]\n";
        out += "source = " + format_complex(net, rx.source) + "\n";
        out += "target = " + format_complex(net, rx.target) + "\n";
        std::snprintf(buf, sizeof buf, "%.17g", rx.rate);
        out += "rate = " + std::string(buf) + "\n";
    }
    return out;
}

}  // namespace rdmol
