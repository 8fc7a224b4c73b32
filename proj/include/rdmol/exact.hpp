#pragma once

#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rdmol {

// Exact rational arithmetic over 64-bit integers, sized for desk-scale
// stoichiometric matrices. Overflow throws instead of wrapping.
struct Rational {
    long long num = 0;
    long long den = 1;  // invariant: den > 0 and gcd(|num|, den) == 1

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::domain_error("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        const long long g = std::gcd(std::abs(num), den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    bool is_zero() const { return num == 0; }

    static long long mul(long long a, long long b) {
        long long r = 0;
        if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Rational: overflow");
        return r;
    }
    static long long add(long long a, long long b) {
        long long r = 0;
        if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Rational: overflow");
        return r;
    }

    friend Rational operator*(const Rational& a, const Rational& b) {
        // cross-reduce first to keep intermediates small
        const long long g1 = std::gcd(std::abs(a.num), b.den);
        const long long g2 = std::gcd(std::abs(b.num), a.den);
        Rational r;
        r.num = mul(a.num / g1, b.num / g2);
        r.den = mul(a.den / g2, b.den / g1);
        r.normalize();
        return r;
    }
    friend Rational operator+(const Rational& a, const Rational& b) {
        const long long g = std::gcd(a.den, b.den);
        Rational r;
        r.num = add(mul(a.num, b.den / g), mul(b.num, a.den / g));
        r.den = mul(a.den / g, b.den);
        r.normalize();
        return r;
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        Rational nb = b;
        nb.num = -nb.num;
        return a + nb;
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.is_zero()) throw std::domain_error("Rational: division by zero");
        return a * Rational(b.den, b.num);
    }
    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
};

// Basis of { v : M v = 0 } for an integer matrix (rows x cols), via exact
// Gauss-Jordan elimination over the rationals. Each basis vector is scaled
// to coprime integer entries with a positive leading entry; the set is the
// canonical reduced basis induced by the RREF free columns.
inline std::vector<std::vector<long long>> integer_nullspace(
    const std::vector<std::vector<long long>>& M, std::size_t cols) {
    const std::size_t rows = M.size();
    std::vector<std::vector<Rational>> R(rows, std::vector<Rational>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (M[i].size() != cols) throw std::invalid_argument("integer_nullspace: ragged matrix");
        for (std::size_t j = 0; j < cols; ++j) R[i][j] = Rational(M[i][j]);
    }

    std::vector<std::size_t> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && R[p][c].is_zero()) ++p;
        if (p == rows) continue;
        std::swap(R[p], R[r]);
        const Rational piv = R[r][c];
        for (std::size_t j = c; j < cols; ++j) R[r][j] = R[r][j] / piv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || R[i][c].is_zero()) continue;
            const Rational f = R[i][c];
            for (std::size_t j = c; j < cols; ++j) R[i][j] = R[i][j] - f * R[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }

    std::vector<bool> is_pivot(cols, false);
    for (std::size_t c : pivot_col) is_pivot[c] = true;

    std::vector<std::vector<long long>> basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rational> v(cols, Rational(0));
        v[f] = Rational(1);
        for (std::size_t k = 0; k < pivot_col.size(); ++k)
            v[pivot_col[k]] = Rational(0) - R[k][f];

        long long lcm = 1;
        for (const Rational& q : v) lcm = Rational::mul(lcm / std::gcd(lcm, q.den), q.den);
        std::vector<long long> w(cols);
        long long g = 0;
        for (std::size_t j = 0; j < cols; ++j) {
            w[j] = Rational::mul(v[j].num, lcm / v[j].den);
            g = std::gcd(g, std::abs(w[j]));
        }
        if (g > 1)
            for (long long& x : w) x /= g;
        for (long long x : w) {
            if (x == 0) continue;
            if (x < 0)
                for (long long& y : w) y = -y;
            break;
        }
        basis.push_back(std::move(w));
    }
    return basis;
}

}  // namespace rdmol
