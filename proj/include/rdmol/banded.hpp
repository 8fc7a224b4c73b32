#pragma once

#include <lapacke.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace rdmol {

// General banded matrix in LAPACK band storage (column-major, kl extra rows
// reserved for LU fill-in). at(i, j) may only address entries inside the
// band.
class BandedMatrix {
public:
    BandedMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1),
          ab_(static_cast<std::size_t>(ldab_) * n, 0.0), ipiv_(n) {}

    int size() const { return n_; }

    void zero() {
        std::fill(ab_.begin(), ab_.end(), 0.0);
        factored_ = false;
    }

    double& at(int i, int j) { return ab_[static_cast<std::size_t>(j) * ldab_ + kl_ + ku_ + i - j]; }

    void factor() {
        const int info =
            LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n_, n_, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
        if (info != 0) throw std::runtime_error("dgbtrf: singular or invalid banded matrix");
        factored_ = true;
    }

    void solve(std::vector<double>& rhs) {
        if (!factored_) throw std::logic_error("BandedMatrix: solve before factor");
        if (static_cast<int>(rhs.size()) != n_)
            throw std::invalid_argument("BandedMatrix: rhs size mismatch");
        const int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ldab_,
                                        ipiv_.data(), rhs.data(), n_);
        if (info != 0) throw std::runtime_error("dgbtrs failed");
    }

private:
    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<lapack_int> ipiv_;
    bool factored_ = false;
};

}  // namespace rdmol
