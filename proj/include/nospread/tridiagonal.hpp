#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nospread/errors.hpp"

namespace nospread {

/// Thomas factorization of a fixed tridiagonal matrix, reused for many right-hand sides.
/// Row k reads lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1]; lower[0] and upper[n-1] are ignored.
class TridiagonalFactor {
public:
    using value_type = std::complex<double>;

    TridiagonalFactor() = default;

    TridiagonalFactor(std::vector<value_type> lower, std::vector<value_type> diag, std::vector<value_type> upper)
        : lower_(std::move(lower)), upper_mod_(diag.size()), inv_pivot_(diag.size()) {
        const std::size_t n = diag.size();
        if (n == 0 || lower_.size() != n || upper.size() != n) {
            throw ArgumentError("TridiagonalFactor: bands must be non-empty and equally long");
        }
        value_type pivot = diag[0];
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) {
                pivot = diag[k] - lower_[k] * upper_mod_[k - 1];
            }
            if (std::abs(pivot) == 0.0) {
                throw NumericalError("TridiagonalFactor: zero pivot");
            }
            inv_pivot_[k] = 1.0 / pivot;
            upper_mod_[k] = k + 1 < n ? upper[k] * inv_pivot_[k] : value_type{};
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return inv_pivot_.size(); }

    /// Solves in place for one contiguous right-hand side.
    void solve(std::span<value_type> x) const {
        const std::size_t n = size();
        x[0] *= inv_pivot_[0];
        for (std::size_t k = 1; k < n; ++k) {
            x[k] = (x[k] - lower_[k] * x[k - 1]) * inv_pivot_[k];
        }
        for (std::size_t k = n - 1; k-- > 0;) {
            x[k] -= upper_mod_[k] * x[k + 1];
        }
    }

    /// Solves `width` systems at once; unknown k of system s lives at data[k * width + s].
    void solve_interleaved(std::span<value_type> data, std::size_t width) const {
        const std::size_t n = size();
        for (std::size_t s = 0; s < width; ++s) {
            data[s] *= inv_pivot_[0];
        }
        for (std::size_t k = 1; k < n; ++k) {
            value_type* row = &data[k * width];
            const value_type* prev = &data[(k - 1) * width];
            for (std::size_t s = 0; s < width; ++s) {
                row[s] = (row[s] - lower_[k] * prev[s]) * inv_pivot_[k];
            }
        }
        for (std::size_t k = n - 1; k-- > 0;) {
            value_type* row = &data[k * width];
            const value_type* next = &data[(k + 1) * width];
            for (std::size_t s = 0; s < width; ++s) {
                row[s] -= upper_mod_[k] * next[s];
            }
        }
    }

private:
    std::vector<value_type> lower_;
    std::vector<value_type> upper_mod_;
    std::vector<value_type> inv_pivot_;
};

/// Periodic system with constant bands: lower x[k-1] + diag x[k] + upper x[k+1] = rhs[k],
/// indices taken mod n. Solved through Sherman-Morrison on top of the open factorization.
class CyclicTridiagonal {
public:
    using value_type = std::complex<double>;

    CyclicTridiagonal(std::size_t n, value_type lower, value_type diag, value_type upper)
        : n_(n), lower_(lower), upper_(upper) {
        if (n < 3) {
            throw ArgumentError("CyclicTridiagonal: need at least 3 unknowns");
        }
        // A = T + u v^T with u = (gamma, 0, ..., 0, upper), v = (1, 0, ..., 0, lower / gamma).
        gamma_ = -diag;
        std::vector<value_type> d(n, diag);
        d.front() = diag - gamma_;
        d.back() = diag - lower_ * upper_ / gamma_;
        factor_ = TridiagonalFactor(std::vector<value_type>(n, lower_), std::move(d),
                                    std::vector<value_type>(n, upper_));
        correction_.assign(n, value_type{});
        correction_.front() = gamma_;
        correction_.back() = upper_;
        factor_.solve(correction_);
        denom_ = 1.0 + correction_.front() + lower_ / gamma_ * correction_.back();
    }

    void solve(std::span<value_type> x) const {
        factor_.solve(x);
        const value_type fact = (x.front() + lower_ / gamma_ * x.back()) / denom_;
        for (std::size_t k = 0; k < n_; ++k) {
            x[k] -= fact * correction_[k];
        }
    }

private:
    std::size_t n_;
    value_type lower_;
    value_type upper_;
    value_type gamma_{};
    value_type denom_{};
    TridiagonalFactor factor_;
    std::vector<value_type> correction_;
};

} // namespace nospread
