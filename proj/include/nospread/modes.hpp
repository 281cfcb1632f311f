#pragma once

// Single separable solutions Psi = R(r) f(z - v t) of the free-particle
// Schrodinger equation in cylindrical coordinates (no phi dependence).
//
//   f(u) = C1 exp(i k+ u) + C2 exp(i k- u),   k+- = (m v +- sqrt(m^2 v^2 - q hbar^2)) / hbar
//   f(u) = C1 + C2 exp(2 i m v u / hbar)           (q = 0)
//   R(r) = C3 J0(sqrt(q) r) + C4 Y0(sqrt(q) r)     (q > 0)
//   R(r) = C3 + C4 ln r                            (q = 0)
//
// Bounded solutions need 0 <= q <= q_max = (m v / hbar)^2 and C4 = 0.

#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "nospread/errors.hpp"
#include "nospread/specialfn.hpp"

namespace nospread {

using cplx = std::complex<double>;

struct PhysicalParams {
    double mass = 1.0;
    double speed = 1.0; ///< phase velocity of the ansatz along +z
    double hbar = 1.0;

    /// Upper end of the admissible spectral window, (m v / hbar)^2.
    [[nodiscard]] double q_max() const noexcept {
        const double k = mass * speed / hbar;
        return k * k;
    }

    /// m v / hbar, the signed half-sum of the axial wavenumbers.
    [[nodiscard]] double mean_wavenumber() const noexcept { return mass * speed / hbar; }

    void validate() const {
        if (!(mass > 0.0) || !std::isfinite(mass)) {
            throw ArgumentError("PhysicalParams: mass must be positive and finite");
        }
        if (!(hbar > 0.0) || !std::isfinite(hbar)) {
            throw ArgumentError("PhysicalParams: hbar must be positive and finite");
        }
        if (!std::isfinite(speed)) {
            throw ArgumentError("PhysicalParams: speed must be finite");
        }
    }
};

/// True iff 0 <= q <= q_max.
inline bool admissible(const PhysicalParams& params, double q) noexcept {
    return q >= 0.0 && q <= params.q_max();
}

struct AxialWavenumbers {
    double k_plus = 0.0;
    double k_minus = 0.0;
};

namespace detail {

inline void require_admissible(const PhysicalParams& params, double q, const char* fn) {
    if (std::isnan(q) || q < 0.0) {
        std::ostringstream os;
        os << fn << ": q = " << q << " violates the lower bound q >= 0 of the finiteness window";
        throw DomainError(os.str());
    }
    if (q > params.q_max()) {
        std::ostringstream os;
        os.precision(17);
        os << fn << ": q = " << q << " violates the upper bound q <= (m v / hbar)^2 = " << params.q_max()
           << " of the finiteness window";
        throw DomainError(os.str());
    }
}

} // namespace detail

/// One separable solution. Build bounded modes with Mode::bounded; Mode::unchecked
/// keeps C4 and any q so the singular / growing branches can be inspected.
struct Mode {
    double q = 0.0;
    cplx c1{};
    cplx c2{};
    cplx c3{};
    cplx c4{};

    static Mode bounded(const PhysicalParams& params, double q, cplx c1, cplx c2, cplx c3) {
        params.validate();
        detail::require_admissible(params, q, "Mode::bounded");
        return Mode{q, c1, c2, c3, cplx{}};
    }

    static Mode unchecked(double q, cplx c1, cplx c2, cplx c3, cplx c4) noexcept {
        return Mode{q, c1, c2, c3, c4};
    }
};

inline AxialWavenumbers axial_wavenumbers(const PhysicalParams& params, double q) {
    detail::require_admissible(params, q, "axial_wavenumbers");
    const double mv = params.mass * params.speed;
    const double root = std::sqrt(std::fmax(mv * mv - q * params.hbar * params.hbar, 0.0));
    return {(mv + root) / params.hbar, (mv - root) / params.hbar};
}

/// f(u) = C1 exp(i k+ u) + C2 exp(i k- u) for admissible q > 0.
/// The q = 0 branch is written the other way round, f(u) = C1 + C2 exp(2 i m v u / hbar),
/// so C1 = 0 leaves the plane wave.
inline cplx eval_axial(const PhysicalParams& params, const Mode& mode, double u) {
    const auto k = axial_wavenumbers(params, mode.q);
    if (mode.q == 0.0) {
        return mode.c1 + mode.c2 * std::polar(1.0, 2.0 * params.mean_wavenumber() * u);
    }
    return mode.c1 * std::polar(1.0, k.k_plus * u) + mode.c2 * std::polar(1.0, k.k_minus * u);
}

/// The axial factor for arbitrary real q, written with the complex square root
/// sqrt(q hbar^2 - m^2 v^2). Above q_max one exponential grows without bound.
/// Uses the C1 <-> k+ labelling everywhere, q = 0 included.
inline cplx eval_axial_general(const PhysicalParams& params, const Mode& mode, double u) {
    const double mv = params.mass * params.speed;
    const cplx root = std::sqrt(cplx(mode.q * params.hbar * params.hbar - mv * mv, 0.0));
    const cplx i_mv(0.0, mv);
    return mode.c1 * std::exp((i_mv + root) * u / params.hbar) +
           mode.c2 * std::exp((i_mv - root) * u / params.hbar);
}

/// R(r): C3 J0(sqrt(q) r) + C4 Y0(sqrt(q) r), or C3 + C4 ln r when q = 0.
inline cplx eval_radial(const PhysicalParams& params, const Mode& mode, double r) {
    detail::require_admissible(params, mode.q, "eval_radial");
    if (!(r >= 0.0) || !std::isfinite(r)) {
        throw DomainError("eval_radial: r must be finite and >= 0");
    }
    const bool singular_part = mode.c4 != cplx{};
    if (singular_part && r == 0.0) {
        throw SingularityError("eval_radial: C4 != 0 makes R(r) unbounded on the axis r = 0");
    }
    if (mode.q == 0.0) {
        return singular_part ? mode.c3 + mode.c4 * std::log(r) : mode.c3;
    }
    const double kr = std::sqrt(mode.q) * r;
    cplx value = mode.c3 * bessel_j0(kr);
    if (singular_part) {
        value += mode.c4 * bessel_y0(kr);
    }
    return value;
}

/// Psi(z, r, t) = R(r) f(z - v t).
inline cplx eval_mode(const PhysicalParams& params, const Mode& mode, double z, double r, double t) {
    const double u = z - params.speed * t;
    return eval_radial(params, mode, r) * eval_axial(params, mode, u);
}

} // namespace nospread
