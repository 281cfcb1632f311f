#pragma once

// Independent reference computations shared by the unit tests and the acceptance run.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "nospread/modes.hpp"
#include "nospread/packets.hpp"
#include "nospread/specialfn.hpp"

namespace nospread::ref {

// Uniform in [lo, hi) from the top 53 bits of the engine; same draws on every platform.
inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
}

inline cplx random_complex(std::mt19937_64& gen) { return {uniform(gen, -1.0, 1.0), uniform(gen, -1.0, 1.0)}; }

/// Composite trapezoid on [a, b] with n panels. Spectrally accurate for smooth periodic integrands.
template <typename F>
double trapezoid(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (int k = 1; k < n; ++k) {
        s += f(a + k * h);
    }
    return s * h;
}

/// J0(x) = (1/pi) int_0^pi cos(x sin t) dt
inline double j0_integral(double x) {
    const int n = 64 + static_cast<int>(4.0 * std::abs(x));
    return trapezoid([x](double t) { return std::cos(x * std::sin(t)); }, 0.0, std::numbers::pi, n) /
           std::numbers::pi;
}

/// J1(x) = (1/pi) int_0^pi cos(t - x sin t) dt
inline double j1_integral(double x) {
    const int n = 64 + static_cast<int>(4.0 * std::abs(x));
    return trapezoid([x](double t) { return std::cos(t - x * std::sin(t)); }, 0.0, std::numbers::pi, n) /
           std::numbers::pi;
}

/// Tanh-sinh quadrature on [a, b]; copes with integrable endpoint singularities.
/// f receives (x, distance to a, distance to b) so it can avoid cancellation near the ends.
template <typename F>
double tanh_sinh(F&& f, double a, double b, double h = 1.0 / 64.0, double t_max = 3.5) {
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    const int n = static_cast<int>(t_max / h);
    for (int k = -n; k <= n; ++k) {
        const double t = k * h;
        const double s = 0.5 * std::numbers::pi * std::sinh(t);
        const double c = std::cosh(s);
        // 1 - tanh(s) and 1 + tanh(s) without cancellation
        const double lo = std::exp(-s) / c; // 1 - tanh(s)
        const double hi = std::exp(s) / c;  // 1 + tanh(s)
        const double da = half * hi;
        const double db = half * lo;
        if (da <= 0.0 || db <= 0.0) {
            continue;
        }
        const double w = half * 0.5 * std::numbers::pi * std::cosh(t) / (c * c);
        sum += w * f(a + da, da, db);
    }
    return sum * h;
}

/// Y0(x) = (4 / pi^2) int_0^{pi/2} cos(x cos t) (gamma + ln(2 x sin^2 t)) dt
inline double y0_integral(double x) {
    constexpr double gamma = 0.57721566490153286061;
    auto f = [x](double, double da, double db) {
        // t = da from the left end; cos t = sin(pi/2 - t) = sin(db)
        const double st = std::sin(da);
        return std::cos(x * std::sin(db)) * (gamma + std::log(2.0 * x * st * st));
    };
    return 4.0 / (std::numbers::pi * std::numbers::pi) * tanh_sinh(f, 0.0, std::numbers::pi / 2.0);
}

/// int_0^X x J0(u x) J0(v x) dx in closed form (u != v).
inline double closure_partial(double u, double v, double X) {
    return X * (u * bessel_j1(u * X) * bessel_j0(v * X) - v * bessel_j0(u * X) * bessel_j1(v * X)) / (u * u - v * v);
}

/// The norm integrand written as (|A| - |B|)^2 + 2|A||B|(1 + cos(arg A - arg B + 2 z sqrt(m^2v^2 - q hbar^2)/hbar)).
inline double norm_integrand_decomposed(cplx a, cplx b, const PhysicalParams& p, double z, double q) {
    const double mv = p.mass * p.speed;
    const double root = std::sqrt(mv * mv - q * p.hbar * p.hbar);
    const double aa = std::abs(a);
    const double bb = std::abs(b);
    return (aa - bb) * (aa - bb) +
           2.0 * aa * bb * (1.0 + std::cos(std::arg(a) - std::arg(b) + 2.0 * z * root / p.hbar));
}

struct RandomMode {
    PhysicalParams params;
    Mode mode;
};

/// Random bounded mode: m, v, hbar in modest ranges, q anywhere in [0, q_max], C1..C3 in the unit square.
inline RandomMode random_mode(std::mt19937_64& gen) {
    RandomMode out;
    out.params.mass = uniform(gen, 0.5, 2.0);
    out.params.speed = uniform(gen, 0.5, 1.5);
    out.params.hbar = uniform(gen, 0.5, 2.0);
    const double q = out.params.q_max() * uniform(gen, 0.0, 1.0);
    const cplx c1 = random_complex(gen);
    const cplx c2 = random_complex(gen);
    const cplx c3 = random_complex(gen);
    out.mode = Mode::bounded(out.params, q, c1, c2, c3);
    return out;
}

} // namespace nospread::ref
