#pragma once

// Cylindrical Bessel functions J0, J1, Y0 and Gauss-Legendre quadrature.
//
// Small arguments (|x| <= 8) use the ascending series in extended precision.
// Its terms grow like exp(x) before cancelling, so 8 < |x| <= 20 goes through
// Miller's backward recurrence (J_n normalized by J0 + 2 sum J_2k = 1, Y0 from
// the Neumann series). Beyond 20 the Hankel asymptotic expansion is accurate
// to roughly exp(-2x). Observed error is a few ulps of 1 throughout.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "nospread/errors.hpp"

namespace nospread {

namespace detail {

inline constexpr long double kSeriesLimit = 8.0L;
inline constexpr long double kAsymptoticStart = 20.0L;
inline constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
inline constexpr long double kPi = 3.141592653589793238462643383279502884L;

inline void require_finite(double x, const char* fn) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": argument must be finite");
    }
}

// sum_k (-1)^k (x^2/4)^k / (k! (k+order)!) * (x/2)^order, order in {0, 1}
inline long double ascending_series(long double x, int order) {
    const long double y = x * x / 4.0L;
    long double term = order == 0 ? 1.0L : x / 2.0L;
    long double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= -y / (static_cast<long double>(k) * static_cast<long double>(k + order));
        sum += term;
        if (std::fabs(term) < 1e-24L && static_cast<long double>(k) > y) {
            break;
        }
    }
    return sum;
}

// (2/pi) * sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2, the non-log part of Y0.
inline long double y0_series_tail(long double x) {
    const long double y = x * x / 4.0L;
    long double term = 1.0L;
    long double harmonic = 0.0L;
    long double sum = 0.0L;
    for (int k = 1; k < 200; ++k) {
        term *= -y / (static_cast<long double>(k) * static_cast<long double>(k));
        harmonic += 1.0L / static_cast<long double>(k);
        sum -= term * harmonic;
        if (std::fabs(term * harmonic) < 1e-24L && static_cast<long double>(k) > y) {
            break;
        }
    }
    return 2.0L / kPi * sum;
}

// Hankel asymptotic factors P_nu(x), Q_nu(x) for integer order nu.
inline std::pair<long double, long double> hankel_pq(long double x, int nu) {
    const long double mu = 4.0L * nu * nu;
    long double p = 1.0L;
    long double q = 0.0L;
    long double term = 1.0L;
    long double previous = std::numeric_limits<long double>::infinity();
    for (int k = 1; k < 100; ++k) {
        const long double odd = 2.0L * k - 1.0L;
        term *= (mu - odd * odd) / (8.0L * k * x);
        const long double magnitude = std::fabs(term);
        if (magnitude > previous) {
            break;
        }
        previous = magnitude;
        // k = 1, 2, 3, 4, ... feeds Q(+), P(-), Q(-), P(+), ...
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            default: p += term; break;
        }
        if (magnitude < 1e-22L) {
            break;
        }
    }
    return {p, q};
}

struct MillerValues {
    long double j0;
    long double j1;
    long double y0;
};

// Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} from far above the turning point.
inline MillerValues miller(long double x) {
    const int top = 2 * static_cast<int>((x + 40.0L) / 2.0L);
    long double next = 0.0L;
    long double current = 1e-30L;
    long double even_sum = 0.0L;     // sum_{k>=1} J_2k
    long double neumann_sum = 0.0L;  // sum_{k>=1} (-1)^k J_2k / k
    long double j1 = 0.0L;
    for (int n = top; n > 0; --n) {
        if (n % 2 == 0) {
            even_sum += current;
            const int k = n / 2;
            neumann_sum += (k % 2 == 0 ? current : -current) / static_cast<long double>(k);
        }
        if (n == 1) {
            j1 = current;
        }
        const long double previous = 2.0L * static_cast<long double>(n) / x * current - next;
        next = current;
        current = previous;
    }
    const long double scale = 1.0L / (current + 2.0L * even_sum);
    const long double j0 = current * scale;
    const long double y0 = 2.0L / kPi * (std::log(x / 2.0L) + kEulerGamma) * j0 - 4.0L / kPi * neumann_sum * scale;
    return {j0, j1 * scale, y0};
}

struct AsymptoticParts {
    long double amplitude;
    long double p;
    long double q;
    long double cos_x;
    long double sin_x;
};

inline AsymptoticParts asymptotic_parts(long double x, int nu) {
    const auto [p, q] = hankel_pq(x, nu);
    return {std::sqrt(2.0L / (kPi * x)), p, q, std::cos(x), std::sin(x)};
}

} // namespace detail

/// Bessel function of the first kind, order zero. Even in x.
inline double bessel_j0(double x) {
    detail::require_finite(x, "bessel_j0");
    const long double ax = std::fabs(static_cast<long double>(x));
    if (ax <= detail::kSeriesLimit) {
        return static_cast<double>(detail::ascending_series(ax, 0));
    }
    if (ax <= detail::kAsymptoticStart) {
        return static_cast<double>(detail::miller(ax).j0);
    }
    const auto a = detail::asymptotic_parts(ax, 0);
    // chi = x - pi/4
    const long double cos_chi = (a.cos_x + a.sin_x) / std::numbers::sqrt2_v<long double>;
    const long double sin_chi = (a.sin_x - a.cos_x) / std::numbers::sqrt2_v<long double>;
    return static_cast<double>(a.amplitude * (a.p * cos_chi - a.q * sin_chi));
}

/// Bessel function of the first kind, order one. Odd in x; J0' = -J1.
inline double bessel_j1(double x) {
    detail::require_finite(x, "bessel_j1");
    const long double ax = std::fabs(static_cast<long double>(x));
    long double value;
    if (ax <= detail::kSeriesLimit) {
        value = detail::ascending_series(ax, 1);
    } else if (ax <= detail::kAsymptoticStart) {
        value = detail::miller(ax).j1;
    } else {
        const auto a = detail::asymptotic_parts(ax, 1);
        // chi = x - 3pi/4
        const long double cos_chi = (a.sin_x - a.cos_x) / std::numbers::sqrt2_v<long double>;
        const long double sin_chi = -(a.sin_x + a.cos_x) / std::numbers::sqrt2_v<long double>;
        value = a.amplitude * (a.p * cos_chi - a.q * sin_chi);
    }
    return static_cast<double>(x < 0.0 ? -value : value);
}

/// Bessel function of the second kind, order zero. Defined for x > 0 only;
/// diverges like (2/pi) ln(x/2) as x -> 0+.
inline double bessel_y0(double x) {
    detail::require_finite(x, "bessel_y0");
    if (x <= 0.0) {
        throw DomainError("bessel_y0: argument must be positive (Y0 is singular at 0)");
    }
    const long double lx = x;
    if (lx <= detail::kSeriesLimit) {
        const long double j0 = detail::ascending_series(lx, 0);
        return static_cast<double>(2.0L / detail::kPi * (std::log(lx / 2.0L) + detail::kEulerGamma) * j0 +
                                   detail::y0_series_tail(lx));
    }
    if (lx <= detail::kAsymptoticStart) {
        return static_cast<double>(detail::miller(lx).y0);
    }
    const auto a = detail::asymptotic_parts(lx, 0);
    const long double cos_chi = (a.cos_x + a.sin_x) / std::numbers::sqrt2_v<long double>;
    const long double sin_chi = (a.sin_x - a.cos_x) / std::numbers::sqrt2_v<long double>;
    return static_cast<double>(a.amplitude * (a.p * sin_chi + a.q * cos_chi));
}

/// Nodes and positive weights of an n-point rule on [lo, hi]; nodes ascending.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }

    template <typename F>
    [[nodiscard]] auto integrate(F&& f) const {
        using R = decltype(f(0.0));
        R sum{};
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sum += weights[i] * f(nodes[i]);
        }
        return sum;
    }
};

/// n-point Gauss-Legendre rule on [lo, hi]; exact for polynomials of degree <= 2n-1.
inline QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
    if (n == 0) {
        throw ArgumentError("gauss_legendre: need at least one node");
    }
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ArgumentError("gauss_legendre: require finite lo < hi");
    }

    std::vector<long double> x(n);
    std::vector<long double> w(n);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        // Root i of P_n counted from +1 downwards.
        long double z = std::cos(detail::kPi * (static_cast<long double>(i) + 0.75L) /
                                 (static_cast<long double>(n) + 0.5L));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L;
            long double p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const long double kk = static_cast<long double>(k);
                const long double p2 = ((2.0L * kk - 1.0L) * z * p1 - (kk - 1.0L) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            // P_n' from P_n and P_{n-1}
            dp = static_cast<long double>(n) * (z * p1 - p0) / (z * z - 1.0L);
            const long double step = p1 / dp;
            z -= step;
            if (std::fabs(step) < 1e-19L) {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        const long double wi = 2.0L / ((1.0L - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) {
        x[n / 2] = 0.0L;
    }

    QuadratureRule rule;
    rule.lo = lo;
    rule.hi = hi;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const long double mid = 0.5L * (static_cast<long double>(lo) + hi);
    const long double half_width = 0.5L * (static_cast<long double>(hi) - lo);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = static_cast<double>(mid + half_width * x[i]);
        rule.weights[i] = static_cast<double>(half_width * w[i]);
    }
    return rule;
}

} // namespace nospread
