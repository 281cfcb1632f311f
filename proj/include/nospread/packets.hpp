#pragma once

// Superpositions of dispersionless modes over the admissible window,
//
//   Psi(z, r, t) = int_0^{q_max} { A(q) e^{i k+ u} + B(q) e^{i k- u} } J0(sqrt(q) r) dq,  u = z - v t,
//
// and the z-windowed normalization integral of such packets.
//
// Every q-integral is evaluated with Gauss-Legendre in the angle theta, where
// q = q_max sin^2(theta). Then sqrt(q) = sqrt(q_max) sin(theta) and
// sqrt(m^2 v^2 - q hbar^2) = m |v| cos(theta), so the integrand is smooth at
// both ends of the window (kappa = sqrt(q) alone leaves a square-root branch
// point at q_max).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nospread/errors.hpp"
#include "nospread/modes.hpp"
#include "nospread/specialfn.hpp"

namespace nospread {

// ---------------------------------------------------------------------------
// Spectral weights A(q), B(q)
// ---------------------------------------------------------------------------

/// A(q) = amp_a q^s e^{-beta q}, B(q) = amp_b q^s e^{-beta q}.
struct PowerExp {
    cplx amp_a{1.0, 0.0};
    cplx amp_b{0.0, 0.0};
    double exponent = 1.0; ///< s >= 0.5
    double decay = 2.0;    ///< beta > 0
};

/// Sampled (q, A, B) with linear interpolation; q strictly ascending.
struct Tabulated {
    std::vector<double> q;
    std::vector<cplx> a;
    std::vector<cplx> b;
};

class SpectralWeights {
public:
    enum class Kind { PowerExp, Tabulated };

    SpectralWeights() : SpectralWeights(PowerExp{}) {}

    explicit SpectralWeights(PowerExp p) : kind_(Kind::PowerExp), power_(p) {
        if (!(p.exponent >= 0.5) || !std::isfinite(p.exponent)) {
            throw ArgumentError("PowerExp: exponent s must be >= 0.5");
        }
        if (!(p.decay > 0.0) || !std::isfinite(p.decay)) {
            throw ArgumentError("PowerExp: decay beta must be > 0");
        }
    }

    explicit SpectralWeights(Tabulated t) : kind_(Kind::Tabulated), table_(std::move(t)) {
        const auto n = table_.q.size();
        if (n < 2 || table_.a.size() != n || table_.b.size() != n) {
            throw ArgumentError("Tabulated: need >= 2 rows with matching q, A, B columns");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(table_.q[i]) || !std::isfinite(table_.a[i].real()) ||
                !std::isfinite(table_.a[i].imag()) || !std::isfinite(table_.b[i].real()) ||
                !std::isfinite(table_.b[i].imag())) {
                throw ArgumentError("Tabulated: non-finite entry in row " + std::to_string(i));
            }
            if (i > 0 && !(table_.q[i] > table_.q[i - 1])) {
                throw ArgumentError("Tabulated: q column must be strictly ascending");
            }
        }
    }

    /// Preset used throughout: s = 1, beta = 2.
    static SpectralWeights preset(cplx amp_a = 1.0, cplx amp_b = 0.0) {
        return SpectralWeights(PowerExp{amp_a, amp_b, 1.0, 2.0});
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] const PowerExp& power_exp() const { return power_; }
    [[nodiscard]] const Tabulated& table() const { return table_; }

    [[nodiscard]] cplx a(double q) const { return kind_ == Kind::PowerExp ? power_.amp_a * profile(q) : lerp(q, table_.a); }
    [[nodiscard]] cplx b(double q) const { return kind_ == Kind::PowerExp ? power_.amp_b * profile(q) : lerp(q, table_.b); }

    [[nodiscard]] bool is_zero() const {
        if (kind_ == Kind::PowerExp) {
            return power_.amp_a == cplx{} && power_.amp_b == cplx{};
        }
        auto zero = [](const cplx& c) { return c == cplx{}; };
        return std::ranges::all_of(table_.a, zero) && std::ranges::all_of(table_.b, zero);
    }

    /// Weights must be defined on the whole of [0, q_max] and vanish at q = 0
    /// so that int (|A|^2 + |B|^2) dq / q converges.
    void check_window(const PhysicalParams& params) const {
        if (kind_ != Kind::Tabulated) {
            return;
        }
        const double q_max = params.q_max();
        const double tol = 1e-12 * std::max(1.0, q_max);
        if (table_.q.front() > tol || table_.q.back() < q_max - tol) {
            std::ostringstream os;
            os.precision(17);
            os << "Tabulated: table covers [" << table_.q.front() << ", " << table_.q.back()
               << "] but the spectral window is [0, " << q_max << "]";
            throw DomainError(os.str());
        }
        const double qa = std::max(table_.q.front(), 0.0);
        if (std::abs(lerp(qa, table_.a)) != 0.0 || std::abs(lerp(qa, table_.b)) != 0.0) {
            throw DomainError("Tabulated: A and B must vanish at q = 0, otherwise the dq/q norm integral diverges");
        }
    }

private:
    [[nodiscard]] double profile(double q) const {
        if (q <= 0.0) {
            return 0.0;
        }
        return std::pow(q, power_.exponent) * std::exp(-power_.decay * q);
    }

    [[nodiscard]] cplx lerp(double q, const std::vector<cplx>& column) const {
        const auto& qs = table_.q;
        // Allow the ends to be reached up to rounding of the window edges.
        const double slack = 1e-12 * std::max(1.0, std::abs(qs.back()));
        if (q < qs.front() - slack || q > qs.back() + slack || std::isnan(q)) {
            std::ostringstream os;
            os.precision(17);
            os << "Tabulated: q = " << q << " outside table range [" << qs.front() << ", " << qs.back()
               << "]; extrapolation is not supported";
            throw DomainError(os.str());
        }
        if (q <= qs.front()) {
            return column.front();
        }
        if (q >= qs.back()) {
            return column.back();
        }
        const auto hi = static_cast<std::size_t>(std::upper_bound(qs.begin(), qs.end(), q) - qs.begin());
        const auto lo = hi - 1;
        const double w = (q - qs[lo]) / (qs[hi] - qs[lo]);
        return column[lo] * (1.0 - w) + column[hi] * w;
    }

    Kind kind_;
    PowerExp power_{};
    Tabulated table_{};
};

// ---------------------------------------------------------------------------
// Grids and fields
// ---------------------------------------------------------------------------

/// n equally spaced points from lo to hi inclusive; n == 1 means the single point lo (== hi).
struct UniformGrid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 2;

    [[nodiscard]] double step() const noexcept { return n > 1 ? (hi - lo) / static_cast<double>(n - 1) : 0.0; }
    [[nodiscard]] double at(std::size_t i) const noexcept {
        if (n > 1 && i == n - 1) {
            return hi;
        }
        return lo + static_cast<double>(i) * step();
    }
    [[nodiscard]] double extent() const noexcept { return hi - lo; }

    void validate(const char* what) const {
        if (n == 0 || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw ArgumentError(std::string(what) + ": grid needs n >= 1 and finite bounds");
        }
        if (n == 1 ? lo != hi : !(hi > lo)) {
            throw ArgumentError(std::string(what) + ": grid must be strictly increasing (n == 1 needs lo == hi)");
        }
    }

    friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

/// Psi sampled on a (z, r) grid at one time. values[i * r.n + j] holds (z_i, r_j).
struct Field {
    std::vector<cplx> values;
    UniformGrid z;
    UniformGrid r;
    double time = 0.0;
    PhysicalParams params;

    Field() = default;
    Field(UniformGrid zg, UniformGrid rg, double t, PhysicalParams p)
        : values(zg.n * rg.n), z(zg), r(rg), time(t), params(p) {
        validate_grids();
    }

    [[nodiscard]] cplx& at(std::size_t i, std::size_t j) { return values[i * r.n + j]; }
    [[nodiscard]] const cplx& at(std::size_t i, std::size_t j) const { return values[i * r.n + j]; }

    void validate_grids() const {
        z.validate("Field z");
        r.validate("Field r");
        if (r.lo != 0.0) {
            throw ArgumentError("Field: r grid must start on the axis r = 0");
        }
    }

    /// Full invariant check: grids plus finite values of the right count.
    void validate() const {
        validate_grids();
        if (values.size() != z.n * r.n) {
            throw ArgumentError("Field: value count does not match grid sizes");
        }
        for (const auto& v : values) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw NumericalError("Field: non-finite value");
            }
        }
    }

    /// Quadrature-based operations need at least two points per direction.
    void require_area() const {
        validate();
        if (z.n < 2 || r.n < 2) {
            throw ArgumentError("Field: need n_z >= 2 and n_r >= 2");
        }
    }
};

// ---------------------------------------------------------------------------
// Spectral window parametrization q = q_max sin^2(theta)
// ---------------------------------------------------------------------------

/// Spectral nodes q_i with per-node quantities shared by packet and norm evaluation.
struct SpectralNodes {
    std::vector<double> q;
    std::vector<double> sqrt_q;
    std::vector<double> k_plus;
    std::vector<double> k_minus;
    std::vector<double> dq;       ///< quadrature weight for the measure dq
    std::vector<double> theta;

    static SpectralNodes build(const PhysicalParams& params, std::size_t n_nodes) {
        params.validate();
        if (n_nodes == 0) {
            throw ArgumentError("spectral quadrature: n_nodes must be positive");
        }
        const double q_max = params.q_max();
        if (!(q_max > 0.0)) {
            throw DegenerateSpectrumError(
                "spectral window [0, q_max] has zero length (speed = 0); no admissible spectrum to integrate");
        }
        const double root_max = std::sqrt(q_max);
        const double mean_k = params.mean_wavenumber();
        const auto rule = gauss_legendre(n_nodes, 0.0, std::numbers::pi / 2.0);
        SpectralNodes s;
        s.q.resize(n_nodes);
        s.sqrt_q.resize(n_nodes);
        s.k_plus.resize(n_nodes);
        s.k_minus.resize(n_nodes);
        s.dq.resize(n_nodes);
        s.theta = rule.nodes;
        for (std::size_t i = 0; i < n_nodes; ++i) {
            const double sn = std::sin(rule.nodes[i]);
            const double cs = std::cos(rule.nodes[i]);
            s.sqrt_q[i] = root_max * sn;
            s.q[i] = q_max * sn * sn;
            // sqrt(m^2 v^2 - q hbar^2) / hbar = sqrt(q_max) cos(theta)
            s.k_plus[i] = mean_k + root_max * cs;
            s.k_minus[i] = mean_k - root_max * cs;
            // dq = 2 q_max sin cos dtheta
            s.dq[i] = rule.weights[i] * 2.0 * q_max * sn * cs;
        }
        return s;
    }

    [[nodiscard]] std::size_t size() const noexcept { return q.size(); }
};

// ---------------------------------------------------------------------------
// Packet evaluation
// ---------------------------------------------------------------------------

/// A packet discretized on a fixed spectral rule: an exact finite superposition
/// of admissible modes, so it solves the free equation to rounding.
class Packet {
public:
    Packet(const PhysicalParams& params, const SpectralWeights& weights, std::size_t n_nodes)
        : params_(params), nodes_(SpectralNodes::build(params, n_nodes)) {
        weights.check_window(params);
        wa_.resize(nodes_.size());
        wb_.resize(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            wa_[i] = weights.a(nodes_.q[i]) * nodes_.dq[i];
            wb_[i] = weights.b(nodes_.q[i]) * nodes_.dq[i];
        }
    }

    [[nodiscard]] const PhysicalParams& params() const noexcept { return params_; }
    [[nodiscard]] const SpectralNodes& nodes() const noexcept { return nodes_; }

    [[nodiscard]] cplx operator()(double z, double r, double t) const {
        const double u = z - params_.speed * t;
        cplx sum{};
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            sum += axial_term(i, u) * radial_term(i, r);
        }
        return sum;
    }

    /// Same arithmetic as operator(), with the per-node factors tabulated once per row and column.
    [[nodiscard]] Field sample(const UniformGrid& zg, const UniformGrid& rg, double t) const {
        Field field(zg, rg, t, params_);
        const std::size_t nq = nodes_.size();
        std::vector<double> radial(rg.n * nq);
        for (std::size_t j = 0; j < rg.n; ++j) {
            for (std::size_t k = 0; k < nq; ++k) {
                radial[j * nq + k] = radial_term(k, rg.at(j));
            }
        }
        std::vector<cplx> axial(nq);
        for (std::size_t i = 0; i < zg.n; ++i) {
            const double u = zg.at(i) - params_.speed * t;
            for (std::size_t k = 0; k < nq; ++k) {
                axial[k] = axial_term(k, u);
            }
            for (std::size_t j = 0; j < rg.n; ++j) {
                cplx sum{};
                const double* rad = &radial[j * nq];
                for (std::size_t k = 0; k < nq; ++k) {
                    sum += axial[k] * rad[k];
                }
                field.at(i, j) = sum;
            }
        }
        return field;
    }

private:
    [[nodiscard]] cplx axial_term(std::size_t i, double u) const {
        return wa_[i] * std::polar(1.0, nodes_.k_plus[i] * u) + wb_[i] * std::polar(1.0, nodes_.k_minus[i] * u);
    }
    [[nodiscard]] double radial_term(std::size_t i, double r) const { return bessel_j0(nodes_.sqrt_q[i] * r); }

    PhysicalParams params_;
    SpectralNodes nodes_;
    std::vector<cplx> wa_;
    std::vector<cplx> wb_;
};

inline cplx eval_packet(const PhysicalParams& params, const SpectralWeights& weights, std::size_t n_nodes, double z,
                        double r, double t) {
    return Packet(params, weights, n_nodes)(z, r, t);
}

inline Field eval_packet_grid(const PhysicalParams& params, const SpectralWeights& weights, std::size_t n_nodes,
                              const UniformGrid& z_grid, const UniformGrid& r_grid, double t) {
    return Packet(params, weights, n_nodes).sample(z_grid, r_grid, t);
}

// ---------------------------------------------------------------------------
// Normalization integral
// ---------------------------------------------------------------------------

/// |A|^2 + |B|^2 + 2 Re[A conj(B) exp((2 z i / hbar) sqrt(m^2 v^2 - q hbar^2))], always >= 0.
inline double norm_integrand(const SpectralWeights& weights, const PhysicalParams& params, double z, double q) {
    if (!(q > 0.0)) {
        throw DomainError("norm_integrand: q must be > 0 (the 1/q weight is singular at q = 0)");
    }
    if (q > params.q_max()) {
        throw DomainError("norm_integrand: q exceeds q_max = (m v / hbar)^2");
    }
    const cplx a = weights.a(q);
    const cplx b = weights.b(q);
    const double mv = params.mass * params.speed;
    const double root = std::sqrt(std::fmax(mv * mv - q * params.hbar * params.hbar, 0.0));
    const cplx phase = std::polar(1.0, 2.0 * z * root / params.hbar);
    return std::norm(a) + std::norm(b) + 2.0 * (a * std::conj(b) * phase).real();
}

/// Spectral measure applied to the norm integrand.
enum class NormMeasure {
    /// dq / q, the weight as it is usually written for this integral.
    InverseQ,
    /// 2 dq, what the Bessel closure relation gives for the radial integral
    /// int_0^inf |Psi|^2 r dr of a packet built with measure dq.
    Closure,
};

/// 2 pi int_{-Z}^{Z} dz int_0^{q_max} norm_integrand(z, q) w(q) dq, both by Gauss-Legendre.
/// The cross term oscillates about 2 sqrt(q_max) Z / pi times along either axis;
/// n_q and n_z should each exceed ~1.3 sqrt(q_max) Z (n_q = 256 is short by 2e-4 at Z = 400).
inline double window_norm(const PhysicalParams& params, const SpectralWeights& weights, double half_length,
                          std::size_t n_q, std::size_t n_z, NormMeasure measure = NormMeasure::InverseQ) {
    if (!(half_length > 0.0) || !std::isfinite(half_length)) {
        throw ArgumentError("window_norm: half-length Z must be positive and finite");
    }
    if (n_z == 0) {
        throw ArgumentError("window_norm: n_z must be positive");
    }
    const auto nodes = SpectralNodes::build(params, n_q);
    weights.check_window(params);
    const auto z_rule = gauss_legendre(n_z, -half_length, half_length);

    double total = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double q = nodes.q[k];
        const double w = measure == NormMeasure::InverseQ ? nodes.dq[k] / q : 2.0 * nodes.dq[k];
        const cplx a = weights.a(q);
        const cplx b = weights.b(q);
        const double diag = std::norm(a) + std::norm(b);
        const cplx cross = a * std::conj(b);
        // k+ - k- = 2 sqrt(m^2 v^2 - q hbar^2) / hbar
        const double freq = nodes.k_plus[k] - nodes.k_minus[k];
        double z_sum = 0.0;
        for (std::size_t i = 0; i < z_rule.size(); ++i) {
            const double zi = z_rule.nodes[i];
            z_sum += z_rule.weights[i] * (diag + 2.0 * (cross * std::polar(1.0, freq * zi)).real());
        }
        total += w * z_sum;
    }
    return 2.0 * std::numbers::pi * total;
}

struct NormScanResult {
    std::vector<double> half_lengths;
    std::vector<double> norms;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept. r_squared is 1 for a perfect fit,
/// including the constant-data case.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ArgumentError("fit_line: need >= 2 paired samples");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += e * e;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

/// Window norms N(Z) over increasing Z plus a straight-line fit; linear growth
/// with positive slope is the signature of a non-normalizable packet.
inline NormScanResult norm_scan(const PhysicalParams& params, const SpectralWeights& weights,
                                std::span<const double> half_lengths, std::size_t n_q, std::size_t n_z,
                                NormMeasure measure = NormMeasure::InverseQ) {
    if (half_lengths.size() < 3) {
        throw ArgumentError("norm_scan: need at least 3 half-lengths");
    }
    for (std::size_t i = 0; i < half_lengths.size(); ++i) {
        if (!(half_lengths[i] > 0.0) || (i > 0 && !(half_lengths[i] > half_lengths[i - 1]))) {
            throw ArgumentError("norm_scan: half-lengths must be positive and strictly increasing");
        }
    }
    NormScanResult result;
    result.half_lengths.assign(half_lengths.begin(), half_lengths.end());
    for (double z : half_lengths) {
        result.norms.push_back(window_norm(params, weights, z, n_q, n_z, measure));
    }
    for (std::size_t i = 1; i < result.norms.size(); ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(result.norms[i]));
        if (result.norms[i] < result.norms[i - 1] - tol) {
            throw NumericalError("norm_scan: window norm decreased with Z; raise n_z to resolve the oscillating cross term");
        }
    }
    const auto fit = fit_line(result.half_lengths, result.norms);
    result.slope = fit.slope;
    result.intercept = fit.intercept;
    result.r_squared = fit.r_squared;
    return result;
}

/// 2 pi sum |Psi|^2 r dr dz by the trapezoid rule over the field's grids.
inline double direct_cylinder_norm(const Field& field) {
    field.require_area();
    const double dz = field.z.step();
    const double dr = field.r.step();
    double total = 0.0;
    for (std::size_t i = 0; i < field.z.n; ++i) {
        const double wz = (i == 0 || i + 1 == field.z.n) ? 0.5 * dz : dz;
        double row = 0.0;
        for (std::size_t j = 0; j < field.r.n; ++j) {
            const double wr = (j + 1 == field.r.n ? 0.5 * dr : dr) * field.r.at(j);
            row += wr * std::norm(field.at(i, j));
        }
        total += wz * row;
    }
    return 2.0 * std::numbers::pi * total;
}

} // namespace nospread
