#pragma once

// Independent checks on the analytic construction:
//  * finite-difference residual of i hbar dPsi/dt = -(hbar^2 / 2m) Laplacian Psi,
//  * a Crank-Nicolson propagator on a padded (z, r) box,
//  * the free Gaussian width law as the dispersive contrast case.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "nospread/errors.hpp"
#include "nospread/modes.hpp"
#include "nospread/packets.hpp"
#include "nospread/tridiagonal.hpp"

namespace nospread {

// ---------------------------------------------------------------------------
// Schrodinger residual
// ---------------------------------------------------------------------------

struct GridStep {
    double dz = 1e-3;
    double dr = 1e-3;
    double dt = 1e-3;
};

struct ProbePoint {
    double z = 0.0;
    double r = 0.0;
};

struct ResidualReport {
    double max_abs = 0.0;
    double rms = 0.0;
    double scale = 0.0; ///< max |H Psi| over the probes
    GridStep grid_step{};

    [[nodiscard]] double relative_max() const noexcept { return scale > 0.0 ? max_abs / scale : max_abs; }
    [[nodiscard]] double relative_rms() const noexcept { return scale > 0.0 ? rms / scale : rms; }
};

/// Every (z, r) pair of the two grids, z-major.
inline std::vector<ProbePoint> probe_grid(const UniformGrid& z, const UniformGrid& r) {
    z.validate("probe_grid z");
    r.validate("probe_grid r");
    std::vector<ProbePoint> probes;
    probes.reserve(z.n * r.n);
    for (std::size_t i = 0; i < z.n; ++i) {
        for (std::size_t j = 0; j < r.n; ++j) {
            probes.push_back({z.at(i), r.at(j)});
        }
    }
    return probes;
}

namespace detail {

// Fourth-order central stencils on samples at offsets -2h, -h, 0, h, 2h.
inline cplx d1_central4(const cplx (&f)[5], double h) {
    return (-f[4] + 8.0 * f[3] - 8.0 * f[1] + f[0]) / (12.0 * h);
}

inline cplx d2_central4(const cplx (&f)[5], double h) {
    return (-f[4] + 16.0 * f[3] - 30.0 * f[2] + 16.0 * f[1] - f[0]) / (12.0 * h * h);
}

} // namespace detail

/// Residual i hbar dPsi/dt - H Psi of a pointwise sampler psi(z, r, t) at each probe,
/// with fourth-order central differences. On the axis the radial Laplacian is
/// replaced by its regular limit 2 d^2Psi/dr^2, using Psi(-r) = Psi(r).
template <typename Sampler>
ResidualReport schrodinger_residual(Sampler&& psi, std::span<const ProbePoint> probes, const PhysicalParams& params,
                                    double t, GridStep h) {
    params.validate();
    if (!(h.dz > 0.0) || !(h.dr > 0.0) || !(h.dt > 0.0)) {
        throw ArgumentError("schrodinger_residual: steps must be positive");
    }
    if (probes.empty()) {
        throw ArgumentError("schrodinger_residual: no probe points");
    }
    const double kinetic = params.hbar * params.hbar / (2.0 * params.mass);
    ResidualReport report;
    report.grid_step = h;
    double sum_sq = 0.0;
    for (const auto& p : probes) {
        const bool on_axis = p.r == 0.0;
        if (p.r < 0.0 || (!on_axis && p.r - 2.0 * h.dr < -1e-14 * h.dr)) {
            std::ostringstream os;
            os << "schrodinger_residual: probe r = " << p.r << " is closer to the axis than the stencil half-width "
               << 2.0 * h.dr << " (only r = 0 has the axis rule)";
            throw GeometryError(os.str());
        }
        cplx fz[5], fr[5], ft[5];
        for (int k = 0; k < 5; ++k) {
            const double off = k - 2;
            fz[k] = psi(p.z + off * h.dz, p.r, t);
            ft[k] = psi(p.z, p.r, t + off * h.dt);
            const double rr = on_axis ? std::abs(off) * h.dr : std::max(p.r + off * h.dr, 0.0);
            fr[k] = k == 2 ? fz[2] : psi(p.z, rr, t);
        }
        const cplx psi_zz = detail::d2_central4(fz, h.dz);
        const cplx psi_rr = detail::d2_central4(fr, h.dr);
        const cplx radial = on_axis ? 2.0 * psi_rr : psi_rr + detail::d1_central4(fr, h.dr) / p.r;
        const cplx h_psi = -kinetic * (psi_zz + radial);
        const cplx lhs = cplx(0.0, params.hbar) * detail::d1_central4(ft, h.dt);
        const double res = std::abs(lhs - h_psi);
        report.max_abs = std::max(report.max_abs, res);
        report.scale = std::max(report.scale, std::abs(h_psi));
        sum_sq += res * res;
    }
    report.rms = std::sqrt(sum_sq / static_cast<double>(probes.size()));
    return report;
}

// ---------------------------------------------------------------------------
// Overlap and norms
// ---------------------------------------------------------------------------

namespace detail {

inline void require_same_grid(const Field& a, const Field& b, const char* fn) {
    if (!(a.z == b.z) || !(a.r == b.r)) {
        throw ArgumentError(std::string(fn) + ": fields live on different grids");
    }
}

/// Trapezoid weights of 2 pi r dr dz.
inline cplx cylinder_inner(const Field& a, const Field& b) {
    const double dz = a.z.step();
    const double dr = a.r.step();
    cplx total{};
    for (std::size_t i = 0; i < a.z.n; ++i) {
        const double wz = (i == 0 || i + 1 == a.z.n) ? 0.5 * dz : dz;
        cplx row{};
        for (std::size_t j = 1; j < a.r.n; ++j) {
            const double wr = (j + 1 == a.r.n ? 0.5 * dr : dr) * a.r.at(j);
            row += wr * std::conj(a.at(i, j)) * b.at(i, j);
        }
        total += wz * row;
    }
    return 2.0 * std::numbers::pi * total;
}

} // namespace detail

/// <a|b> / sqrt(<a|a><b|b>) with the cylindrical measure 2 pi r dr dz.
inline cplx overlap(const Field& a, const Field& b) {
    a.require_area();
    b.require_area();
    detail::require_same_grid(a, b, "overlap");
    const double na = detail::cylinder_inner(a, a).real();
    const double nb = detail::cylinder_inner(b, b).real();
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw DegenerateInputError("overlap: one of the fields has zero norm");
    }
    return detail::cylinder_inner(a, b) / std::sqrt(na * nb);
}

/// The norm the Crank-Nicolson scheme conserves exactly: node weights r_j dr off
/// the axis and dr^2 / 8 (the disc of radius dr/2) on it, dz along z.
inline double scheme_norm(const Field& field) {
    field.require_area();
    const double dz = field.z.step();
    const double dr = field.r.step();
    double total = 0.0;
    for (std::size_t i = 0; i < field.z.n; ++i) {
        double row = 0.125 * dr * dr * std::norm(field.at(i, 0));
        for (std::size_t j = 1; j < field.r.n; ++j) {
            row += field.r.at(j) * dr * std::norm(field.at(i, j));
        }
        total += dz * row;
    }
    return 2.0 * std::numbers::pi * total;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson propagation
// ---------------------------------------------------------------------------

enum class Boundary { DirichletPadded };

struct PropagatorConfig {
    double dt = 0.0; ///< 0 selects the default min(dz, dr)^2 m / hbar
    std::size_t steps = 1;
    Boundary boundary = Boundary::DirichletPadded;
    double pad_fraction = 0.2;

    [[nodiscard]] static double default_dt(const Field& field) {
        const double h = std::min(field.z.step(), field.r.step());
        return h * h * field.params.mass / field.params.hbar;
    }

    [[nodiscard]] double resolved_dt(const Field& field) const { return dt > 0.0 ? dt : default_dt(field); }

    /// Throws ConfigurationError unless the packet stays out of the buffer for the whole run.
    void validate(const Field& field) const {
        if (dt < 0.0 || !std::isfinite(dt)) {
            throw ConfigurationError("PropagatorConfig: dt must be positive (or 0 for the default)");
        }
        if (steps == 0) {
            throw ConfigurationError("PropagatorConfig: steps must be positive");
        }
        if (!(pad_fraction >= 0.2) || !(pad_fraction < 1.0)) {
            throw ConfigurationError("PropagatorConfig: pad_fraction must lie in [0.2, 1)");
        }
        const double travel = resolved_dt(field) * static_cast<double>(steps) * std::abs(field.params.speed);
        const double buffer = pad_fraction * field.z.extent() / 2.0;
        if (!(travel < buffer)) {
            std::ostringstream os;
            os << "PropagatorConfig: packet travels " << travel << " but the z buffer is only " << buffer
               << " wide; enlarge the box or pad_fraction, or shorten the run";
            throw ConfigurationError(os.str());
        }
    }
};

/// Crank-Nicolson stepper for the free Hamiltonian on a (z, r) box.
///
/// The z and r parts of the Laplacian act on different indices, so their
/// discretizations commute and the alternating-direction product of the two
/// Cayley factors is the full Crank-Nicolson step without splitting error.
/// Dirichlet zero on z = z_min, z_max and r = r_max; even reflection at r = 0.
class CrankNicolson {
public:
    CrankNicolson(const UniformGrid& z, const UniformGrid& r, const PhysicalParams& params, double dt)
        : nz_(z.n), nr_(r.n) {
        if (nz_ < 4 || nr_ < 3) {
            throw ArgumentError("CrankNicolson: need n_z >= 4 and n_r >= 3");
        }
        params.validate();
        using C = cplx;
        const C iz(0.0, params.hbar * dt / (4.0 * params.mass * z.step() * z.step()));
        const C ir(0.0, params.hbar * dt / (4.0 * params.mass * r.step() * r.step()));
        alpha_ = iz;

        // z: unknowns i = 1 .. nz-2; (1 + 2 alpha) on the diagonal, -alpha off it.
        const std::size_t mz = nz_ - 2;
        z_factor_ = TridiagonalFactor(std::vector<C>(mz, -iz), std::vector<C>(mz, 1.0 + 2.0 * iz), std::vector<C>(mz, -iz));

        // r: unknowns j = 0 .. nr-2. Row j of dr^2 L is
        //   j = 0: -4 psi_0 + 4 psi_1
        //   j > 0: ((j - 1/2) psi_{j-1} - 2 j psi_j + (j + 1/2) psi_{j+1}) / j
        const std::size_t mr = nr_ - 1;
        lap_lower_.assign(mr, 0.0);
        lap_diag_.assign(mr, -2.0);
        lap_upper_.assign(mr, 0.0);
        lap_diag_[0] = -4.0;
        lap_upper_[0] = 4.0;
        for (std::size_t j = 1; j < mr; ++j) {
            const double jj = static_cast<double>(j);
            lap_lower_[j] = (jj - 0.5) / jj;
            lap_upper_[j] = (jj + 0.5) / jj;
        }
        beta_ = ir;
        std::vector<C> lo(mr), di(mr), up(mr);
        for (std::size_t j = 0; j < mr; ++j) {
            lo[j] = -ir * lap_lower_[j];
            di[j] = 1.0 - ir * lap_diag_[j];
            up[j] = -ir * lap_upper_[j];
        }
        r_factor_ = TridiagonalFactor(std::move(lo), std::move(di), std::move(up));
        scratch_.resize(nz_ * nr_);
    }

    /// One step on z-major data of size n_z * n_r.
    void step(std::span<cplx> psi) {
        // Walls
        for (std::size_t j = 0; j < nr_; ++j) {
            psi[j] = 0.0;
            psi[(nz_ - 1) * nr_ + j] = 0.0;
        }
        for (std::size_t i = 0; i < nz_; ++i) {
            psi[i * nr_ + nr_ - 1] = 0.0;
        }

        // z half: (1 + alpha D) psi' = (1 - alpha D) psi with D = -(shift+ - 2 + shift-).
        for (std::size_t i = 1; i + 1 < nz_; ++i) {
            const cplx* up = &psi[(i - 1) * nr_];
            const cplx* mid = &psi[i * nr_];
            const cplx* dn = &psi[(i + 1) * nr_];
            cplx* out = &scratch_[(i - 1) * nr_];
            for (std::size_t j = 0; j < nr_; ++j) {
                out[j] = (1.0 - 2.0 * alpha_) * mid[j] + alpha_ * (up[j] + dn[j]);
            }
        }
        z_factor_.solve_interleaved(std::span<cplx>(scratch_.data(), (nz_ - 2) * nr_), nr_);
        for (std::size_t i = 1; i + 1 < nz_; ++i) {
            std::copy_n(&scratch_[(i - 1) * nr_], nr_, &psi[i * nr_]);
        }

        // r half: (1 - beta L) psi' = (1 + beta L) psi.
        const std::size_t mr = nr_ - 1;
        std::vector<cplx>& row = row_;
        row.resize(mr);
        for (std::size_t i = 1; i + 1 < nz_; ++i) {
            cplx* p = &psi[i * nr_];
            for (std::size_t j = 0; j < mr; ++j) {
                cplx lap = lap_diag_[j] * p[j] + lap_upper_[j] * p[j + 1];
                if (j > 0) {
                    lap += lap_lower_[j] * p[j - 1];
                }
                row[j] = p[j] + beta_ * lap;
            }
            r_factor_.solve(row);
            std::copy_n(row.data(), mr, p);
        }
    }

private:
    std::size_t nz_;
    std::size_t nr_;
    cplx alpha_{};
    cplx beta_{};
    std::vector<double> lap_lower_, lap_diag_, lap_upper_;
    TridiagonalFactor z_factor_;
    TridiagonalFactor r_factor_;
    std::vector<cplx> scratch_;
    std::vector<cplx> row_;
};

/// Advances the field by steps * dt with Crank-Nicolson.
inline Field propagate(const Field& initial, const PropagatorConfig& config) {
    initial.require_area();
    config.validate(initial);
    const double dt = config.resolved_dt(initial);
    Field field = initial;
    CrankNicolson stepper(field.z, field.r, field.params, dt);
    for (std::size_t s = 0; s < config.steps; ++s) {
        stepper.step(field.values);
    }
    field.time = initial.time + dt * static_cast<double>(config.steps);
    for (const auto& v : field.values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw NumericalError("propagate: non-finite value after stepping");
        }
    }
    return field;
}

/// Switches the field off across the buffer: pad_fraction * extent / 2 at each
/// z end and pad_fraction * r_max at the outer radius. The ramp is C-infinity
/// (built from exp(-1/x)), so it seeds no grid-scale waves.
inline void apply_buffer_taper(Field& field, double pad_fraction) {
    const double wz = pad_fraction * field.z.extent() / 2.0;
    const double wr = pad_fraction * field.r.extent();
    auto bump = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    auto ramp = [&](double depth, double width) {
        if (depth <= 0.0) {
            return 1.0;
        }
        if (depth >= width) {
            return 0.0;
        }
        const double x = depth / width;
        return bump(1.0 - x) / (bump(1.0 - x) + bump(x));
    };
    for (std::size_t i = 0; i < field.z.n; ++i) {
        const double zi = field.z.at(i);
        const double depth_z = std::max(field.z.lo + wz - zi, zi - (field.z.hi - wz));
        const double fz = ramp(depth_z, wz);
        for (std::size_t j = 0; j < field.r.n; ++j) {
            const double depth_r = field.r.at(j) - (field.r.hi - wr);
            field.at(i, j) *= fz * ramp(depth_r, wr);
        }
    }
}

/// Sub-field of nodes outside the buffer.
inline Field interior(const Field& field, double pad_fraction) {
    field.require_area();
    const double wz = pad_fraction * field.z.extent() / 2.0;
    const double wr = pad_fraction * field.r.extent();
    const double dz = field.z.step();
    const double dr = field.r.step();
    const auto i0 = static_cast<std::size_t>(std::ceil(wz / dz - 1e-9));
    const auto i1 = field.z.n - 1 - i0;
    const auto j1 = static_cast<std::size_t>(std::floor((field.r.extent() - wr) / dr + 1e-9));
    if (i1 <= i0 || j1 < 1) {
        throw ArgumentError("interior: buffer leaves no interior nodes");
    }
    Field sub({field.z.at(i0), field.z.at(i1), i1 - i0 + 1}, {0.0, field.r.at(j1), j1 + 1}, field.time, field.params);
    for (std::size_t i = i0; i <= i1; ++i) {
        for (std::size_t j = 0; j <= j1; ++j) {
            sub.at(i - i0, j) = field.at(i, j);
        }
    }
    return sub;
}

/// |dPsi/dr| at r = 0 from a one-sided fifth-order stencil, maximized over z rows.
inline double axis_slope(const Field& field) {
    field.require_area();
    if (field.r.n < 5) {
        throw ArgumentError("axis_slope: need n_r >= 5");
    }
    const double dr = field.r.step();
    double worst = 0.0;
    for (std::size_t i = 0; i < field.z.n; ++i) {
        const cplx d = (-25.0 * field.at(i, 0) + 48.0 * field.at(i, 1) - 36.0 * field.at(i, 2) +
                        16.0 * field.at(i, 3) - 3.0 * field.at(i, 4)) /
                       (12.0 * dr);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// One-dimensional axial propagation (z part alone)
// ---------------------------------------------------------------------------

enum class LineBoundary { Dirichlet, Periodic };

/// Psi on z_i = z_min + i dz. Periodic lines have period n dz (no duplicated end point).
struct LineField {
    std::vector<cplx> values;
    double z_min = 0.0;
    double dz = 1.0;
    double time = 0.0;

    [[nodiscard]] double z(std::size_t i) const noexcept { return z_min + static_cast<double>(i) * dz; }
};

/// Crank-Nicolson for -(hbar^2 / 2m) d^2/dz^2 alone.
inline LineField propagate_line(const LineField& initial, const PhysicalParams& params, double dt, std::size_t steps,
                                LineBoundary boundary) {
    params.validate();
    const std::size_t n = initial.values.size();
    if (n < 4 || !(initial.dz > 0.0)) {
        throw ArgumentError("propagate_line: need >= 4 points and dz > 0");
    }
    if (!(dt > 0.0) || steps == 0) {
        throw ConfigurationError("propagate_line: need dt > 0 and steps > 0");
    }
    const cplx alpha(0.0, params.hbar * dt / (4.0 * params.mass * initial.dz * initial.dz));
    LineField line = initial;
    std::vector<cplx> rhs(n);
    if (boundary == LineBoundary::Periodic) {
        const CyclicTridiagonal solver(n, -alpha, 1.0 + 2.0 * alpha, -alpha);
        for (std::size_t s = 0; s < steps; ++s) {
            for (std::size_t k = 0; k < n; ++k) {
                const cplx left = line.values[(k + n - 1) % n];
                const cplx right = line.values[(k + 1) % n];
                rhs[k] = (1.0 - 2.0 * alpha) * line.values[k] + alpha * (left + right);
            }
            solver.solve(rhs);
            line.values = rhs;
        }
    } else {
        const std::size_t m = n - 2;
        const TridiagonalFactor solver(std::vector<cplx>(m, -alpha), std::vector<cplx>(m, 1.0 + 2.0 * alpha),
                                       std::vector<cplx>(m, -alpha));
        line.values.front() = 0.0;
        line.values.back() = 0.0;
        rhs.resize(m);
        for (std::size_t s = 0; s < steps; ++s) {
            for (std::size_t k = 0; k < m; ++k) {
                rhs[k] = (1.0 - 2.0 * alpha) * line.values[k + 1] + alpha * (line.values[k] + line.values[k + 2]);
            }
            solver.solve(rhs);
            std::copy(rhs.begin(), rhs.end(), line.values.begin() + 1);
        }
    }
    line.time = initial.time + dt * static_cast<double>(steps);
    return line;
}

/// sqrt(<z^2> - <z>^2) under |Psi|^2.
inline double measured_width(const LineField& line) {
    double n0 = 0.0, n1 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < line.values.size(); ++i) {
        const double p = std::norm(line.values[i]);
        const double z = line.z(i);
        n0 += p;
        n1 += p * z;
        n2 += p * z * z;
    }
    if (!(n0 > 0.0)) {
        throw DegenerateInputError("measured_width: zero field");
    }
    const double mean = n1 / n0;
    return std::sqrt(std::max(n2 / n0 - mean * mean, 0.0));
}

/// Width of a free 1-D Gaussian with |Psi|^2 ~ exp(-z^2 / (2 sigma0^2)) at time t.
inline double gaussian_comparator(double sigma0, const PhysicalParams& params, double t) {
    if (!(sigma0 > 0.0)) {
        throw ArgumentError("gaussian_comparator: sigma0 must be positive");
    }
    params.validate();
    const double x = params.hbar * t / (2.0 * params.mass * sigma0 * sigma0);
    return sigma0 * std::sqrt(1.0 + x * x);
}

// ---------------------------------------------------------------------------
// Experiments shared by the CLI and the acceptance suite
// ---------------------------------------------------------------------------

struct DispersionlessComparison {
    cplx overlap{};                ///< interior overlap of propagated vs analytically translated
    double norm_initial = 0.0;     ///< scheme norm of the tapered initial field, whole box
    double norm_final = 0.0;
    double norm_drift = 0.0;       ///< |final - initial| / initial of the scheme norm
    double trapezoid_drift = 0.0;  ///< same for direct_cylinder_norm over the whole box
    double elapsed = 0.0;
    Field propagated;              ///< interior part of the propagated field
    Field expected;                ///< packet evaluated on the interior at the final time
};

/// Samples the packet on the box, tapers it into the buffer, propagates with
/// Crank-Nicolson and compares with the packet evaluated at the final time.
/// steps == 0 skips propagation.
inline DispersionlessComparison compare_dispersionless(const Packet& packet, const UniformGrid& z, const UniformGrid& r,
                                                       const PropagatorConfig& config) {
    Field start = packet.sample(z, r, 0.0);
    apply_buffer_taper(start, config.pad_fraction);
    DispersionlessComparison out;
    out.norm_initial = scheme_norm(start);
    const double trapezoid_initial = direct_cylinder_norm(start);
    Field end = config.steps == 0 ? start : propagate(start, config);
    out.elapsed = end.time;
    out.norm_final = scheme_norm(end);
    out.norm_drift = std::abs(out.norm_final - out.norm_initial) / out.norm_initial;
    out.trapezoid_drift = std::abs(direct_cylinder_norm(end) - trapezoid_initial) / trapezoid_initial;
    out.propagated = interior(end, config.pad_fraction);
    out.expected = packet.sample(out.propagated.z, out.propagated.r, end.time);
    out.overlap = overlap(out.propagated, out.expected);
    return out;
}

struct GaussianSpreading {
    double sigma0 = 1.0;
    double time = 0.0;
    double width_measured = 0.0;
    double width_predicted = 0.0;
};

/// Propagates Psi0 = exp(-z^2 / (4 sigma0^2)) with the axial Crank-Nicolson part.
inline GaussianSpreading gaussian_spreading(double sigma0, const PhysicalParams& params, double t, double half_box,
                                            double dz, double dt) {
    if (!(half_box > 0.0) || !(dz > 0.0) || !(dt > 0.0) || !(t >= 0.0)) {
        throw ArgumentError("gaussian_spreading: need positive box, dz, dt and t >= 0");
    }
    LineField line;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * half_box / dz)) + 1;
    line.z_min = -half_box;
    line.dz = 2.0 * half_box / static_cast<double>(n - 1);
    line.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double zi = line.z(i);
        line.values[i] = std::exp(-zi * zi / (4.0 * sigma0 * sigma0));
    }
    GaussianSpreading out;
    out.sigma0 = sigma0;
    out.time = t;
    const auto steps = static_cast<std::size_t>(std::llround(t / dt));
    if (steps > 0) {
        line = propagate_line(line, params, t / static_cast<double>(steps), steps, LineBoundary::Dirichlet);
    }
    out.width_measured = measured_width(line);
    out.width_predicted = gaussian_comparator(sigma0, params, t);
    return out;
}

} // namespace nospread
