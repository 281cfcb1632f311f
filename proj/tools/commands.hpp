#pragma once

// Subcommands of the nospread CLI. Each one writes its results plus a
// manifest.json (effective config + derived constants) into the output dir.
//
// Exit codes: 0 success, 2 argument or domain error, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nospread/io.hpp"
#include "nospread/modes.hpp"
#include "nospread/oracle.hpp"
#include "nospread/packets.hpp"
#include "run_config.hpp"

namespace nospread::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitArgument = 2;
inline constexpr int kExitNumerical = 3;

struct CommandResult {
    std::vector<std::string> outputs;
    json derived_extra = json::object();
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) {
        throw ArgumentError("cannot write '" + path.string() + "'");
    }
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ArgumentError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return dir;
}

inline std::string field_csv_text(const Field& field, const std::vector<std::pair<std::string, std::string>>& comments) {
    std::ostringstream os;
    write_field_csv(os, field, comments);
    return os.str();
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
inline double unit_uniform(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

} // namespace detail

inline CommandResult cmd_mode_eval(const RunConfig& c, const std::filesystem::path& dir) {
    c.params.validate();
    const Mode mode = Mode::bounded(c.params, c.mode.q, c.mode.c1, c.mode.c2, c.mode.c3);
    const auto k = axial_wavenumbers(c.params, mode.q);
    Field field(c.z, c.r, c.time, c.params);
    for (std::size_t i = 0; i < c.z.n; ++i) {
        for (std::size_t j = 0; j < c.r.n; ++j) {
            field.at(i, j) = eval_mode(c.params, mode, c.z.at(i), c.r.at(j), c.time);
        }
    }
    detail::write_text(dir / "mode.csv",
                       detail::field_csv_text(field, {{"q", format_double(mode.q)},
                                                      {"k_plus", format_double(k.k_plus)},
                                                      {"k_minus", format_double(k.k_minus)}}));
    CommandResult r;
    r.outputs = {"mode.csv"};
    r.derived_extra["mode_wavenumbers"] = {{"q", mode.q}, {"k_plus", k.k_plus}, {"k_minus", k.k_minus}};
    return r;
}

inline CommandResult cmd_packet_field(const RunConfig& c, const std::filesystem::path& dir) {
    const Field field = eval_packet_grid(c.params, c.weights.build(), c.n_nodes, c.z, c.r, c.time);
    detail::write_text(dir / "field.csv", detail::field_csv_text(field, {{"n_nodes", std::to_string(c.n_nodes)}}));
    CommandResult r;
    r.outputs = {"field.csv"};
    return r;
}

inline std::vector<ProbePoint> residual_probes(const RunConfig& c) {
    c.z.validate("residual z grid");
    c.r.validate("residual r grid");
    const double h = c.residual.step;
    std::vector<ProbePoint> probes;
    for (std::size_t i = 0; i < c.z.n; ++i) {
        for (std::size_t j = 0; j < c.r.n; ++j) {
            const double r = c.r.at(j);
            if (r == 0.0 || r >= 2.0 * h) {
                probes.push_back({c.z.at(i), r});
            }
        }
    }
    if (c.residual.random_probes > 0) {
        if (!(c.r.hi > 2.0 * h)) {
            throw ArgumentError("residual: r grid too short for random probes off the axis");
        }
        std::mt19937_64 gen(c.seed);
        for (std::size_t k = 0; k < c.residual.random_probes; ++k) {
            const double z = c.z.lo + (c.z.hi - c.z.lo) * detail::unit_uniform(gen);
            const double r = 2.0 * h + (c.r.hi - 2.0 * h) * detail::unit_uniform(gen);
            probes.push_back({z, r});
        }
    }
    if (probes.empty()) {
        throw ArgumentError("residual: no usable probe points");
    }
    return probes;
}

inline CommandResult cmd_residual(const RunConfig& c, const std::filesystem::path& dir) {
    c.params.validate();
    if (!(c.residual.step > 0.0)) {
        throw ArgumentError("residual: step must be positive");
    }
    const auto probes = residual_probes(c);
    const double h = c.residual.step;
    auto run = [&](double step) {
        const GridStep g{step, step, step};
        const auto& target = c.residual.target;
        if (target == "packet") {
            const Packet packet(c.params, c.weights.build(), c.n_nodes);
            return schrodinger_residual(packet, probes, c.params, c.time, g);
        }
        Mode mode;
        if (target == "mode") {
            mode = Mode::bounded(c.params, c.mode.q, c.mode.c1, c.mode.c2, c.mode.c3);
        } else if (target == "plane-wave") {
            mode = Mode::bounded(c.params, 0.0, 0.0, 1.0, 1.0);
        } else {
            throw ArgumentError("residual.target must be packet, mode or plane-wave; got '" + target + "'");
        }
        auto sampler = [&](double z, double r, double t) { return eval_mode(c.params, mode, z, r, t); };
        return schrodinger_residual(sampler, probes, c.params, c.time, g);
    };
    const auto full = run(h);
    const auto half = run(h / 2.0);
    json out;
    out["target"] = c.residual.target;
    out["time"] = c.time;
    out["probe_count"] = probes.size();
    out["report"] = residual_json(full);
    out["report_half"] = residual_json(half);
    out["relative_max"] = full.relative_max();
    out["relative_max_half"] = half.relative_max();
    const double ratio = half.max_abs > 0.0 ? full.max_abs / half.max_abs : 0.0;
    out["ratio"] = ratio;
    out["observed_order"] = ratio > 0.0 ? std::log2(ratio) : 0.0;
    detail::write_text(dir / "residual.json", to_json_text(out));
    CommandResult r;
    r.outputs = {"residual.json"};
    return r;
}

inline NormMeasure parse_measure(const std::string& name) {
    if (name == "inverse-q") {
        return NormMeasure::InverseQ;
    }
    if (name == "closure") {
        return NormMeasure::Closure;
    }
    throw ArgumentError("norm_scan.measure must be inverse-q or closure; got '" + name + "'");
}

inline CommandResult cmd_norm_scan(const RunConfig& c, const std::filesystem::path& dir) {
    const auto measure = parse_measure(c.norm_scan.measure);
    const auto result =
        norm_scan(c.params, c.weights.build(), c.norm_scan.half_lengths, c.norm_scan.n_q, c.norm_scan.n_z, measure);
    std::ostringstream csv;
    csv << "# nospread norm-scan\n";
    csv << "# measure = " << c.norm_scan.measure << '\n';
    csv << "# n_q = " << c.norm_scan.n_q << '\n';
    csv << "# n_z = " << c.norm_scan.n_z << '\n';
    csv << "Z,N\n";
    for (std::size_t i = 0; i < result.norms.size(); ++i) {
        csv << format_double(result.half_lengths[i]) << ',' << format_double(result.norms[i]) << '\n';
    }
    detail::write_text(dir / "norm_scan.csv", csv.str());
    json fit = {{"slope", result.slope},
                {"intercept", result.intercept},
                {"r_squared", result.r_squared},
                {"measure", c.norm_scan.measure}};
    detail::write_text(dir / "norm_fit.json", to_json_text(fit));
    CommandResult r;
    r.outputs = {"norm_scan.csv", "norm_fit.json"};
    return r;
}

inline CommandResult cmd_propagate_compare(const RunConfig& c, const std::filesystem::path& dir) {
    c.params.validate();
    const auto& p = c.propagator;
    if (!(p.t_final >= 0.0) || !std::isfinite(p.t_final)) {
        throw ArgumentError("propagator.t_final must be >= 0");
    }
    const Packet packet(c.params, c.weights.build(), c.n_nodes);
    PropagatorConfig config;
    config.pad_fraction = p.pad_fraction;
    config.steps = 0;
    if (p.t_final > 0.0) {
        p.box_z.validate("propagator box_z");
        p.box_r.validate("propagator box_r");
        const double h = std::min(p.box_z.step(), p.box_r.step());
        const double dt0 = p.dt > 0.0 ? p.dt : h * h * c.params.mass / c.params.hbar;
        config.steps = static_cast<std::size_t>(std::max<long long>(1, std::llround(p.t_final / dt0)));
        config.dt = p.t_final / static_cast<double>(config.steps);
    }
    const auto cmp = compare_dispersionless(packet, p.box_z, p.box_r, config);
    const auto g = gaussian_spreading(c.gaussian.sigma0, c.params, c.gaussian.t, c.gaussian.half_box, c.gaussian.dz,
                                      c.gaussian.dt);
    json out;
    out["overlap_dispersionless"] = std::abs(cmp.overlap);
    out["overlap_re"] = cmp.overlap.real();
    out["overlap_im"] = cmp.overlap.imag();
    out["norm_initial"] = cmp.norm_initial;
    out["norm_final"] = cmp.norm_final;
    out["norm_drift"] = cmp.norm_drift;
    out["trapezoid_norm_drift"] = cmp.trapezoid_drift;
    out["elapsed"] = cmp.elapsed;
    out["steps"] = config.steps;
    out["dt"] = config.dt;
    out["axis_slope"] = axis_slope(cmp.propagated);
    out["gaussian_width_measured"] = g.width_measured;
    out["gaussian_width_predicted"] = g.width_predicted;
    out["gaussian_width_ratio"] = g.width_measured / g.width_predicted;
    detail::write_text(dir / "propagate_compare.json", to_json_text(out));
    CommandResult r;
    r.outputs = {"propagate_compare.json"};
    return r;
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        parts.push_back(item);
    }
    return parts;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ArgumentError(what + ": '" + s + "' is not a number");
    }
}

inline cplx parse_complex(const std::string& s, const std::string& what) {
    const auto parts = split(s, ',');
    if (parts.size() == 1) {
        return {parse_double(parts[0], what), 0.0};
    }
    if (parts.size() == 2) {
        return {parse_double(parts[0], what), parse_double(parts[1], what)};
    }
    throw ArgumentError(what + ": expected 're' or 're,im'");
}

inline UniformGrid parse_grid(const std::string& s, const std::string& what) {
    const auto parts = split(s, ',');
    if (parts.size() != 3) {
        throw ArgumentError(what + ": expected 'lo,hi,n'");
    }
    const double n = parse_double(parts[2], what);
    if (!(n >= 1.0) || n != std::floor(n)) {
        throw ArgumentError(what + ": n must be a positive integer");
    }
    UniformGrid g{parse_double(parts[0], what), parse_double(parts[1], what), static_cast<std::size_t>(n)};
    g.validate(what.c_str());
    return g;
}

} // namespace detail

struct Overrides {
    std::string config_path;
    std::optional<std::string> out;
    std::optional<double> mass, speed, hbar, time;
    std::optional<std::size_t> nodes;
    std::optional<std::uint64_t> seed;
    // weights
    std::optional<std::string> amp_a, amp_b, weights_table;
    std::optional<double> exponent, decay;
    // grids
    std::optional<std::string> z_grid, r_grid;
    // mode-eval
    std::optional<double> q;
    std::optional<std::string> c1, c2, c3;
    // residual
    std::optional<std::string> target;
    std::optional<double> step;
    std::optional<std::size_t> random_probes;
    // norm-scan
    std::optional<std::string> half_lengths, measure;
    std::optional<std::size_t> n_q, n_z;
    // propagate-compare
    std::optional<double> t_final, dt, pad, sigma0, gaussian_t;
    std::optional<std::string> box_z, box_r;
};

inline void apply_overrides(RunConfig& c, const Overrides& o) {
    if (o.out) c.output_dir = *o.out;
    if (o.mass) c.params.mass = *o.mass;
    if (o.speed) c.params.speed = *o.speed;
    if (o.hbar) c.params.hbar = *o.hbar;
    if (o.time) c.time = *o.time;
    if (o.nodes) c.n_nodes = *o.nodes;
    if (o.seed) c.seed = *o.seed;
    if (o.amp_a) c.weights.amp_a = detail::parse_complex(*o.amp_a, "--amp-a");
    if (o.amp_b) c.weights.amp_b = detail::parse_complex(*o.amp_b, "--amp-b");
    if (o.exponent) c.weights.exponent = *o.exponent;
    if (o.decay) c.weights.decay = *o.decay;
    if (o.weights_table) {
        c.weights.preset = "table";
        c.weights.table = *o.weights_table;
    }
    if (o.z_grid) c.z = detail::parse_grid(*o.z_grid, "--z-grid");
    if (o.r_grid) c.r = detail::parse_grid(*o.r_grid, "--r-grid");
    if (o.q) c.mode.q = *o.q;
    if (o.c1) c.mode.c1 = detail::parse_complex(*o.c1, "--c1");
    if (o.c2) c.mode.c2 = detail::parse_complex(*o.c2, "--c2");
    if (o.c3) c.mode.c3 = detail::parse_complex(*o.c3, "--c3");
    if (o.target) c.residual.target = *o.target;
    if (o.step) c.residual.step = *o.step;
    if (o.random_probes) c.residual.random_probes = *o.random_probes;
    if (o.half_lengths) {
        c.norm_scan.half_lengths.clear();
        for (const auto& s : detail::split(*o.half_lengths, ',')) {
            c.norm_scan.half_lengths.push_back(detail::parse_double(s, "--Z"));
        }
    }
    if (o.measure) c.norm_scan.measure = *o.measure;
    if (o.n_q) c.norm_scan.n_q = *o.n_q;
    if (o.n_z) c.norm_scan.n_z = *o.n_z;
    if (o.t_final) c.propagator.t_final = *o.t_final;
    if (o.dt) c.propagator.dt = *o.dt;
    if (o.pad) c.propagator.pad_fraction = *o.pad;
    if (o.box_z) c.propagator.box_z = detail::parse_grid(*o.box_z, "--box-z");
    if (o.box_r) c.propagator.box_r = detail::parse_grid(*o.box_r, "--box-r");
    if (o.sigma0) c.gaussian.sigma0 = *o.sigma0;
    if (o.gaussian_t) c.gaussian.t = *o.gaussian_t;
}

/// Runs one subcommand in-process; returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"nospread: dispersionless cylindrical wave packets of the free Schrodinger equation"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config_path, "JSON config or manifest to start from");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--mass", o.mass, "particle mass m");
    app.add_option("--speed", o.speed, "phase velocity v");
    app.add_option("--hbar", o.hbar, "Planck constant hbar");
    app.add_option("--nodes", o.nodes, "spectral quadrature nodes");
    app.add_option("--seed", o.seed, "seed for randomized probes");

    auto add_weights = [&](CLI::App* sub) {
        sub->add_option("--amp-a", o.amp_a, "A amplitude 're' or 're,im'");
        sub->add_option("--amp-b", o.amp_b, "B amplitude 're' or 're,im'");
        sub->add_option("--exponent", o.exponent, "power s of q^s e^{-beta q}");
        sub->add_option("--decay", o.decay, "beta of q^s e^{-beta q}");
        sub->add_option("--weights-table", o.weights_table, "tabulated weights file");
    };
    auto add_grids = [&](CLI::App* sub) {
        sub->add_option("--z-grid", o.z_grid, "z sampling 'lo,hi,n'");
        sub->add_option("--r-grid", o.r_grid, "r sampling '0,hi,n'");
        sub->add_option("--t", o.time, "time t");
    };

    auto* mode_eval = app.add_subcommand("mode-eval", "sample one bounded mode R(r) f(z - v t)");
    add_grids(mode_eval);
    mode_eval->add_option("--q", o.q, "separation constant q");
    mode_eval->add_option("--c1", o.c1, "C1 're,im'");
    mode_eval->add_option("--c2", o.c2, "C2 're,im'");
    mode_eval->add_option("--c3", o.c3, "C3 're,im'");

    auto* packet_field = app.add_subcommand("packet-field", "sample a packet on a (z, r) grid");
    add_grids(packet_field);
    add_weights(packet_field);

    auto* residual = app.add_subcommand("residual", "finite-difference Schrodinger residual");
    add_grids(residual);
    add_weights(residual);
    residual->add_option("--target", o.target, "packet | mode | plane-wave");
    residual->add_option("--step", o.step, "stencil step (dz = dr = dt)");
    residual->add_option("--random-probes", o.random_probes, "extra random probe points");
    residual->add_option("--q", o.q, "mode q (target = mode)");
    residual->add_option("--c1", o.c1, "C1 're,im'");
    residual->add_option("--c2", o.c2, "C2 're,im'");
    residual->add_option("--c3", o.c3, "C3 're,im'");

    auto* scan = app.add_subcommand("norm-scan", "window norms N(Z) and their linear fit");
    add_weights(scan);
    scan->add_option("--Z", o.half_lengths, "comma-separated half-lengths");
    scan->add_option("--measure", o.measure, "inverse-q | closure");
    scan->add_option("--nq", o.n_q, "q quadrature nodes");
    scan->add_option("--nz", o.n_z, "z quadrature nodes");

    auto* compare = app.add_subcommand("propagate-compare", "Crank-Nicolson check of rigid translation vs Gaussian spreading");
    add_weights(compare);
    compare->add_option("--t-final", o.t_final, "propagation time");
    compare->add_option("--dt", o.dt, "time step (default min(dz, dr)^2 m / hbar)");
    compare->add_option("--pad", o.pad, "buffer fraction");
    compare->add_option("--box-z", o.box_z, "box z grid 'lo,hi,n'");
    compare->add_option("--box-r", o.box_r, "box r grid '0,hi,n'");
    compare->add_option("--sigma0", o.sigma0, "Gaussian initial width");
    compare->add_option("--gaussian-t", o.gaussian_t, "Gaussian comparison time");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitArgument;
    }

    try {
        RunConfig config;
        if (!o.config_path.empty()) {
            load_config_file(config, o.config_path);
        }
        apply_overrides(config, o);

        std::string name;
        CommandResult (*command)(const RunConfig&, const std::filesystem::path&) = nullptr;
        if (mode_eval->parsed()) {
            name = "mode-eval";
            command = cmd_mode_eval;
        } else if (packet_field->parsed()) {
            name = "packet-field";
            command = cmd_packet_field;
        } else if (residual->parsed()) {
            name = "residual";
            command = cmd_residual;
        } else if (scan->parsed()) {
            name = "norm-scan";
            command = cmd_norm_scan;
        } else {
            name = "propagate-compare";
            command = cmd_propagate_compare;
        }
        const auto dir = detail::prepare_dir(config.output_dir);
        CommandResult result = command(config, dir);

        json derived = derived_constants(config.params);
        for (const auto& item : result.derived_extra.items()) {
            derived[item.key()] = item.value();
        }
        json manifest;
        manifest["program"] = "nospread";
        manifest["command"] = name;
        manifest["config"] = config_json(config);
        manifest["derived"] = derived;
        manifest["outputs"] = result.outputs;
        detail::write_text(dir / "manifest.json", to_json_text(manifest));
        out << name << ": wrote";
        for (const auto& f : result.outputs) {
            out << ' ' << (dir / f).string();
        }
        out << ' ' << (dir / "manifest.json").string() << '\n';
        return kExitOk;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitArgument;
    } catch (const ConfigurationError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace nospread::cli
