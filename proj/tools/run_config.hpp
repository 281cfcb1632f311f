#pragma once

// RunConfig: everything a CLI run depends on, as one JSON document.
// Precedence is flags > config file > defaults. Manifests written by a run
// embed the effective config under "config" and can be fed back via --config.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nospread/errors.hpp"
#include "nospread/io.hpp"
#include "nospread/modes.hpp"
#include "nospread/oracle.hpp"
#include "nospread/packets.hpp"

namespace nospread::cli {

using json = nlohmann::json;

struct WeightsSpec {
    std::string preset = "power-exp"; ///< "power-exp" or "table"
    cplx amp_a{1.0, 0.0};
    cplx amp_b{0.0, 0.0};
    double exponent = 1.0;
    double decay = 2.0;
    std::string table; ///< path, used when preset == "table"

    [[nodiscard]] SpectralWeights build() const {
        if (preset == "power-exp") {
            return SpectralWeights(PowerExp{amp_a, amp_b, exponent, decay});
        }
        if (preset == "table") {
            return SpectralWeights(load_weights_table(table));
        }
        throw ArgumentError("weights.preset must be 'power-exp' or 'table', got '" + preset + "'");
    }
};

struct ModeSpec {
    double q = 0.5;
    cplx c1{1.0, 0.0};
    cplx c2{0.0, 0.0};
    cplx c3{1.0, 0.0};
};

struct ResidualSpec {
    std::string target = "packet"; ///< packet | mode | plane-wave
    double step = 0.05;            ///< dz = dr = dt
    std::size_t random_probes = 0;
};

struct NormScanSpec {
    std::vector<double> half_lengths{50.0, 100.0, 150.0, 200.0, 300.0, 400.0};
    std::string measure = "inverse-q"; ///< inverse-q | closure
    std::size_t n_q = 512;
    std::size_t n_z = 2048;
};

struct PropagatorSpec {
    double t_final = 1.0;
    double dt = 0.0; ///< 0 = min(dz, dr)^2 m / hbar
    double pad_fraction = 0.2;
    UniformGrid box_z{-30.0, 30.0, 601};
    UniformGrid box_r{0.0, 30.0, 301};
};

struct GaussianSpec {
    double sigma0 = 1.0;
    double t = 2.0;
    double half_box = 20.0;
    double dz = 0.02;
    double dt = 0.002;
};

struct RunConfig {
    PhysicalParams params;
    WeightsSpec weights;
    UniformGrid z{-10.0, 10.0, 201};
    UniformGrid r{0.0, 10.0, 101};
    std::size_t n_nodes = 128;
    double time = 0.0;
    ModeSpec mode;
    ResidualSpec residual;
    NormScanSpec norm_scan;
    PropagatorSpec propagator;
    GaussianSpec gaussian;
    std::string output_dir = "nospread-out";
    std::uint64_t seed = 20240917;
};

// ---------------------------------------------------------------------------
// JSON mapping
// ---------------------------------------------------------------------------

inline json to_json_complex(cplx c) { return json::array({c.real(), c.imag()}); }

inline cplx complex_from(const json& j, const char* key) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (!j.is_array() || j.size() != 2) {
        throw ArgumentError(std::string("config: ") + key + " must be a number or [re, im]");
    }
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json grid_json(const UniformGrid& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"n", g.n}}; }

inline UniformGrid grid_from(const json& j, UniformGrid fallback) {
    fallback.lo = j.value("lo", fallback.lo);
    fallback.hi = j.value("hi", fallback.hi);
    fallback.n = j.value("n", fallback.n);
    return fallback;
}

/// Full config as JSON. output_dir is left out: it says where results go, not what they are.
inline json config_json(const RunConfig& c) {
    json j;
    j["params"] = {{"mass", c.params.mass}, {"speed", c.params.speed}, {"hbar", c.params.hbar}};
    j["weights"] = {{"preset", c.weights.preset},
                    {"amp_a", to_json_complex(c.weights.amp_a)},
                    {"amp_b", to_json_complex(c.weights.amp_b)},
                    {"exponent", c.weights.exponent},
                    {"decay", c.weights.decay},
                    {"table", c.weights.table}};
    j["grids"] = {{"z", grid_json(c.z)}, {"r", grid_json(c.r)}};
    j["quadrature"] = {{"n_nodes", c.n_nodes}};
    j["time"] = c.time;
    j["mode"] = {{"q", c.mode.q},
                 {"c1", to_json_complex(c.mode.c1)},
                 {"c2", to_json_complex(c.mode.c2)},
                 {"c3", to_json_complex(c.mode.c3)}};
    j["residual"] = {{"target", c.residual.target}, {"step", c.residual.step}, {"random_probes", c.residual.random_probes}};
    j["norm_scan"] = {{"half_lengths", c.norm_scan.half_lengths},
                      {"measure", c.norm_scan.measure},
                      {"n_q", c.norm_scan.n_q},
                      {"n_z", c.norm_scan.n_z}};
    j["propagator"] = {{"t_final", c.propagator.t_final},
                       {"dt", c.propagator.dt},
                       {"pad_fraction", c.propagator.pad_fraction},
                       {"boundary", "dirichlet-padded"},
                       {"box_z", grid_json(c.propagator.box_z)},
                       {"box_r", grid_json(c.propagator.box_r)}};
    j["gaussian"] = {{"sigma0", c.gaussian.sigma0},
                     {"t", c.gaussian.t},
                     {"half_box", c.gaussian.half_box},
                     {"dz", c.gaussian.dz},
                     {"dt", c.gaussian.dt}};
    j["seed"] = c.seed;
    return j;
}

/// Overlays a config (or a manifest holding one under "config") onto `c`.
inline void apply_config_json(RunConfig& c, const json& doc) {
    const json& j = doc.contains("config") && doc["config"].is_object() ? doc["config"] : doc;
    if (!j.is_object()) {
        throw ArgumentError("config: top level must be a JSON object");
    }
    static const char* known[] = {"params",   "weights",   "grids",      "quadrature", "time",       "mode",
                                  "residual", "norm_scan", "propagator", "gaussian",   "output_dir", "seed"};
    for (const auto& item : j.items()) {
        if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
            throw ArgumentError("config: unknown key '" + item.key() + "'");
        }
    }
    if (j.contains("params")) {
        const auto& p = j["params"];
        c.params.mass = p.value("mass", c.params.mass);
        c.params.speed = p.value("speed", c.params.speed);
        c.params.hbar = p.value("hbar", c.params.hbar);
    }
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        c.weights.preset = w.value("preset", c.weights.preset);
        if (w.contains("amp_a")) c.weights.amp_a = complex_from(w["amp_a"], "weights.amp_a");
        if (w.contains("amp_b")) c.weights.amp_b = complex_from(w["amp_b"], "weights.amp_b");
        c.weights.exponent = w.value("exponent", c.weights.exponent);
        c.weights.decay = w.value("decay", c.weights.decay);
        c.weights.table = w.value("table", c.weights.table);
    }
    if (j.contains("grids")) {
        const auto& g = j["grids"];
        if (g.contains("z")) c.z = grid_from(g["z"], c.z);
        if (g.contains("r")) c.r = grid_from(g["r"], c.r);
    }
    if (j.contains("quadrature")) {
        c.n_nodes = j["quadrature"].value("n_nodes", c.n_nodes);
    }
    c.time = j.value("time", c.time);
    if (j.contains("mode")) {
        const auto& m = j["mode"];
        c.mode.q = m.value("q", c.mode.q);
        if (m.contains("c1")) c.mode.c1 = complex_from(m["c1"], "mode.c1");
        if (m.contains("c2")) c.mode.c2 = complex_from(m["c2"], "mode.c2");
        if (m.contains("c3")) c.mode.c3 = complex_from(m["c3"], "mode.c3");
    }
    if (j.contains("residual")) {
        const auto& r = j["residual"];
        c.residual.target = r.value("target", c.residual.target);
        c.residual.step = r.value("step", c.residual.step);
        c.residual.random_probes = r.value("random_probes", c.residual.random_probes);
    }
    if (j.contains("norm_scan")) {
        const auto& n = j["norm_scan"];
        if (n.contains("half_lengths")) c.norm_scan.half_lengths = n["half_lengths"].get<std::vector<double>>();
        c.norm_scan.measure = n.value("measure", c.norm_scan.measure);
        c.norm_scan.n_q = n.value("n_q", c.norm_scan.n_q);
        c.norm_scan.n_z = n.value("n_z", c.norm_scan.n_z);
    }
    if (j.contains("propagator")) {
        const auto& p = j["propagator"];
        c.propagator.t_final = p.value("t_final", c.propagator.t_final);
        c.propagator.dt = p.value("dt", c.propagator.dt);
        c.propagator.pad_fraction = p.value("pad_fraction", c.propagator.pad_fraction);
        if (p.value("boundary", std::string("dirichlet-padded")) != "dirichlet-padded") {
            throw ArgumentError("config: propagator.boundary must be 'dirichlet-padded'");
        }
        if (p.contains("box_z")) c.propagator.box_z = grid_from(p["box_z"], c.propagator.box_z);
        if (p.contains("box_r")) c.propagator.box_r = grid_from(p["box_r"], c.propagator.box_r);
    }
    if (j.contains("gaussian")) {
        const auto& g = j["gaussian"];
        c.gaussian.sigma0 = g.value("sigma0", c.gaussian.sigma0);
        c.gaussian.t = g.value("t", c.gaussian.t);
        c.gaussian.half_box = g.value("half_box", c.gaussian.half_box);
        c.gaussian.dz = g.value("dz", c.gaussian.dz);
        c.gaussian.dt = g.value("dt", c.gaussian.dt);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.seed = j.value("seed", c.seed);
}

inline void load_config_file(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open config '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ArgumentError("config '" + path + "': " + e.what());
    }
    apply_config_json(c, doc);
}

// ---------------------------------------------------------------------------
// Output: JSON with 17 significant digits and sorted keys
// ---------------------------------------------------------------------------

namespace detail {

inline void write_json_value(std::ostream& os, const json& j, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (const auto& item : j.items()) {
                if (!first) os << ",\n";
                first = false;
                os << inner << json(item.key()).dump() << ": ";
                write_json_value(os, item.value(), indent + 1);
            }
            os << '\n' << pad << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) os << ", ";
                first = false;
                write_json_value(os, v, indent + 1);
            }
            os << ']';
            return;
        }
        case json::value_t::number_float: {
            const double x = j.get<double>();
            if (!std::isfinite(x)) {
                os << "null";
            } else {
                os << format_double(x);
            }
            return;
        }
        default:
            os << j.dump();
            return;
    }
}

} // namespace detail

inline std::string to_json_text(const json& j) {
    std::ostringstream os;
    detail::write_json_value(os, j, 0);
    os << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

inline json residual_json(const ResidualReport& r) {
    return {{"max_abs", r.max_abs},
            {"rms", r.rms},
            {"scale", r.scale},
            {"grid_step", {{"dz", r.grid_step.dz}, {"dr", r.grid_step.dr}, {"dt", r.grid_step.dt}}}};
}

inline ResidualReport residual_from_json(const json& j) {
    ResidualReport r;
    r.max_abs = j.at("max_abs").get<double>();
    r.rms = j.at("rms").get<double>();
    r.scale = j.at("scale").get<double>();
    const auto& g = j.at("grid_step");
    r.grid_step = {g.at("dz").get<double>(), g.at("dr").get<double>(), g.at("dt").get<double>()};
    return r;
}

/// q_max plus k+- on nine equally spaced q in [0, q_max].
inline json derived_constants(const PhysicalParams& params) {
    json table = json::array();
    const double q_max = params.q_max();
    const int rows = q_max > 0.0 ? 9 : 1;
    for (int i = 0; i < rows; ++i) {
        const double q = i + 1 == rows ? q_max : q_max * i / (rows - 1);
        const auto k = axial_wavenumbers(params, q);
        table.push_back({{"q", q}, {"k_plus", k.k_plus}, {"k_minus", k.k_minus}});
    }
    return {{"q_max", q_max}, {"k_table", table}};
}

} // namespace nospread::cli
