#pragma once

// Plain-text formats:
//   spectral weight tables   "# q  Re(A)  Im(A)  Re(B)  Im(B)" then whitespace-separated rows
//   field dumps              '#' comment lines, then "z,r,re,im,abs2" rows, z-major
// Every float is written with 17 significant digits so files round-trip exactly.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nospread/errors.hpp"
#include "nospread/packets.hpp"

namespace nospread {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// strtod with a full-consumption check. Subnormal results (ERANGE on underflow) are accepted.
inline double parse_number(const std::string& text, const std::string& what) {
    const auto first = text.find_first_not_of(" \t\r");
    const auto last = text.find_last_not_of(" \t\r");
    if (first == std::string::npos) {
        throw ArgumentError(what + ": empty number");
    }
    const std::string s = text.substr(first, last - first + 1);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw ArgumentError(what + ": '" + s + "' is not a number");
    }
    if (errno == ERANGE && std::abs(v) > 1.0) {
        throw ArgumentError(what + ": '" + s + "' overflows");
    }
    return v;
}

inline constexpr const char* kWeightsHeader = "# q  Re(A)  Im(A)  Re(B)  Im(B)";

inline void save_weights_table(std::ostream& os, const Tabulated& table) {
    os << kWeightsHeader << '\n';
    for (std::size_t i = 0; i < table.q.size(); ++i) {
        os << format_double(table.q[i]) << ' ' << format_double(table.a[i].real()) << ' '
           << format_double(table.a[i].imag()) << ' ' << format_double(table.b[i].real()) << ' '
           << format_double(table.b[i].imag()) << '\n';
    }
}

/// Tabulates any weights on `rows` equally spaced q in [0, q_max].
inline Tabulated tabulate_weights(const SpectralWeights& weights, const PhysicalParams& params, std::size_t rows) {
    if (rows < 2) {
        throw ArgumentError("tabulate_weights: need at least 2 rows");
    }
    const double q_max = params.q_max();
    if (!(q_max > 0.0)) {
        throw DegenerateSpectrumError("tabulate_weights: q_max = 0");
    }
    Tabulated t;
    for (std::size_t i = 0; i < rows; ++i) {
        const double q = i + 1 == rows ? q_max : q_max * static_cast<double>(i) / static_cast<double>(rows - 1);
        t.q.push_back(q);
        t.a.push_back(weights.a(q));
        t.b.push_back(weights.b(q));
    }
    return t;
}

inline Tabulated load_weights_table(std::istream& is) {
    Tabulated t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream row(line);
        std::vector<std::string> words;
        for (std::string w; row >> w;) {
            words.push_back(w);
        }
        const std::string where = "weights table line " + std::to_string(lineno);
        if (words.size() != 5) {
            throw ArgumentError(where + ": expected 5 numbers, got " + std::to_string(words.size()));
        }
        const double q = parse_number(words[0], where);
        const double ar = parse_number(words[1], where);
        const double ai = parse_number(words[2], where);
        const double br = parse_number(words[3], where);
        const double bi = parse_number(words[4], where);
        t.q.push_back(q);
        t.a.emplace_back(ar, ai);
        t.b.emplace_back(br, bi);
    }
    // Validates ascending q and row count.
    SpectralWeights check(t);
    return t;
}

inline Tabulated load_weights_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ArgumentError("cannot open weights table '" + path + "'");
    }
    return load_weights_table(in);
}

/// Writes the field as CSV; `comments` become "# key = value" lines ahead of the column header.
inline void write_field_csv(std::ostream& os, const Field& field,
                            const std::vector<std::pair<std::string, std::string>>& comments = {}) {
    os << "# nospread field\n";
    os << "# time = " << format_double(field.time) << '\n';
    os << "# z_grid = " << format_double(field.z.lo) << ' ' << format_double(field.z.hi) << ' ' << field.z.n << '\n';
    os << "# r_grid = " << format_double(field.r.lo) << ' ' << format_double(field.r.hi) << ' ' << field.r.n << '\n';
    os << "# params = " << format_double(field.params.mass) << ' ' << format_double(field.params.speed) << ' '
       << format_double(field.params.hbar) << '\n';
    for (const auto& [key, value] : comments) {
        os << "# " << key << " = " << value << '\n';
    }
    os << "z,r,re,im,abs2\n";
    for (std::size_t i = 0; i < field.z.n; ++i) {
        for (std::size_t j = 0; j < field.r.n; ++j) {
            const cplx v = field.at(i, j);
            os << format_double(field.z.at(i)) << ',' << format_double(field.r.at(j)) << ','
               << format_double(v.real()) << ',' << format_double(v.imag()) << ',' << format_double(std::norm(v))
               << '\n';
        }
    }
}

/// Reads back a dump made by write_field_csv.
inline Field read_field_csv(std::istream& is) {
    std::map<std::string, std::string> meta;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find(" = ");
            if (eq != std::string::npos) {
                meta[line.substr(2, eq - 2)] = line.substr(eq + 3);
            }
            continue;
        }
        if (line == "z,r,re,im,abs2") {
            header_seen = true;
            break;
        }
        throw ArgumentError("field csv: unexpected line before column header: '" + line + "'");
    }
    if (!header_seen || !meta.count("z_grid") || !meta.count("r_grid") || !meta.count("time") || !meta.count("params")) {
        throw ArgumentError("field csv: missing header or grid metadata");
    }
    auto grid = [&](const std::string& key) {
        std::istringstream g(meta[key]);
        UniformGrid out;
        if (!(g >> out.lo >> out.hi >> out.n)) {
            throw ArgumentError("field csv: malformed " + key);
        }
        return out;
    };
    PhysicalParams params;
    {
        std::istringstream p(meta["params"]);
        if (!(p >> params.mass >> params.speed >> params.hbar)) {
            throw ArgumentError("field csv: malformed params");
        }
    }
    Field field(grid("z_grid"), grid("r_grid"), parse_number(meta["time"], "field csv time"), params);
    std::size_t count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        if (count >= field.values.size()) {
            throw ArgumentError("field csv: more rows than the grid holds");
        }
        std::istringstream row(line);
        std::string cell[5];
        for (auto& c : cell) {
            if (!std::getline(row, c, ',')) {
                throw ArgumentError("field csv: short row");
            }
        }
        std::string extra;
        if (std::getline(row, extra)) {
            throw ArgumentError("field csv: long row");
        }
        const std::string where = "field csv row " + std::to_string(count + 1);
        const double z = parse_number(cell[0], where);
        const double r = parse_number(cell[1], where);
        const std::size_t i = count / field.r.n;
        const std::size_t j = count % field.r.n;
        if (z != field.z.at(i) || r != field.r.at(j)) {
            throw ArgumentError(where + ": (z, r) does not match the declared grid");
        }
        field.values[count++] = cplx(parse_number(cell[2], where), parse_number(cell[3], where));
    }
    if (count != field.values.size()) {
        throw ArgumentError("field csv: row count does not match grid");
    }
    return field;
}

} // namespace nospread
