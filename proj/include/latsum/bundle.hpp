#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "latsum/canonical.hpp"
#include "latsum/errors.hpp"
#include "latsum/lattice.hpp"
#include "latsum/project.hpp"

namespace latsum {

// Canonical tensor interchange file, the only format commands exchange:
//   8-byte magic "LATSUMB1",
//   int64 dims[3], int64 rank,
//   double h, double origin[3]   (midpoint of cell (0,0,0)),
//   rank doubles of weights,
//   per axis dims[l] * rank doubles, column-major.
// All numbers little-endian IEEE doubles / two's-complement int64.
struct TensorBundle {
    CanonicalTensor3 tensor;
    double h = 0.0;
    std::array<double, 3> origin{0.0, 0.0, 0.0};
};

inline constexpr char bundle_magic[8] = {'L', 'A', 'T', 'S', 'U', 'M', 'B', '1'};

inline void save_bundle(const std::string& path, const TensorBundle& bundle) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("bundle: cannot open '" + path + "' for writing");
    out.write(bundle_magic, sizeof(bundle_magic));
    const Dims3 dims = bundle.tensor.dims();
    std::array<std::int64_t, 4> header{dims[0], dims[1], dims[2], bundle.tensor.rank()};
    out.write(reinterpret_cast<const char*>(header.data()), sizeof(header));
    std::array<double, 4> geom{bundle.h, bundle.origin[0], bundle.origin[1], bundle.origin[2]};
    out.write(reinterpret_cast<const char*>(geom.data()), sizeof(geom));
    const Vector& w = bundle.tensor.weights();
    if (w.size() > 0)
        out.write(reinterpret_cast<const char*>(w.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(w.size())));
    for (int l = 0; l < 3; ++l) {
        const Matrix& f = bundle.tensor.factor(l);
        if (f.size() > 0)
            out.write(reinterpret_cast<const char*>(f.data()),
                      static_cast<std::streamsize>(sizeof(double) *
                                                   static_cast<std::size_t>(f.size())));
    }
    if (!out) throw validation_error("bundle: write to '" + path + "' failed");
}

inline TensorBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("bundle: cannot open '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::string(magic, 8) != std::string(bundle_magic, 8))
        throw validation_error("bundle: '" + path + "' is not a tensor bundle");
    std::array<std::int64_t, 4> header{};
    in.read(reinterpret_cast<char*>(header.data()), sizeof(header));
    std::array<double, 4> geom{};
    in.read(reinterpret_cast<char*>(geom.data()), sizeof(geom));
    if (!in) throw validation_error("bundle: '" + path + "' is truncated");
    const Dims3 dims{static_cast<Index>(header[0]), static_cast<Index>(header[1]),
                     static_cast<Index>(header[2])};
    const Index rank = static_cast<Index>(header[3]);
    for (int l = 0; l < 3; ++l)
        if (dims[static_cast<std::size_t>(l)] < 1)
            throw validation_error("bundle: '" + path + "' has a non-positive dimension");
    if (rank < 0) throw validation_error("bundle: '" + path + "' has negative rank");

    TensorBundle bundle;
    bundle.h = geom[0];
    bundle.origin = {geom[1], geom[2], geom[3]};
    Vector weights(rank);
    if (rank > 0)
        in.read(reinterpret_cast<char*>(weights.data()),
                static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rank)));
    std::array<Matrix, 3> factors;
    for (int l = 0; l < 3; ++l) {
        factors[l].resize(dims[static_cast<std::size_t>(l)], rank);
        if (factors[l].size() > 0)
            in.read(reinterpret_cast<char*>(factors[l].data()),
                    static_cast<std::streamsize>(sizeof(double) *
                                                 static_cast<std::size_t>(factors[l].size())));
    }
    if (!in) throw validation_error("bundle: '" + path + "' is truncated");
    bundle.tensor = CanonicalTensor3(std::move(factors), std::move(weights));
    return bundle;
}

// Shortest decimal form that round-trips the double exactly, for bit-stable
// CSV output.
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        return pos == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

// Rows of exactly `width` numeric fields; an optional first header row is
// skipped, blank lines ignored.
inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, int width) {
    std::ifstream in(path);
    if (!in) throw validation_error("csv: cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
        if (trimmed.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        std::vector<double> row;
        bool numeric = true;
        for (const std::string& f : fields) {
            double v;
            if (!parse_double(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && lineno == 1) continue;  // header row
            throw validation_error("csv: '" + path + "' line " + std::to_string(lineno) +
                                   " is not numeric");
        }
        if (static_cast<int>(row.size()) != width)
            throw validation_error("csv: '" + path + "' line " + std::to_string(lineno) + " has " +
                                   std::to_string(row.size()) + " fields, expected " +
                                   std::to_string(width));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

// Charges CSV: one `x,y,z,Z` row per nucleus, atomic units, optional header.
inline std::vector<Charge> read_charges_csv(const std::string& path) {
    std::vector<Charge> out;
    for (const std::vector<double>& row : detail::read_numeric_csv(path, 4))
        out.push_back(Charge{{row[0], row[1], row[2]}, row[3]});
    if (out.empty()) throw validation_error("csv: '" + path + "' contains no charges");
    return out;
}

// Basis CSV: one `cx,cy,cz,sigma` row per Gaussian, optional header.
inline std::vector<GaussianBasisSpec> read_basis_csv(const std::string& path) {
    std::vector<GaussianBasisSpec> out;
    for (const std::vector<double>& row : detail::read_numeric_csv(path, 4))
        out.push_back(GaussianBasisSpec{{row[0], row[1], row[2]}, row[3]});
    if (out.empty()) throw validation_error("csv: '" + path + "' contains no basis functions");
    return out;
}

} // namespace latsum
