#ifndef LFIV_CSV_HPP
#define LFIV_CSV_HPP

// Headered numeric CSV tables: the input format for datasets and the
// output format for every curve and per-replication dump.

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lfiv/data.hpp"

namespace lfiv {

struct Table {
    std::vector<std::string> header;
    MatrixXd values;  // rows x header.size()

    Index column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DimensionMismatch(name, "column '" + name + "' not found");
        return static_cast<Index>(it - header.begin());
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_number(const std::string& s, long row, const std::string& column) {
    if (s == "nan" || s == "NaN" || s == "NA") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("cannot parse '" + s + "' as a number in column " + column + " at row " +
                                            std::to_string(row));
    return v;
}

} // namespace detail

inline Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV input");
    t.header = detail::split_line(line);
    std::vector<std::vector<double>> rows;
    long row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_line(line);
        if (cells.size() != t.header.size())
            throw DataError("CSV row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                               " fields, header has " + std::to_string(t.header.size()));
        std::vector<double> r;
        for (std::size_t c = 0; c < cells.size(); ++c) r.push_back(detail::parse_number(cells[c], row, t.header[c]));
        rows.push_back(std::move(r));
        ++row;
    }
    t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(t.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) t.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return t;
}

inline Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open data file '" + path + "'");
    return read_csv(in);
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header, const MatrixXd& values) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (Index i = 0; i < values.rows(); ++i) {
        for (Index j = 0; j < values.cols(); ++j) out << (j ? "," : "") << format_number(values(i, j));
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header, const MatrixXd& values) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write_csv(out, header, values);
}

/// Column names for each role. Empty x means the fully nonparametric model.
struct ColumnRoles {
    std::string y;
    std::vector<std::string> x, z, w;
};

/// Roles from column-name prefixes: "y", then x*, z*, w* (case-insensitive).
inline ColumnRoles infer_roles(const std::vector<std::string>& header) {
    ColumnRoles r;
    for (const auto& h : header) {
        if (h.empty()) continue;
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(h[0])));
        if (c == 'y' && r.y.empty())
            r.y = h;
        else if (c == 'x')
            r.x.push_back(h);
        else if (c == 'z')
            r.z.push_back(h);
        else if (c == 'w')
            r.w.push_back(h);
    }
    if (r.y.empty()) throw DataError("no response column (name starting with 'y')");
    return r;
}

inline Dataset dataset_from_table(const Table& t, const ColumnRoles& roles) {
    auto gather = [&](const std::vector<std::string>& names) {
        MatrixXd m(t.values.rows(), static_cast<Index>(names.size()));
        for (std::size_t k = 0; k < names.size(); ++k) m.col(static_cast<Index>(k)) = t.values.col(t.column(names[k]));
        return m;
    };
    Dataset d;
    d.y = t.values.col(t.column(roles.y));
    d.x = gather(roles.x);
    d.z = gather(roles.z);
    d.w = gather(roles.w);
    validate(d);
    return d;
}

inline std::pair<std::vector<std::string>, MatrixXd> dataset_to_columns(const Dataset& d) {
    std::vector<std::string> header{"y"};
    auto add = [&](const char* prefix, Index count) {
        for (Index k = 0; k < count; ++k) header.push_back(prefix + std::to_string(k + 1));
    };
    add("x", d.kappa());
    add("z", d.p());
    add("w", d.q());
    MatrixXd m(d.n(), static_cast<Index>(header.size()));
    m.col(0) = d.y;
    m.middleCols(1, d.kappa()) = d.x;
    m.middleCols(1 + d.kappa(), d.p()) = d.z;
    m.middleCols(1 + d.kappa() + d.p(), d.q()) = d.w;
    return {header, m};
}

} // namespace lfiv

#endif
