#include "ggm/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ggm/errors.hpp"

namespace ggm {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix_csv(const SymMatrix& a, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    const int p = a.dim();
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            if (j) out << ',';
            out << format_double(a(i, j));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::vector<double> parse_csv_line(const std::string& line, const std::string& path) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        size_t pos = 0;
        double v;
        try {
            v = std::stod(cell, &pos);
        } catch (const std::exception&) {
            throw IoError("bad numeric literal '" + cell + "' in " + path);
        }
        row.push_back(v);
    }
    return row;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            first = false;
            continue;
        }
        if (first) {
            first = false;
            if (line[0] == '#') continue;
            // a non-numeric first line is a column header
            try {
                rows.push_back(parse_csv_line(line, path));
            } catch (const IoError&) {
            }
            continue;
        }
        rows.push_back(parse_csv_line(line, path));
    }
    return rows;
}

}  // namespace

SymMatrix read_matrix_csv(const std::string& path) {
    const auto rows = read_rows(path);
    const int p = static_cast<int>(rows.size());
    if (p == 0) throw IoError("empty matrix file: " + path);
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(p) * p);
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != p) {
            throw IoError("ragged matrix (expected " + std::to_string(p) + " columns) in " + path);
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return SymMatrix::symmetrize(p, flat);
}

void write_table_csv(const std::vector<std::vector<double>>& rows, const std::string& path,
                     const std::string& header) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (!header.empty()) out << header << '\n';
    for (const auto& r : rows) {
        for (size_t j = 0; j < r.size(); ++j) {
            if (j) out << ',';
            out << format_double(r[j]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<std::vector<double>> read_table_csv(const std::string& path) { return read_rows(path); }

}  // namespace ggm
