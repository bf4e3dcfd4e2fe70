#include "increff/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "increff/errors.hpp"

namespace increff {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace and a possible trailing \r
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string()
                                             : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Locale-independent numeric parse.
double parse_cell(const std::string& s, std::size_t row,
                  const std::string& col) {
    double v = 0.0;
    const char* begin = s.c_str();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw DataError("NonNumericCell: row " + std::to_string(row) +
                        ", column \"" + col + "\": \"" + s + "\"");
    return v;
}

}  // namespace

void validate(const Dataset& ds) {
    const Eigen::Index n = ds.y.size();
    if (n < 1) throw DataError("InvariantViolation: empty dataset (n = 0)");
    if (ds.t.size() != n)
        throw DataError("InvariantViolation: length mismatch, y has " +
                        std::to_string(n) + " rows, t has " +
                        std::to_string(ds.t.size()));
    if (ds.x.cols() > 0 && ds.x.rows() != n)
        throw DataError("InvariantViolation: length mismatch, y has " +
                        std::to_string(n) + " rows, x has " +
                        std::to_string(ds.x.rows()));
    if (ds.h && ds.h->size() != n)
        throw DataError("InvariantViolation: length mismatch, y has " +
                        std::to_string(n) + " rows, h has " +
                        std::to_string(ds.h->size()));
    if (!ds.y.allFinite())
        throw DataError("InvariantViolation: non-finite entry in y");
    if (!ds.t.allFinite())
        throw DataError("InvariantViolation: non-finite entry in t");
    if (ds.x.size() > 0 && !ds.x.allFinite())
        throw DataError("InvariantViolation: non-finite entry in x");
    if (ds.h && !ds.h->allFinite())
        throw DataError("InvariantViolation: non-finite entry in h");
    if (static_cast<Eigen::Index>(ds.covariate_names.size()) != ds.x.cols())
        throw DataError("InvariantViolation: covariate name count " +
                        std::to_string(ds.covariate_names.size()) +
                        " does not match x columns " +
                        std::to_string(ds.x.cols()));
    std::set<std::string> seen;
    for (const auto& name : ds.covariate_names)
        if (!seen.insert(name).second)
            throw DataError("InvariantViolation: duplicate column name \"" +
                            name + "\"");
}

Dataset load_csv(const std::string& path, const ColumnSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("EmptyFile: " + path);
    const std::vector<std::string> header = split_csv_line(line);

    auto find_col = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw DataError("MissingColumn: \"" + name + "\" in " + path);
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t yi = find_col(schema.outcome_name);
    const std::size_t ti = find_col(schema.treatment_name);
    std::vector<std::size_t> xi;
    xi.reserve(schema.covariate_names.size());
    for (const auto& name : schema.covariate_names) xi.push_back(find_col(name));

    std::vector<double> ys, ts;
    std::vector<std::vector<double>> xs(xi.size());
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        ys.push_back(parse_cell(cells[yi], row, schema.outcome_name));
        ts.push_back(parse_cell(cells[ti], row, schema.treatment_name));
        for (std::size_t k = 0; k < xi.size(); ++k)
            xs[k].push_back(
                parse_cell(cells[xi[k]], row, schema.covariate_names[k]));
    }
    if (row == 0) throw DataError("EmptyFile: no data rows in " + path);

    Dataset ds;
    ds.y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(row));
    ds.t = Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(row));
    ds.x.resize(static_cast<Eigen::Index>(row),
                static_cast<Eigen::Index>(xi.size()));
    for (std::size_t k = 0; k < xi.size(); ++k)
        ds.x.col(static_cast<Eigen::Index>(k)) =
            Eigen::Map<Eigen::VectorXd>(xs[k].data(),
                                        static_cast<Eigen::Index>(row));
    ds.covariate_names = schema.covariate_names;
    validate(ds);
    return ds;
}

void write_csv(const std::string& path, const Dataset& ds,
               const ColumnSchema& schema) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << schema.outcome_name << ',' << schema.treatment_name;
    for (const auto& name : ds.covariate_names) out << ',' << name;
    if (ds.h) out << ",h";
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        // shortest representation that round-trips exactly
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.write(buf, res.ptr - buf);
    };
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        put(ds.y[i]);
        out << ',';
        put(ds.t[i]);
        for (Eigen::Index k = 0; k < ds.d(); ++k) {
            out << ',';
            put(ds.x(i, k));
        }
        if (ds.h) {
            out << ',';
            put((*ds.h)[i]);
        }
        out << '\n';
    }
}

}  // namespace increff
