#pragma once
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/dataset.hpp>
#include <ocmt/error.hpp>

namespace ocmt {

struct CsvSchema
{
    std::optional<std::string> response;  // default: first column
    std::vector<std::string> binary;
    std::vector<std::string> log;
};

struct IngestReport
{
    int rows_read = 0;
    int rows_dropped = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// Splits one record; double quotes delimit fields that contain commas.
inline std::vector<std::string> split_csv_line(const std::string& line, int row)
{
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError("row " + std::to_string(row) + ": unterminated quoted field");
    cells.push_back(std::move(cur));
    return cells;
}

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

inline bool is_missing(std::string_view s)
{
    s = trim(s);
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == ".";
}

inline double parse_cell(std::string_view s, int row, const std::string& column)
{
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '"
                         + std::string(s) + "' as a number");
    }
    return v;
}

} // namespace detail

/// Reads a headed CSV file into a Dataset. Rows with a missing cell are
/// dropped. Continuous columns are optionally log1p-transformed and then
/// min-max mapped onto [0,1]; the maps are kept in `transforms`.
inline Dataset ingest_csv(std::istream& in, const CsvSchema& schema, IngestReport* report = nullptr)
{
    IngestReport local;
    IngestReport& rep = report ? *report : local;

    std::string line;
    if (!std::getline(in, line)) throw ParseError("input is empty (a header row is required)");
    const auto header = detail::split_csv_line(line, 1);
    std::vector<std::string> names;
    for (const auto& h : header) names.emplace_back(detail::trim(h));
    if (names.size() < 2) throw ParseError("header must name a response and at least one covariate");
    {
        std::set<std::string> seen;
        for (const auto& nm : names) {
            if (!seen.insert(nm).second) throw ParseError("duplicate column name '" + nm + "'");
        }
    }
    const auto column_of = [&](const std::string& nm) {
        const auto it = std::find(names.begin(), names.end(), nm);
        if (it == names.end()) throw ConfigError("no column named '" + nm + "'");
        return static_cast<int>(it - names.begin());
    };
    const int response = schema.response ? column_of(*schema.response) : 0;
    std::vector<char> binary(names.size(), 0);
    std::vector<char> logged(names.size(), 0);
    for (const auto& nm : schema.binary) binary[column_of(nm)] = 1;
    for (const auto& nm : schema.log) logged[column_of(nm)] = 1;
    if (binary[response] || logged[response]) {
        throw ConfigError("the response column cannot be flagged binary or log");
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (binary[j] && logged[j]) throw ConfigError("column '" + names[j] + "' is flagged both binary and log");
    }

    std::vector<std::vector<double>> rows;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty() || detail::trim(line) == "\r") continue;
        ++rep.rows_read;
        const auto cells = detail::split_csv_line(line, row);
        if (cells.size() != names.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(names.size())
                             + " fields, found " + std::to_string(cells.size()));
        }
        if (std::any_of(cells.begin(), cells.end(), [](const std::string& c) { return detail::is_missing(c); })) {
            ++rep.rows_dropped;
            continue;
        }
        std::vector<double> values(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            values[j] = detail::parse_cell(cells[j], row, names[j]);
            if (binary[j] && values[j] != 0.0 && values[j] != 1.0) {
                throw ParseError("row " + std::to_string(row) + ", column '" + names[j]
                                 + "': binary column holds " + std::string(detail::trim(cells[j])));
            }
            if (logged[j] && !(values[j] > -1.0)) {
                throw DomainError("row " + std::to_string(row) + ", column '" + names[j]
                                  + "': log1p needs values above -1");
            }
        }
        rows.push_back(std::move(values));
    }
    if (rep.rows_dropped > 0) {
        rep.warnings.push_back("dropped " + std::to_string(rep.rows_dropped) + " of " + std::to_string(rep.rows_read)
                               + " rows with missing cells");
    }
    if (rows.empty()) throw ParseError("no complete rows remain after dropping missing cells");

    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(names.size()) - 1;
    Dataset data;
    data.y.resize(n);
    data.x.resize(n, p);
    for (int i = 0; i < n; ++i) data.y[i] = rows[i][response];
    int k = 0;
    for (int j = 0; j < static_cast<int>(names.size()); ++j) {
        if (j == response) continue;
        data.names.push_back(names[j]);
        ColumnTransform t;
        if (binary[j]) {
            data.kinds.push_back(VariableKind::binary_linear);
            for (int i = 0; i < n; ++i) data.x(i, k) = rows[i][j];
        } else {
            data.kinds.push_back(VariableKind::continuous);
            t.log1p = logged[j] != 0;
            Eigen::VectorXd col(n);
            for (int i = 0; i < n; ++i) col[i] = t.log1p ? std::log1p(rows[i][j]) : rows[i][j];
            try {
                auto [mapped, map] = rescale_to_unit(col);
                data.x.col(k) = mapped;
                t.unit_map = map;
            } catch (const DegenerateColumnError&) {
                // Left as-is; screening skips constant columns with a warning.
                data.x.col(k).setZero();
                t.unit_map = AffineUnitMap{col[0], col[0] + 1.0};
                rep.warnings.push_back("column '" + names[j] + "' is constant");
            }
        }
        data.transforms.push_back(t);
        ++k;
    }
    data.validate();
    return data;
}

inline Dataset ingest_csv(const std::string& path, const CsvSchema& schema, IngestReport* report = nullptr)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return ingest_csv(in, schema, report);
}

/// Writes a dataset in the layout ingest_csv reads (response first).
inline void write_csv(std::ostream& out, const Dataset& data, const std::string& response_name = "y")
{
    out.precision(17);
    out << response_name;
    for (int j = 0; j < data.p(); ++j) out << ',' << data.name(j);
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        out << data.y[i];
        for (int j = 0; j < data.p(); ++j) out << ',' << data.x(i, j);
        out << '\n';
    }
}

} // namespace ocmt
