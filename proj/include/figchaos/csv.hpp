#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "figchaos/types.hpp"

namespace figchaos
{

class CsvFormatError : public std::runtime_error {
  public:
    CsvFormatError(const std::string &path, std::size_t row,
                   const std::string &what)
        : std::runtime_error(path + ":" + std::to_string(row) + ": " + what),
          row(row)
    {
    }

    std::size_t row;  // 1-based, header is row 1
};

namespace detail
{

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline double parse_double(std::string_view field, const std::string &path,
                           std::size_t row)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
        field.remove_suffix(1);
    }
    if (field.empty()) {
        throw CsvFormatError(path, row, "empty numeric field");
    }
    double value = 0.0;
    const auto *end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw CsvFormatError(path, row,
                             "cannot parse '" + std::string(field) +
                                 "' as a number");
    }
    if (!std::isfinite(value)) {
        throw CsvFormatError(path, row, "non-finite value '" +
                                            std::string(field) + "'");
    }
    return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string strip_line(std::string line)
{
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

} // namespace detail

/// Columns `u` (innovations) or `u,sigma` when the volatility path is set.
inline void write_series(const std::filesystem::path &path,
                         const TimeSeries &series)
{
    if (series.has_volatility()) {
        require(series.volatility.size() == series.values.size(),
                "volatility path must match the series length");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() +
                                 " for writing");
    }
    out << (series.has_volatility() ? "u,sigma\n" : "u\n");
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << detail::format_double(series.values[i]);
        if (series.has_volatility()) {
            out << ',' << detail::format_double(series.volatility[i]);
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

/// Reads a series written by write_series, or any single-column numeric CSV
/// with a one-line header. A second column is taken as the volatility path;
/// further columns are rejected.
inline TimeSeries read_series(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    const std::string name = path.string();

    std::string line;
    if (!std::getline(in, line)) {
        throw CsvFormatError(name, 1, "missing header row");
    }
    const auto header = detail::split_fields(detail::strip_line(line));
    if (header.size() > 2) {
        throw CsvFormatError(name, 1,
                             "expected 1 or 2 columns, found " +
                                 std::to_string(header.size()));
    }
    const std::size_t columns = header.size();

    TimeSeries series;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = detail::strip_line(line);
        if (line.empty()) {
            continue;
        }
        const auto fields = detail::split_fields(line);
        if (fields.size() != columns) {
            throw CsvFormatError(name, row,
                                 "expected " + std::to_string(columns) +
                                     " fields, found " +
                                     std::to_string(fields.size()));
        }
        series.values.push_back(detail::parse_double(fields[0], name, row));
        if (columns == 2) {
            series.volatility.push_back(
                detail::parse_double(fields[1], name, row));
        }
    }
    if (series.values.empty()) {
        throw CsvFormatError(name, row, "no data rows");
    }
    return series;
}

/// Column-oriented table with one header per column; all columns must share
/// one length. NaN cells are written as empty fields.
inline void write_table(const std::filesystem::path &path,
                        const std::vector<std::string> &headers,
                        const std::vector<std::vector<double>> &columns)
{
    require(!headers.empty() && headers.size() == columns.size(),
            "need one header per column");
    const std::size_t rows = columns.front().size();
    for (const auto &column : columns) {
        require(column.size() == rows, "table columns must share one length");
    }

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() +
                                 " for writing");
    }
    for (std::size_t c = 0; c < headers.size(); ++c) {
        out << (c ? "," : "") << headers[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) {
                out << ',';
            }
            if (std::isfinite(columns[c][r])) {
                out << detail::format_double(columns[c][r]);
            }
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

inline void write_curve(const std::filesystem::path &path,
                        const std::string &x_name, const std::string &y_name,
                        const EstimatorCurve &curve)
{
    write_table(path, {x_name, y_name}, {curve.x, curve.y});
}

} // namespace figchaos
