#include "tdfdr/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "tdfdr/error.hpp"

namespace tdfdr {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

bool is_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::size_t to_index(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InvalidArgument("column index '" + std::string(s) + "' is not a valid number");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view field) {
    auto s = trim(field);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw DataError("not a finite number: '" + std::string(field) + "'");
    }
    return v;
}

std::vector<std::size_t> parse_column_spec(std::string_view spec, const std::vector<std::string>& header) {
    std::vector<std::size_t> out;
    const auto text = trim(spec);
    if (text.empty()) throw InvalidArgument("empty column specification");
    for (const auto raw : split_fields(text, ',')) {
        const auto token = trim(raw);
        if (token.empty()) throw InvalidArgument("empty entry in column specification '" + std::string(spec) + "'");
        const auto dash = token.find('-');
        if (is_digits(token)) {
            const auto i = to_index(token);
            if (i == 0) throw InvalidArgument("column indices are 1-based");
            out.push_back(i - 1);
        } else if (dash != std::string_view::npos && is_digits(token.substr(0, dash)) &&
                   is_digits(token.substr(dash + 1))) {
            const auto lo = to_index(token.substr(0, dash));
            const auto hi = to_index(token.substr(dash + 1));
            if (lo == 0 || hi < lo) throw InvalidArgument("bad column range '" + std::string(token) + "'");
            for (auto i = lo; i <= hi; ++i) out.push_back(i - 1);
        } else {
            const auto it = std::find(header.begin(), header.end(), token);
            if (it == header.end()) throw InvalidArgument("unknown column name '" + std::string(token) + "'");
            out.push_back(static_cast<std::size_t>(it - header.begin()));
        }
    }
    if (!header.empty()) {
        for (const auto c : out) {
            if (c >= header.size()) {
                throw InvalidArgument("column " + std::to_string(c + 1) + " outside the " +
                                      std::to_string(header.size()) + " data columns");
            }
        }
    }
    return out;
}

IngestResult ingest_matrix(std::istream& in, const IngestOptions& options) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> column_names;
    std::size_t n_columns = 0;
    bool have_shape = false;
    const std::size_t lead = options.id_column ? 1 : 0;

    std::vector<std::string> ids;
    std::vector<double> values;
    IngestResult result;
    std::vector<double> row;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, options.delimiter);

        if (!have_shape) {
            if (fields.size() <= lead) throw DataError("line " + std::to_string(line_no) + ": no data columns");
            n_columns = fields.size() - lead;
            have_shape = true;
            if (options.header) {
                for (std::size_t i = lead; i < fields.size(); ++i) column_names.emplace_back(trim(fields[i]));
                continue;
            }
            for (std::size_t i = 0; i < n_columns; ++i) column_names.push_back("c" + std::to_string(i + 1));
        }

        if (fields.size() != n_columns + lead) {
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(n_columns + lead) +
                            " fields, found " + std::to_string(fields.size()));
        }
        row.clear();
        bool ok = true;
        for (std::size_t i = lead; i < fields.size() && ok; ++i) {
            try {
                row.push_back(parse_double(fields[i]));
            } catch (const DataError&) {
                ok = false;
            }
        }
        if (!ok) {
            ++result.dropped_rows;
            result.dropped_lines.push_back(line_no);
            continue;
        }
        ids.push_back(options.id_column ? std::string(trim(fields[0])) : "row" + std::to_string(ids.size() + 1));
        values.insert(values.end(), row.begin(), row.end());
    }

    if (!have_shape) throw DataError("empty input: no header or data rows");
    if (ids.empty()) {
        throw DataError(result.dropped_rows > 0 ? "empty dataset: every data row was dropped"
                                                : "empty dataset: no data rows");
    }

    const auto cases = parse_column_spec(options.cases, column_names);
    const auto controls = parse_column_spec(options.controls, column_names);
    const std::unordered_set<std::size_t> case_set(cases.begin(), cases.end());
    for (const auto c : controls) {
        if (case_set.count(c)) {
            throw DataError("case and control column sets overlap at column " + std::to_string(c + 1));
        }
    }
    for (const auto* cols : {&cases, &controls}) {
        for (const auto c : *cols) {
            if (c >= n_columns) {
                throw InvalidArgument("column " + std::to_string(c + 1) + " outside the " + std::to_string(n_columns) +
                                " data columns");
            }
        }
    }

    result.dataset = GroupedDataset(std::move(ids), n_columns, std::move(values), cases, controls,
                                    std::move(column_names));
    return result;
}

IngestResult ingest_matrix(const std::filesystem::path& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    return ingest_matrix(in, options);
}

void write_matrix(std::ostream& out, const GroupedDataset& data, char delimiter) {
    out << "id";
    for (std::size_t c = 0; c < data.n_columns(); ++c) {
        out << delimiter << (data.column_names().empty() ? "c" + std::to_string(c + 1) : data.column_names()[c]);
    }
    out << '\n';
    for (std::size_t j = 0; j < data.m(); ++j) {
        out << data.ids()[j];
        for (const double v : data.row(j)) out << delimiter << format_double(v);
        out << '\n';
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace tdfdr
