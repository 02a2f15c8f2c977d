#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tdfdr/dataset.hpp"

namespace tdfdr {

/// Column selection over the data columns. Either 1-based indices and
/// ranges ("1-3", "1,2,5-7") or header names ("ctl1,ctl2"). Indices past a
/// non-empty header are rejected.
std::vector<std::size_t> parse_column_spec(std::string_view spec, const std::vector<std::string>& header);

struct IngestOptions {
    char delimiter = '\t';
    std::string cases;
    std::string controls;
    bool header = true;
    bool id_column = true;
};

struct IngestResult {
    GroupedDataset dataset;
    std::size_t dropped_rows = 0;
    std::vector<std::size_t> dropped_lines;  // 1-based line numbers
};

/// Reads a delimited matrix. Rows with missing, non-numeric or non-finite
/// entries are dropped and counted; a row with the wrong number of fields is
/// a DataError naming its line.
IngestResult ingest_matrix(std::istream& in, const IngestOptions& options);
IngestResult ingest_matrix(const std::filesystem::path& path, const IngestOptions& options);

/// Writes the dataset in the format ingest_matrix reads (header + id column).
void write_matrix(std::ostream& out, const GroupedDataset& data, char delimiter = '\t');

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);
/// Throws DataError unless the whole field parses as a finite double.
double parse_double(std::string_view field);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tdfdr
