#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prominence {

// Minimal CSV support for the pipeline's tabular exports. Fields containing
// commas, quotes or newlines are quoted on write; quoted fields are unescaped
// on read.

std::vector<std::string> split_csv_line(std::string_view line);

std::string join_csv_row(const std::vector<std::string>& fields);

// Shortest round-trip decimal representation (std::to_chars); "nan" for NaN.
std::string format_double(double v);

// Parses a double; empty string or "nan" yields NaN.
double parse_double(std::string_view s);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const;  // -1 when absent
};

CsvTable read_csv_file(const std::string& path);

}  // namespace prominence
