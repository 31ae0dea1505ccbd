#pragma once

// Minimal RFC 4180 reading and writing.

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flare::data {

struct CsvRecord {
    std::size_t line = 0;  // 1-based line where the record starts
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRecord> records;

    // Position of a header column, or npos.
    std::size_t column(std::string_view name) const;
};

// Quoted fields may hold commas, doubled quotes and newlines. Blank lines are
// skipped. Throws ValidationError on an unterminated quote.
CsvTable parse_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Quotes a field when it needs it.
std::string csv_escape(std::string_view field);

// Shortest decimal text that reads back as the same double.
std::string format_double(double v);

}  // namespace flare::data
