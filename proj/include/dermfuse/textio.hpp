#pragma once

// Small helpers shared by the comma-separated readers and writers.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dermfuse::textio {

// A parsed comma-separated table. Rows keep the 1-based source line number.
struct Table {
  std::vector<std::string> header;
  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::vector<std::string> split_fields(std::string_view line);

// Parses `contents` and checks the header matches `expected_header` exactly.
// Empty lines are skipped; a trailing '\r' is tolerated. `source` names the input in errors.
Table parse_table(std::string_view contents, std::string_view source,
                  const std::vector<std::string>& expected_header);

Table read_table(const std::filesystem::path& path,
                 const std::vector<std::string>& expected_header);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Shortest representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace dermfuse::textio
