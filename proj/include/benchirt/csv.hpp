#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace benchirt::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

/// Reads comma-separated rows. Double-quoted fields may contain commas and
/// doubled quotes. Blank lines are skipped; a leading UTF-8 BOM is ignored.
std::vector<Row> read(std::istream& in, std::string_view source);

/// Strict number parse; leading/trailing spaces allowed, nothing else.
std::optional<double> parse_number(std::string_view text);

/// Shortest representation that round-trips to the same double.
std::string format_number(double v);

/// Quotes a field when it contains a comma, quote or newline.
std::string quote(std::string_view field);

std::string trim(std::string_view s);

}  // namespace benchirt::csv
