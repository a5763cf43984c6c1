#include "benchirt/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>

#include "benchirt/errors.hpp"

namespace benchirt::csv {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<Row> read(std::istream& in, std::string_view source) {
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    Row row{line_no, {}};
    std::string field;
    bool quoted = false;
    const std::size_t start_line = line_no;
    for (std::size_t pos = 0;; ++pos) {
      if (pos == line.size()) {
        if (!quoted) break;
        // quoted field spans a newline
        std::string next;
        if (!std::getline(in, next))
          throw InputError(std::string(source) + ":" + std::to_string(start_line) + ": unterminated quoted field");
        ++line_no;
        if (!next.empty() && next.back() == '\r') next.pop_back();
        field += '\n';
        line = std::move(next);
        pos = static_cast<std::size_t>(-1);
        continue;
      }
      const char ch = line[pos];
      if (quoted) {
        if (ch == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            field += '"';
            ++pos;
          } else {
            quoted = false;
          }
        } else {
          field += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        row.fields.push_back(trim(field));
        field.clear();
      } else {
        field += ch;
      }
    }
    row.fields.push_back(trim(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<double> parse_number(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

}  // namespace benchirt::csv
