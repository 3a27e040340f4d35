#pragma once

// Minimal CSV dialect: comma separator, first row is the header, UTF-8,
// '.' decimal point, RFC 4180 quoting ("" escapes a quote inside a quoted
// field, quoted fields may hold commas and newlines).

#include "sheetsmith/error.hpp"

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace sheetsmith::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Column index for `name`, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw CsvError("missing required column '" + std::string(name) + "'");
  }
};

inline std::vector<Row> parse_rows(std::string_view text, std::vector<std::size_t>* lines = nullptr) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // Skip blank lines.
    if (!(row.size() == 1 && row[0].empty())) {
      rows.push_back(std::move(row));
      if (lines) lines->push_back(row_line);
    }
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
    case '"':
      if (field_started && !field.empty())
        throw CsvError("line " + std::to_string(line) + ": quote inside unquoted field");
      in_quotes = true;
      field_started = true;
      break;
    case ',':
      end_field();
      break;
    case '\r':
      break;
    case '\n':
      end_row();
      ++line;
      row_line = line;
      break;
    default:
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw CsvError("line " + std::to_string(line) + ": unterminated quoted field");
  if (field_started || !row.empty()) end_row();
  return rows;
}

inline Table parse(std::string_view text) {
  Table t;
  std::vector<std::size_t> lines;
  auto rows = parse_rows(text, &lines);
  if (rows.empty()) throw CsvError("file is empty; a header row is required");
  t.header = std::move(rows.front());
  // Strip a UTF-8 byte order mark.
  if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) t.header[0].erase(0, 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != t.header.size())
      throw CsvError("line " + std::to_string(lines[i]) + ": expected " +
                     std::to_string(t.header.size()) + " fields, found " +
                     std::to_string(rows[i].size()));
    t.rows.push_back(std::move(rows[i]));
    t.line_numbers.push_back(lines[i]);
  }
  return t;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse(text);
}

inline double parse_number(std::string_view field, std::string_view what) {
  std::string_view s = field;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw CsvError(std::string(what) + ": '" + std::string(field) + "' is not a number");
  return value;
}

inline long long parse_integer(std::string_view field, std::string_view what) {
  std::string_view s = field;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  long long value = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw CsvError(std::string(what) + ": '" + std::string(field) + "' is not an integer");
  return value;
}

inline std::string escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
               (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

} // namespace sheetsmith::csv
