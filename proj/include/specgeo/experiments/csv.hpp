#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specgeo/error.hpp"

namespace specgeo::experiments {

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// RFC 4180 quoting for cells containing separators, quotes or newlines.
inline std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// A table of string cells with leading '#' comment lines.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(std::string line) { comments_.push_back(std::move(line)); }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) fail(ErrorKind::LengthMismatch, "row width differs from header");
    rows_.push_back(std::move(cells));
  }

  void add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(std::move(cells));
  }

  // Trailing comment lines, used for fitted summaries.
  void footer(std::string line) { footers_.push_back(std::move(line)); }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(std::stod(r.at(j)));
    return out;
  }

  std::string str() const {
    std::string out;
    for (const auto& c : comments_) out += "# " + c + "\n";
    for (std::size_t j = 0; j < columns_.size(); ++j) out += (j ? "," : "") + csv_escape(columns_[j]);
    out += "\n";
    for (const auto& r : rows_) {
      for (std::size_t j = 0; j < r.size(); ++j) out += (j ? "," : "") + csv_escape(r[j]);
      out += "\n";
    }
    for (const auto& f : footers_) out += "# " + f + "\n";
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> footers_;
  std::vector<std::vector<std::string>> rows_;
};

/// Parsed CSV: header names and string rows, comment lines skipped.
struct CsvData {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t index_of(std::string_view name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
      if (columns[j] == name) return j;
    return columns.size();
  }
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
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
  cells.push_back(std::move(cur));
  return cells;
}

inline CsvData parse_csv(std::string_view text) {
  CsvData d;
  bool header = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    auto cells = split_csv_line(line);
    if (header) {
      d.columns = std::move(cells);
      header = false;
    } else {
      if (cells.size() != d.columns.size()) fail(ErrorKind::LengthMismatch, "CSV row width differs from header");
      d.rows.push_back(std::move(cells));
    }
  }
  return d;
}

}  // namespace specgeo::experiments
