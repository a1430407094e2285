#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "trigfit/error.hpp"

namespace trigfit::csv {

/// 17 significant digits: enough to round-trip any double.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    cells.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

/// Numeric values from column `column` of a CSV file (negative = count from
/// the end). A first line that does not parse as a number is taken as a header.
inline std::vector<double> read_column(const std::string& path, int column = -1) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_line(line);
    const int n = static_cast<int>(cells.size());
    const int idx = column < 0 ? n + column : column;
    if (idx < 0 || idx >= n) throw FormatError(path + ":" + std::to_string(line_no) + ": missing column");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cells[static_cast<std::size_t>(idx)], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cells[static_cast<std::size_t>(idx)].size()) {
      if (values.empty() && line_no == 1) continue;  // header
      throw FormatError(path + ":" + std::to_string(line_no) + ": not a number");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace trigfit::csv
