#pragma once

// Column-oriented CSV tables: first column is the grid, one column per
// sample. Numbers are written with 17 significant digits so binary64 values
// survive a write/read cycle unchanged.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "warpfda/error.hpp"
#include "warpfda/grid_function.hpp"
#include "warpfda/warping.hpp"

namespace warpfda {

inline std::string format_number(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_row(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_row(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ParseError(source + ": row " + std::to_string(row) + " has " +
                           std::to_string(cells.size()) + " fields, header has " +
                           std::to_string(table.header.size()),
                       row, cells.size());
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) {
    throw ParseError(source + ": missing header row", 1, 0);
  }
  return table;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path);
  }
  return parse_csv(in, path);
}

inline double parse_number(const std::string& cell, const std::string& source, std::size_t row,
                           std::size_t column) {
  double x = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, x);
  if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(x)) {
    throw ParseError(source + ": row " + std::to_string(row) + ", column " +
                         std::to_string(column) + ": '" + cell + "' is not a finite number",
                     row, column);
  }
  return x;
}

/// A grid plus one function per column. Rows are 1-based counting the header
/// as row 1; columns are 1-based.
struct ColumnData {
  GridPtr grid;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

inline ColumnData read_columns(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2) {
    throw ParseError(path + ": need a grid column and at least one sample column", 1,
                     table.header.size());
  }
  const std::size_t n = table.rows.size();
  std::vector<double> points(n);
  ColumnData out;
  out.names.assign(table.header.begin() + 1, table.header.end());
  out.columns.assign(out.names.size(), std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = table.rows[r];
    points[r] = parse_number(cells[0], path, r + 2, 1);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      out.columns[c - 1][r] = parse_number(cells[c], path, r + 2, c + 1);
    }
  }
  for (std::size_t r = 1; r < n; ++r) {
    if (!(points[r] > points[r - 1])) {
      throw ParseError(path + ": grid column not strictly increasing at row " +
                           std::to_string(r + 2),
                       r + 2, 1);
    }
  }
  try {
    out.grid = Grid::from_points(std::move(points));
  } catch (const ValidationError& e) {
    throw ParseError(path + ": " + e.what(), 0, 1);
  }
  return out;
}

struct Dataset {
  GridPtr grid;
  std::vector<std::string> names;
  std::vector<GridFunction> registered;
  std::vector<WarpingFunction> warpings;
  /// Optional per-sample columns copied to the score table untouched.
  std::optional<CsvTable> locations;
};

/// Reads registered functions and (optionally) warpings with the same layout.
/// Missing warpings default to the identity.
inline Dataset ingest_csv(const std::string& registered_path,
                          const std::optional<std::string>& warpings_path = std::nullopt,
                          const std::optional<std::string>& locations_path = std::nullopt) {
  ColumnData reg = read_columns(registered_path);
  Dataset out;
  out.grid = reg.grid;
  out.names = reg.names;
  for (auto& col : reg.columns) {
    out.registered.emplace_back(reg.grid, std::move(col));
  }
  if (warpings_path) {
    ColumnData warp = read_columns(*warpings_path);
    if (!same_grid(*warp.grid, *reg.grid)) {
      throw ParseError(*warpings_path + ": grid column differs from " + registered_path, 0, 1);
    }
    if (warp.columns.size() != reg.columns.size()) {
      throw ParseError(*warpings_path + ": " + std::to_string(warp.columns.size()) +
                           " warping columns for " + std::to_string(reg.columns.size()) +
                           " registered functions",
                       1, 0);
    }
    for (std::size_t c = 0; c < warp.columns.size(); ++c) {
      const std::string where = *warpings_path + ", column " + std::to_string(c + 2) + " (" +
                                warp.names[c] + "): ";
      try {
        out.warpings.push_back(
            validate_warping(GridFunction(reg.grid, std::move(warp.columns[c]))));
      } catch (const EndpointError& e) {
        throw EndpointError(where + e.what(), e.indices());
      } catch (const MonotonicityError& e) {
        throw MonotonicityError(where + e.what(), e.indices());
      }
    }
  } else {
    for (std::size_t c = 0; c < reg.columns.size(); ++c) {
      out.warpings.push_back(WarpingFunction::identity(reg.grid));
    }
  }
  if (locations_path) {
    CsvTable loc = read_csv(*locations_path);
    if (loc.rows.size() != out.registered.size()) {
      throw ParseError(*locations_path + ": " + std::to_string(loc.rows.size()) +
                           " rows for " + std::to_string(out.registered.size()) + " samples",
                       0, 0);
    }
    out.locations = std::move(loc);
  }
  return out;
}

inline void write_csv(std::ostream& out, const CsvTable& table) {
  const auto put = [&out](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out << ',';
      out << cells[c];
    }
    out << '\n';
  };
  put(table.header);
  for (const auto& row : table.rows) put(row);
}

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write " + path);
  }
  write_csv(out, table);
  if (!out) {
    throw ValidationError("write failed for " + path);
  }
}

/// Grid column followed by one column per function.
inline CsvTable columns_table(std::string grid_name, std::span<const double> grid,
                              const std::vector<std::string>& names,
                              const std::vector<std::span<const double>>& columns) {
  CsvTable table;
  table.header.push_back(std::move(grid_name));
  table.header.insert(table.header.end(), names.begin(), names.end());
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::vector<std::string> row{format_number(grid[r])};
    for (const auto& col : columns) {
      row.push_back(format_number(col[r]));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace warpfda
