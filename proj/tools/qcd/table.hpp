#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace qcd::cli {

/// Empty cells are monostate; CSV writes nothing, JSON writes null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  std::size_t column(std::string_view name) const;  // throws if absent
};

enum class Format { csv, json };

/// Shortest decimal string that parses back to exactly `v`; "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_double(double v);
std::string format_cell(const Cell& cell);

/// Header row, '.' decimals, LF line endings.
void write_csv(const Table& table, std::ostream& out);
/// Array of objects keyed by column name.
void write_json(const Table& table, std::ostream& out);
void write_table(const Table& table, Format format, std::ostream& out);

/// Text table as written by write_csv. Cells stay strings.
struct TextTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name`, or nullopt.
  std::optional<std::size_t> find(std::string_view name) const;
};

/// Throws std::runtime_error naming the line on ragged rows.
TextTable read_csv(std::istream& in);

}  // namespace qcd::cli
