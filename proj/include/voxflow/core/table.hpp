#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace voxflow {

enum class ColumnKind { Numeric, Categorical, Text };

const char *to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string &s);

// std::monostate marks a missing cell.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell &c) { return std::holds_alternative<std::monostate>(c); }

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  friend bool operator==(const Column &, const Column &) = default;
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::optional<std::string> id_column;

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return columns.size(); }
  std::optional<std::size_t> find_column(const std::string &name) const;
  // Throws KeyMissing when absent.
  std::size_t column_index(const std::string &name) const;

  // Numeric view of one column; missing cells become NaN. Throws when the
  // column is not numeric.
  std::vector<double> numeric_column(const std::string &name) const;

  // Throws RaggedRow / InvalidTable when invariants are violated.
  void validate() const;

  friend bool operator==(const Table &, const Table &) = default;
};

// Text form of a cell as written to CSV: shortest round-trip decimal for
// numbers, empty for missing.
std::string format_cell(const Cell &c);
std::string format_number(double v);

} // namespace voxflow
